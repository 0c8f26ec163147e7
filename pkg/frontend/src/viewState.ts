/** View state and its transitions.
 *
 * The UI never computes model semantics: every configuration and game
 * state shown comes verbatim from an API response. One request per
 * session may be in flight; actions while pending are ignored.
 */

import { ApiClient, ApiError } from "./api.js";
import type {
  Configuration,
  GameState,
  LogEntry,
  ModelDocument,
  ModelInfo,
} from "./types.js";

export interface ViewState {
  models: ModelInfo[];
  selectedModel?: string;
  sessionId?: string;
  kind?: "statechart" | "webstory";
  model?: ModelDocument;
  configuration?: Configuration;
  gameState?: GameState;
  log: LogEntry[];
  pending: boolean;
  error?: string;
}

export function emptyViewState(): ViewState {
  return { models: [], log: [], pending: false };
}

export async function loadModels(
  state: ViewState,
  client: ApiClient,
): Promise<ViewState> {
  const models = await client.listModels();
  return { ...state, models };
}

export async function openSession(
  state: ViewState,
  client: ApiClient,
  modelId: string,
): Promise<ViewState> {
  const info = state.models.find((m) => m.id === modelId);
  if (!info || (info.modelType !== "statechart" && info.modelType !== "webstory")) {
    return { ...state, error: `model ${modelId} cannot be simulated` };
  }
  const kind = info.modelType as "statechart" | "webstory";
  try {
    const model = await client.getModel(modelId);
    const session = await client.openSession(kind, modelId);
    return {
      ...state,
      selectedModel: modelId,
      sessionId: session.sessionId,
      kind,
      model,
      configuration: session.configuration,
      gameState: session.state,
      log: [{ label: "session", detail: `opened ${session.sessionId}` }],
      pending: false,
      error: undefined,
    };
  } catch (err) {
    return { ...state, error: describe(err) };
  }
}

export async function fireTrigger(
  state: ViewState,
  client: ApiClient,
  trigger: string,
): Promise<ViewState> {
  if (state.pending || !state.sessionId || state.kind !== "statechart") {
    return state;
  }
  try {
    const response = await client.fire(state.sessionId, trigger);
    const entry: LogEntry = {
      label: `fire ${trigger}`,
      detail:
        `transitions=[${response.event.takenTransitions.join(",")}] ` +
        `completions=[${response.event.completions.join(",")}]`,
    };
    return {
      ...state,
      configuration: response.configuration,
      log: [...state.log, entry],
      pending: false,
      error: undefined,
    };
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      return { ...state, pending: false, error: "terminated" };
    }
    return { ...state, pending: false, error: describe(err) };
  }
}

export async function clickArea(
  state: ViewState,
  client: ApiClient,
  areaId: string,
): Promise<ViewState> {
  if (state.pending || !state.sessionId || state.kind !== "webstory") {
    return state;
  }
  try {
    const response = await client.click(state.sessionId, areaId);
    const entry: LogEntry = {
      label: `click ${areaId}`,
      detail: `screen=${response.state.currentScreen}`,
    };
    return {
      ...state,
      gameState: response.state,
      log: [...state.log, entry],
      pending: false,
      error: undefined,
    };
  } catch (err) {
    return { ...state, pending: false, error: describe(err) };
  }
}

export async function refreshSession(
  state: ViewState,
  client: ApiClient,
): Promise<ViewState> {
  if (!state.sessionId) {
    return state;
  }
  const session = await client.getSession(state.sessionId);
  return {
    ...state,
    configuration: session.configuration,
    gameState: session.state,
    error: undefined,
  };
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return `API error ${err.status}: ${err.message}`;
  }
  return String(err);
}
