/** Wire types of the ldekit session service. */

export interface ModelInfo {
  id: string;
  modelType: string;
}

export interface PropertyMap {
  [name: string]: string | number | boolean | string[];
}

export interface ModelNode {
  id: string;
  kind: string;
  parent?: string;
  properties: PropertyMap;
}

export interface ModelEdge {
  id: string;
  kind: string;
  source: string;
  target: string;
  properties: PropertyMap;
}

export interface ModelDocument {
  id: string;
  modelType: string;
  nodes: ModelNode[];
  edges: ModelEdge[];
}

export interface Configuration {
  activeStates: string[];
  env: Record<string, boolean | number>;
  history: Record<string, string[]>;
  terminated: boolean;
}

export interface SimulationEvent {
  firedTrigger: string;
  takenTransitions: string[];
  executedActions: string[];
  completions: string[];
}

export interface GameState {
  currentScreen: string;
  valuation: Record<string, boolean>;
  finished: boolean;
}

export interface Session {
  sessionId: string;
  modelId: string;
  kind: "statechart" | "webstory";
  configuration?: Configuration;
  state?: GameState;
}

export interface FireResponse {
  sessionId: string;
  configuration: Configuration;
  event: SimulationEvent;
}

export interface ClickResponse {
  sessionId: string;
  state: GameState;
}

export interface LogEntry {
  label: string;
  detail: string;
}
