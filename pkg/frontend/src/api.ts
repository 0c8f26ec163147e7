/** Typed client over the session API. The transport is injectable so tests
 * can replay recorded responses without a server. */

import type {
  ClickResponse,
  Configuration,
  FireResponse,
  GameState,
  ModelDocument,
  ModelInfo,
  Session,
} from "./types.js";

export interface Transport {
  request(method: string, path: string, body?: unknown): Promise<unknown>;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class HttpTransport implements Transport {
  constructor(private base: string = "") {}

  async request(method: string, path: string, body?: unknown): Promise<unknown> {
    const response = await fetch(this.base + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const payload = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const detail =
        payload && typeof payload === "object" && "detail" in payload
          ? String((payload as { detail: unknown }).detail)
          : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return payload;
  }
}

export class ApiClient {
  constructor(private transport: Transport) {}

  listModels(): Promise<ModelInfo[]> {
    return this.transport.request("GET", "/api/models") as Promise<ModelInfo[]>;
  }

  getModel(modelId: string): Promise<ModelDocument> {
    return this.transport.request(
      "GET",
      `/api/models/${encodeURIComponent(modelId)}`,
    ) as Promise<ModelDocument>;
  }

  openSession(kind: "statechart" | "webstory", modelId: string): Promise<Session> {
    return this.transport.request(
      "POST",
      `/api/${kind}/${encodeURIComponent(modelId)}/sessions`,
    ) as Promise<Session>;
  }

  getSession(sessionId: string): Promise<Session> {
    return this.transport.request(
      "GET",
      `/api/sessions/${encodeURIComponent(sessionId)}`,
    ) as Promise<Session>;
  }

  fire(sessionId: string, trigger: string): Promise<FireResponse> {
    return this.transport.request(
      "POST",
      `/api/sessions/${encodeURIComponent(sessionId)}/fire`,
      { trigger },
    ) as Promise<FireResponse>;
  }

  click(sessionId: string, clickArea: string): Promise<ClickResponse> {
    return this.transport.request(
      "POST",
      `/api/sessions/${encodeURIComponent(sessionId)}/click`,
      { clickArea },
    ) as Promise<ClickResponse>;
  }
}

export type { Configuration, GameState };
