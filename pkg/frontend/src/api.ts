import type {
  AutoConfigBody,
  AutoConfigResponse,
  DashboardResponse,
  EventBody,
  HistoryResponse,
  ManualConfigBody,
  ManualConfigResponse,
  RetrainResponse,
  SessionResponse,
  Variant,
  VersionResponse,
} from "./types.js";

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<ApiRequestError> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = await response.json();
    code = body.code ?? code;
    message = body.message ?? message;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiRequestError(response.status, code, message);
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  createSession(variant: Variant): Promise<SessionResponse> {
    return this.request("POST", "/sessions", { variant });
  }

  getDashboard(sessionId: string): Promise<DashboardResponse> {
    return this.request("GET", `/sessions/${sessionId}/dashboard`);
  }

  postManualConfig(sessionId: string, config: ManualConfigBody): Promise<ManualConfigResponse> {
    return this.request("POST", `/sessions/${sessionId}/config/manual`, config);
  }

  postAutoConfig(sessionId: string, config: AutoConfigBody): Promise<AutoConfigResponse> {
    return this.request("POST", `/sessions/${sessionId}/config/auto`, config);
  }

  retrain(sessionId: string): Promise<RetrainResponse> {
    return this.request("POST", `/sessions/${sessionId}/retrain`);
  }

  save(sessionId: string): Promise<VersionResponse> {
    return this.request("POST", `/sessions/${sessionId}/save`);
  }

  discard(sessionId: string): Promise<VersionResponse> {
    return this.request("POST", `/sessions/${sessionId}/discard`);
  }

  revert(sessionId: string, versionId: number): Promise<VersionResponse> {
    return this.request("POST", `/sessions/${sessionId}/revert/${versionId}`);
  }

  getHistory(sessionId: string): Promise<HistoryResponse> {
    return this.request("GET", `/sessions/${sessionId}/history`);
  }

  postEvent(sessionId: string, event: EventBody): Promise<unknown> {
    return this.request("POST", `/sessions/${sessionId}/events`, event);
  }
}
