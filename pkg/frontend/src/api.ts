import type { ControlAck, ControlCommand, SiteGeoJSON, SnapshotMessage } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly violations: string[] = [],
  ) {
    super(message);
  }
}

async function asError(res: Response): Promise<ApiError> {
  let detail = res.statusText;
  let violations: string[] = [];
  try {
    const body = await res.json();
    detail = body.detail ?? detail;
    violations = body.violations ?? [];
  } catch {
    // non-JSON error body
  }
  return new ApiError(res.status, detail, violations);
}

/** Thin typed client over the twin server HTTP API. */
export class TwinApi {
  constructor(readonly baseUrl: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await fetch(this.baseUrl + path);
    if (!res.ok) throw await asError(res);
    return (await res.json()) as T;
  }

  async site(): Promise<SiteGeoJSON> {
    return this.getJson("/api/site");
  }

  async createSession(config: unknown): Promise<string> {
    const res = await fetch(this.baseUrl + "/api/sessions", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(config),
    });
    if (!res.ok) throw await asError(res);
    const body = (await res.json()) as { id: string };
    return body.id;
  }

  async snapshot(sessionId: string): Promise<SnapshotMessage> {
    return this.getJson(`/api/sessions/${sessionId}/snapshot`);
  }

  async control(sessionId: string, command: ControlCommand): Promise<ControlAck> {
    const res = await fetch(this.baseUrl + `/api/sessions/${sessionId}/control`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(command),
    });
    if (!res.ok) throw await asError(res);
    return (await res.json()) as ControlAck;
  }

  streamUrl(sessionId: string): string {
    const base = this.baseUrl || `${location.protocol}//${location.host}`;
    return base.replace(/^http/, "ws") + `/api/sessions/${sessionId}/stream`;
  }
}
