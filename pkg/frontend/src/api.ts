/** Thin fetch wrapper around the station's HTTP interface. */

import type {
  AckDoc,
  CreatePlanResult,
  LaunchResult,
  MissionSummaryDoc,
  NewPlanDoc,
  QuickviewDoc,
  StatusDoc,
  TelemetryDoc,
  ValidateResult,
} from "./types.js";

export class StationHttpError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail: unknown,
  ) {
    super(message);
    this.name = "StationHttpError";
  }
}

/** Rejected commands carry the full ack in `detail`; query endpoints carry
 * a bare `{error: {code, message}}`. Pull the code out of either shape. */
function errorFrom(status: number, bodyText: string): StationHttpError {
  let code = "HttpError";
  let message = bodyText || `HTTP ${status}`;
  let detail: unknown = bodyText;
  try {
    const body = JSON.parse(bodyText);
    detail = body.detail ?? body;
    const err = (body.detail?.error ?? body.detail ?? body.error) as
      | { code?: string; message?: string }
      | undefined;
    if (err?.code) code = err.code;
    if (err?.message) message = err.message;
  } catch {
    // non-JSON body: keep the raw text
  }
  return new StationHttpError(status, code, message, detail);
}

export interface QuickviewFetch {
  /** Raw response bytes, kept verbatim so review panes show exactly what
   * the service said. */
  text: string;
  doc: QuickviewDoc;
}

export interface StreamOptions {
  limit?: number;
  signal?: AbortSignal;
}

export class StationClient {
  constructor(
    readonly baseUrl: string = "",
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<string> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const text = await resp.text();
    if (!resp.ok) throw errorFrom(resp.status, text);
    return text;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    return JSON.parse(await this.request(path, init)) as T;
  }

  private post<T>(path: string, payload?: unknown): Promise<T> {
    return this.json<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload ?? {}),
    });
  }

  status(): Promise<StatusDoc> {
    return this.json("/status");
  }

  createPlan(doc: NewPlanDoc): Promise<AckDoc<CreatePlanResult>> {
    return this.post("/plans", { plan: doc });
  }

  validatePlan(planId: string): Promise<AckDoc<ValidateResult>> {
    return this.post(`/plans/${encodeURIComponent(planId)}/validate`);
  }

  launch(planId: string): Promise<AckDoc<LaunchResult>> {
    return this.post("/missions", { plan_id: planId });
  }

  abort(missionId: string): Promise<AckDoc> {
    return this.post(`/missions/${encodeURIComponent(missionId)}/abort`);
  }

  loiter(missionId: string): Promise<AckDoc> {
    return this.post(`/missions/${encodeURIComponent(missionId)}/loiter`);
  }

  backseat(line: string): Promise<AckDoc> {
    return this.post("/backseat", { line });
  }

  setConfig(settings: Record<string, unknown>): Promise<AckDoc> {
    return this.post("/config", settings);
  }

  missions(): Promise<MissionSummaryDoc[]> {
    return this.json("/missions");
  }

  logText(missionId: string): Promise<string> {
    return this.request(`/missions/${encodeURIComponent(missionId)}/log`);
  }

  async quickview(missionId: string, t: number): Promise<QuickviewFetch> {
    const path = `/missions/${encodeURIComponent(missionId)}/quickview?t=${t}`;
    const text = await this.request(path);
    return { text, doc: JSON.parse(text) as QuickviewDoc };
  }

  exportText(missionId: string, format: "records" | "track" | "geotrack"): Promise<string> {
    return this.request(
      `/missions/${encodeURIComponent(missionId)}/export?format=${format}`,
    );
  }

  /** Consume the NDJSON telemetry stream, invoking `onDoc` per frame.
   *
   * Keepalive lines are skipped. Resolves with the number of frames seen
   * once the stream ends (server-side `limit`, shutdown, or abort).
   */
  async streamTelemetry(
    onDoc: (doc: TelemetryDoc) => void,
    opts: StreamOptions = {},
  ): Promise<number> {
    const qs = opts.limit ? `?limit=${opts.limit}` : "";
    const resp = await this.fetchImpl(`${this.baseUrl}/telemetry${qs}`, {
      signal: opts.signal,
    });
    if (!resp.ok) throw errorFrom(resp.status, await resp.text());
    if (!resp.body) throw new StationHttpError(0, "NoBody", "no response body", null);

    const reader = resp.body.getReader();
    const decoder = new TextDecoder();
    let buffered = "";
    let count = 0;
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffered += decoder.decode(value, { stream: true });
        let nl: number;
        while ((nl = buffered.indexOf("\n")) >= 0) {
          const line = buffered.slice(0, nl).trim();
          buffered = buffered.slice(nl + 1);
          if (!line) continue;
          const doc = JSON.parse(line) as TelemetryDoc & { keepalive?: boolean };
          if (doc.keepalive) continue;
          count += 1;
          onDoc(doc);
        }
      }
    } catch (err) {
      if (!opts.signal?.aborted) throw err;
    } finally {
      try {
        reader.releaseLock();
      } catch {
        // already released by a closed stream
      }
    }
    return count;
  }
}
