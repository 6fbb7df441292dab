/** Typed client for the stagecraft HTTP API. The UI keeps no drama state of
 * its own; everything renders from what these calls return. */

export interface SceneHeader {
  index: number;
  location: string;
  background: string;
  mode: string;
  is_flashback: boolean;
}

export interface DecisionPayload {
  speaker: string;
  addressee: string;
  utterance: string;
  action: string | null;
  asserted_completions: string[];
  input_class: string;
  strategy: string | null;
}

export interface ReflectionPayload {
  turn: number;
  scene_index: number;
  accepted: boolean;
  violations: string[];
  modified: [string, string, string][]; // plot id, old description, new description
  inserted: [number, string, string][]; // position, plot id, description
  lint_flags: string[];
  error: string;
}

export interface TurnRecordPayload {
  turn: number;
  scene_index: number;
  architecture: string;
  player_input: string;
  decision: DecisionPayload;
  reflection: ReflectionPayload | null;
  transition: SceneHeader | null;
  finished: boolean;
  warnings: string[];
}

export interface TranscriptPayload {
  session_id: string;
  script_id?: string;
  status: string;
  turn: number;
  architecture: string;
  title: string;
  scene: SceneHeader;
  opening_scene?: SceneHeader;
  entries: { turn: number; speaker: string; addressee: string; utterance: string }[];
  records: TurnRecordPayload[];
}

export interface PlotPayload {
  id: string;
  description: string;
  completed: boolean;
  owner: string | null;
  origin: string;
}

export interface PlotsPayload {
  session_id: string;
  status: string;
  scene_index: number;
  plots: PlotPayload[];
  reflections: ReflectionPayload[];
}

export interface TurnResponse {
  turn: number;
  decisions: DecisionPayload[];
  scene_header: SceneHeader | null;
  finished: boolean;
  status: string;
  reflection: ReflectionPayload | null;
  warnings: string[];
}

export interface SessionInfo {
  session_id: string;
  script_id: string;
  architecture: string;
  scene: SceneHeader;
  title: string;
}

export interface JobState {
  job_id: string;
  state: "queued" | "running" | "done" | "failed";
  script_id?: string;
  error?: string;
  warnings?: string[];
  report?: { warnings?: string[] } | null;
}

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly detail: unknown = null,
  ) {
    super(message);
  }
}

/** Network-level failure (server unreachable, connection dropped): the UI
 * offers a retry that reuses the same idempotency token. */
export class NetworkError extends Error {}

export class StagecraftClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        headers: { "Content-Type": "application/json" },
        ...init,
      });
    } catch (cause) {
      throw new NetworkError(`cannot reach the drama service: ${String(cause)}`);
    }
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const detail = body && typeof body === "object" ? (body as any).detail : null;
      throw new ApiError(
        typeof detail === "string" ? detail : `HTTP ${response.status}`,
        response.status,
        detail,
      );
    }
    return body as T;
  }

  uploadScript(document: unknown): Promise<{ id: string }> {
    return this.request("/scripts", { method: "POST", body: JSON.stringify(document) });
  }

  createSession(scriptId: string, architecture = "hybrid"): Promise<SessionInfo> {
    return this.request("/sessions", {
      method: "POST",
      body: JSON.stringify({ script_id: scriptId, architecture }),
    });
  }

  postMessage(sessionId: string, text: string, clientToken: string): Promise<TurnResponse> {
    return this.request(`/sessions/${sessionId}/message`, {
      method: "POST",
      body: JSON.stringify({ text, client_token: clientToken }),
    });
  }

  transcript(sessionId: string): Promise<TranscriptPayload> {
    return this.request(`/sessions/${sessionId}/transcript`);
  }

  plots(sessionId: string): Promise<PlotsPayload> {
    return this.request(`/sessions/${sessionId}/plots`);
  }

  submitGeneration(premise: string, seed: number): Promise<JobState> {
    return this.request("/generate", {
      method: "POST",
      body: JSON.stringify({ premise, seed }),
    });
  }

  jobState(jobId: string): Promise<JobState> {
    return this.request(`/generate/${jobId}`);
  }

  async waitForJob(jobId: string, pollMs = 250, timeoutMs = 60_000): Promise<JobState> {
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const state = await this.jobState(jobId);
      if (state.state === "done" || state.state === "failed") return state;
      if (Date.now() > deadline) throw new ApiError("generation timed out", 504);
      await new Promise((resolve) => setTimeout(resolve, pollMs));
    }
  }

  streamUrl(sessionId: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/stream?follow=true`;
  }
}
