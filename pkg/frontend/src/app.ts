/** The web player controller.
 *
 * Invariants it maintains:
 *  - no drama state lives in the client: after every action it re-fetches
 *    the transcript and plot views and re-renders from those alone, so a
 *    page reload reconstructs the identical view;
 *  - at most one turn in flight per session (the input is disabled between
 *    post and response);
 *  - a network failure surfaces a retry affordance that reuses the same
 *    idempotency token, so retrying can never double-play a turn.
 */

import { ApiError, NetworkError, StagecraftClient } from "./api.js";
import {
  buildPlotPanel,
  buildTranscriptView,
  freshToken,
  premiseLengthWarning,
} from "./state.js";
import {
  Scaffold,
  buildScaffold,
  renderPlotPanel,
  renderTranscript,
  setRetryVisible,
} from "./ui.js";

type EventSourceCtor = new (url: string) => {
  addEventListener(type: string, listener: () => void): void;
  close(): void;
};

export interface WebPlayerOptions {
  baseUrl: string;
  root: HTMLElement;
  fetchImpl?: typeof fetch;
  /** Streaming is optional: when no EventSource implementation exists the
   * client falls back to whole-response rendering. */
  eventSource?: EventSourceCtor | null;
}

interface PendingSend {
  text: string;
  token: string;
}

export class WebPlayer {
  readonly client: StagecraftClient;
  readonly scaffold: Scaffold;
  sessionId: string | null = null;
  directorView = false;
  private inFlight = false;
  private pending: PendingSend | null = null;
  private stream: { close(): void } | null = null;
  private readonly eventSource: EventSourceCtor | null;

  constructor(options: WebPlayerOptions) {
    this.client = new StagecraftClient(
      options.baseUrl,
      options.fetchImpl ?? fetch.bind(globalThis),
    );
    this.scaffold = buildScaffold(options.root);
    this.eventSource =
      options.eventSource !== undefined
        ? options.eventSource
        : ((globalThis as any).EventSource ?? null);

    this.scaffold.sendButton.addEventListener("click", () => {
      void this.send(this.scaffold.input.value);
    });
    this.scaffold.input.addEventListener("keydown", (event: KeyboardEvent) => {
      if (event.key === "Enter") void this.send(this.scaffold.input.value);
    });
    this.scaffold.retryButton.addEventListener("click", () => {
      void this.retry();
    });
    this.scaffold.directorToggle.addEventListener("click", () => {
      void this.toggleDirectorView();
    });
    this.scaffold.premiseSubmit.addEventListener("click", () => {
      void this.startFromPremise(
        this.scaffold.premiseText.value,
        Number(this.scaffold.premiseSeed.value) || 0,
      );
    });
  }

  /** Attach to a session and render entirely from the server's views. */
  async attach(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    await this.refresh();
    this.openStream();
  }

  async startSessionFromScript(scriptId: string, architecture = "hybrid"): Promise<void> {
    const info = await this.client.createSession(scriptId, architecture);
    await this.attach(info.session_id);
  }

  /** Re-fetch transcript + plots and re-render; the only render path. */
  async refresh(): Promise<void> {
    if (!this.sessionId) return;
    const transcript = await this.client.transcript(this.sessionId);
    renderTranscript(this.scaffold, buildTranscriptView(transcript, this.inFlight));
    if (this.directorView) {
      const plots = await this.client.plots(this.sessionId);
      renderPlotPanel(this.scaffold, buildPlotPanel(plots));
    }
  }

  async send(text: string): Promise<void> {
    if (!this.sessionId || this.inFlight) return;
    if (!this.pending || this.pending.text !== text) {
      this.pending = { text, token: freshToken() };
    }
    await this.deliver();
  }

  /** Retry the failed send with the same idempotency token. */
  async retry(): Promise<void> {
    if (!this.sessionId || this.inFlight || !this.pending) return;
    await this.deliver();
  }

  private async deliver(): Promise<void> {
    if (!this.sessionId || !this.pending) return;
    this.inFlight = true;
    this.scaffold.input.disabled = true;
    this.scaffold.sendButton.disabled = true;
    setRetryVisible(this.scaffold, false);
    try {
      await this.client.postMessage(this.sessionId, this.pending.text, this.pending.token);
      this.pending = null;
      this.scaffold.input.value = "";
    } catch (error) {
      if (error instanceof NetworkError) {
        setRetryVisible(this.scaffold, true, "The stage did not answer. Nothing was lost.");
      } else if (error instanceof ApiError && error.status === 502) {
        setRetryVisible(this.scaffold, true, "The turn failed; the story is unchanged.");
      } else {
        this.pending = null;
        if (!(error instanceof ApiError && error.status === 409)) throw error;
      }
    } finally {
      this.inFlight = false;
    }
    await this.refresh();
  }

  async toggleDirectorView(): Promise<void> {
    this.directorView = !this.directorView;
    this.scaffold.plotPanel.classList.toggle("hidden", !this.directorView);
    await this.refresh();
  }

  /** Premise form flow: generation job, poll, then play the new script. */
  async startFromPremise(premise: string, seed: number): Promise<void> {
    const status = this.scaffold.premiseStatus;
    status.textContent = "";
    const advisory = premiseLengthWarning(premise);
    if (premise.trim() === "") {
      status.textContent = "warning: premise is empty";
      return;
    }
    if (advisory) {
      status.textContent = `warning: ${advisory}`;
    }
    let job;
    try {
      job = await this.client.submitGeneration(premise, seed);
      status.textContent = `${status.textContent} generating (job ${job.job_id})...`.trim();
      const state = await this.client.waitForJob(job.job_id);
      if (state.state === "failed") {
        status.textContent = `generation failed: ${state.error ?? "unknown error"}`;
        status.classList.add("error-card");
        return;
      }
      const serverWarnings = state.warnings ?? state.report?.warnings ?? [];
      const warningText = serverWarnings.length
        ? `warning: ${serverWarnings.join("; ")} | `
        : "";
      status.textContent =
        `${warningText}ready: script ${state.script_id} [report: /generate/${job.job_id}]`;
      status.classList.remove("error-card");
      await this.startSessionFromScript(state.script_id as string);
    } catch (error) {
      status.textContent = `generation failed: ${String(error)}`;
      status.classList.add("error-card");
    }
  }

  private openStream(): void {
    this.stream?.close();
    this.stream = null;
    if (!this.eventSource || !this.sessionId) return;
    try {
      const source = new this.eventSource(this.client.streamUrl(this.sessionId));
      source.addEventListener("turn", () => {
        if (!this.inFlight) void this.refresh();
      });
      this.stream = source;
    } catch {
      this.stream = null; // fall back to whole-response rendering
    }
  }

  close(): void {
    this.stream?.close();
  }
}

export function mount(options: WebPlayerOptions): WebPlayer {
  return new WebPlayer(options);
}
