/** Pure view-model builders: server payloads in, render-ready structures
 * out. Keeping these pure is what makes the reload-reconstruction
 * invariant testable. */

import type {
  PlotsPayload,
  ReflectionPayload,
  SceneHeader,
  TranscriptPayload,
} from "./api.js";

export interface Bubble {
  kind: "player" | "character";
  speaker: string;
  text: string;
  action: string | null;
  turn: number;
}

export interface BannerItem {
  kind: "banner";
  scene: SceneHeader;
}

export interface EpilogueItem {
  kind: "epilogue";
}

export type TimelineItem = Bubble | BannerItem | EpilogueItem;

export interface TranscriptView {
  title: string;
  status: string;
  turn: number;
  finished: boolean;
  timeline: TimelineItem[];
  inputEnabled: boolean;
}

export function buildTranscriptView(
  payload: TranscriptPayload,
  inFlight = false,
): TranscriptView {
  const timeline: TimelineItem[] = [];
  if (payload.opening_scene) {
    timeline.push({ kind: "banner", scene: payload.opening_scene });
  }
  for (const record of payload.records) {
    timeline.push({
      kind: "player",
      speaker: "you",
      text: record.player_input.trim() === "" ? "(silence)" : record.player_input,
      action: null,
      turn: record.turn,
    });
    timeline.push({
      kind: "character",
      speaker: record.decision.speaker,
      text: record.decision.utterance,
      action: record.decision.action,
      turn: record.turn,
    });
    if (record.transition) {
      timeline.push({ kind: "banner", scene: record.transition });
    }
  }
  const finished = payload.status === "finished";
  if (finished) {
    timeline.push({ kind: "epilogue" });
  }
  return {
    title: payload.title,
    status: payload.status,
    turn: payload.turn,
    finished,
    timeline,
    inputEnabled: !finished && !inFlight,
  };
}

export interface PlotRow {
  id: string;
  description: string;
  completed: boolean;
  owner: string | null;
  reflected: boolean;
}

export interface ReflectionDiffView {
  turn: number;
  sceneIndex: number;
  accepted: boolean;
  lines: string[]; // human-readable diff lines
  lintFlags: string[];
  violations: string[];
}

export interface PlotPanelView {
  sceneIndex: number;
  rows: PlotRow[];
  reflections: ReflectionDiffView[];
  acceptedDiffCount: number;
}

export function describeReflection(payload: ReflectionPayload): ReflectionDiffView {
  const lines: string[] = [];
  for (const [plotId, oldText, newText] of payload.modified) {
    lines.push(`~ ${plotId}: "${oldText}" -> "${newText}"`);
  }
  for (const [position, plotId, description] of payload.inserted) {
    lines.push(`+ ${plotId} @ ${position}: "${description}"`);
  }
  if (payload.error) {
    lines.push(`! skipped: ${payload.error}`);
  }
  return {
    turn: payload.turn,
    sceneIndex: payload.scene_index,
    accepted: payload.accepted,
    lines,
    lintFlags: payload.lint_flags,
    violations: payload.violations,
  };
}

export function buildPlotPanel(payload: PlotsPayload): PlotPanelView {
  const reflections = payload.reflections.map(describeReflection);
  return {
    sceneIndex: payload.scene_index,
    rows: payload.plots.map((plot) => ({
      id: plot.id,
      description: plot.description,
      completed: plot.completed,
      owner: plot.owner,
      reflected: plot.origin === "reflected",
    })),
    reflections,
    acceptedDiffCount: reflections.filter((r) => r.accepted && r.lines.length > 0).length,
  };
}

/** Soft premise-length advisory mirrored from the generator's rule. */
export function premiseLengthWarning(premise: string): string | null {
  const words = premise.trim().split(/\s+/).filter(Boolean).length;
  if (words === 0) return "premise is empty";
  if (words < 50 || words > 100) {
    return `premise is ${words} words; the expected range is 50-100 words`;
  }
  return null;
}

export function freshToken(): string {
  const cryptoObj = (globalThis as { crypto?: Crypto }).crypto;
  if (cryptoObj?.randomUUID) return cryptoObj.randomUUID();
  return `tok-${Date.now()}-${Math.random().toString(36).slice(2, 10)}`;
}
