/** Pure response -> view-model mapping. Keeping this free of DOM calls is
 * what lets the CLI/UI parity check run under plain node. */

import type { DiagnoseResponse } from "./api.js";

export interface TimelineBlock {
  startS: number;
  color: "red" | "green";
  title: string;
}

export interface ResultView {
  verdictText: string;           // e.g. "asphyxia"
  headline: string;              // caregiver-facing action line
  colorClass: "verdict-asphyxia" | "verdict-normal";
  confidencePct: string;         // e.g. "100% of segments"
  segmentSummary: string;        // e.g. "6 of 6 segments flagged"
  blocks: TimelineBlock[];       // one per segment, in start order
  elapsedText: string;
  modelDigest: string;
  warnings: string[];
}

export function resultView(resp: DiagnoseResponse): ResultView {
  const asphyxia = resp.verdict === "asphyxia";
  const flagged = resp.segments.filter((s) => s.label === "asphyxia").length;
  const blocks = [...resp.segments]
    .sort((a, b) => a.start_s - b.start_s)
    .map((s) => ({
      startS: s.start_s,
      color: (s.label === "asphyxia" ? "red" : "green") as "red" | "green",
      title: `${s.start_s.toFixed(1)}s: ${s.label} (f=${s.decision_value.toFixed(3)})`,
    }));
  return {
    verdictText: resp.verdict,
    headline: asphyxia ? "Refer immediately" : "No asphyxia signs detected",
    colorClass: asphyxia ? "verdict-asphyxia" : "verdict-normal",
    confidencePct: `${Math.round(resp.confidence * 100)}% of segments`,
    segmentSummary: `${flagged} of ${resp.segments.length} segments flagged`,
    blocks,
    elapsedText: `${resp.elapsed_ms} ms`,
    modelDigest: resp.model_digest,
    warnings: resp.warnings,
  };
}

export interface NoCryView {
  headline: string;
  advice: string;
  colorClass: "verdict-nocry";
}

export function noCryView(): NoCryView {
  return {
    headline: "No cry detected",
    advice: "Re-record closer to the infant, away from loud background noise.",
    colorClass: "verdict-nocry",
  };
}
