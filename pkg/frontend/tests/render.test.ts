import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import type { DiagnoseResponse } from "../src/api.js";
import { noCryView, resultView } from "../src/render.js";

const here = dirname(fileURLToPath(import.meta.url));
const fixture = (name: string) => join(here, "fixtures", name);

// Frozen pair produced by the backend for the same recording: the service
// response (CLI --json emits identical fields) and the CLI's plain-text
// report. The UI must show what the CLI says.
const response = JSON.parse(
  readFileSync(fixture("diagnose_response.json"), "utf8")) as DiagnoseResponse;
const cliText = readFileSync(fixture("cli_output.txt"), "utf8");

describe("result rendering parity with the CLI", () => {
  const view = resultView(response);
  const cliVerdict = /VERDICT: (\w+)/.exec(cliText)![1];
  const cliConfidencePct = /confidence: (\d+)%/.exec(cliText)![1];
  const cliSegmentLines = cliText.split("\n")
    .filter((line) => /^\s+\d+\.\d+s\s/.test(line));

  it("shows the CLI's verdict word", () => {
    expect(view.verdictText).toBe(cliVerdict);
  });

  it("shows the CLI's confidence percentage", () => {
    expect(view.confidencePct).toBe(`${cliConfidencePct}% of segments`);
  });

  it("renders one timeline block per CLI segment line, in order", () => {
    expect(view.blocks).toHaveLength(cliSegmentLines.length);
    const starts = view.blocks.map((b) => b.startS);
    expect(starts).toEqual([...starts].sort((a, b) => a - b));
  });

  it("colors an asphyxia verdict red with the referral headline", () => {
    expect(view.colorClass).toBe("verdict-asphyxia");
    expect(view.headline).toBe("Refer immediately");
    for (const block of view.blocks) expect(block.color).toBe("red");
  });

  it("derives everything from the response alone", () => {
    expect(view.modelDigest).toBe(response.model_digest);
    expect(view.elapsedText).toBe(`${response.elapsed_ms} ms`);
    expect(view.segmentSummary)
      .toBe(`${response.segments.length} of ${response.segments.length} segments flagged`);
  });
});

describe("normal verdict rendering", () => {
  it("colors green with the all-clear headline", () => {
    const normal: DiagnoseResponse = {
      ...response,
      verdict: "normal",
      confidence: 0.75,
      segments: [
        { start_s: 1, label: "normal", decision_value: -0.5 },
        { start_s: 0, label: "asphyxia", decision_value: 0.5 },
        { start_s: 2, label: "normal", decision_value: -0.9 },
        { start_s: 3, label: "normal", decision_value: -0.2 },
      ],
    };
    const view = resultView(normal);
    expect(view.colorClass).toBe("verdict-normal");
    expect(view.confidencePct).toBe("75% of segments");
    expect(view.segmentSummary).toBe("1 of 4 segments flagged");
    expect(view.blocks.map((b) => b.color)).toEqual(
      ["red", "green", "green", "green"]);  // sorted by start_s
  });
});

describe("no-cry rendering", () => {
  it("renders the amber guidance screen", () => {
    const body = JSON.parse(readFileSync(fixture("no_cry_response.json"), "utf8"));
    expect(body.error).toBe("no_cry_detected");
    const view = noCryView();
    expect(view.headline).toBe("No cry detected");
    expect(view.advice).toMatch(/re-record/i);
    expect(view.colorClass).toBe("verdict-nocry");
  });
});
