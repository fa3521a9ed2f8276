/** Service client. The UI performs no classification of its own: every
 * verdict pixel derives from the DiagnoseResponse returned here. */

export interface SegmentView {
  start_s: number;
  label: "normal" | "asphyxia";
  decision_value: number;
}

export interface DiagnoseResponse {
  verdict: "normal" | "asphyxia";
  confidence: number;
  segments: SegmentView[];
  elapsed_ms: number;
  model_digest: string;
  warnings: string[];
}

export interface ModelInfo {
  model_digest: string;
  segment_len_s: number;
  min_segments: number;
  kernel: { kind: string; gamma: number | null };
  feature: { sample_rate_hz: number; n_mfcc: number };
}

export type DiagnoseResult =
  | { kind: "ok"; response: DiagnoseResponse }
  | { kind: "no_cry"; message: string }
  | { kind: "bad_format"; message: string }
  | { kind: "network"; message: string };

/** Base URL for the service; same-origin by default, overridable via a
 * global set before the module loads (window.CRYSCREEN_BASE_URL). */
export function baseUrl(): string {
  const override = (globalThis as Record<string, unknown>)["CRYSCREEN_BASE_URL"];
  return typeof override === "string" ? override.replace(/\/$/, "") : "";
}

export async function fetchModelInfo(): Promise<ModelInfo> {
  const r = await fetch(`${baseUrl()}/v1/model`);
  if (!r.ok) throw new Error(`GET /v1/model failed: ${r.status}`);
  return (await r.json()) as ModelInfo;
}

export async function postDiagnose(wav: ArrayBuffer | Blob): Promise<DiagnoseResult> {
  let r: Response;
  try {
    r = await fetch(`${baseUrl()}/v1/diagnose`, {
      method: "POST",
      headers: { "content-type": "audio/wav" },
      body: wav,
    });
  } catch (e) {
    return { kind: "network", message: e instanceof Error ? e.message : String(e) };
  }
  if (r.status === 200) {
    return { kind: "ok", response: (await r.json()) as DiagnoseResponse };
  }
  const body = await r.json().catch(() => ({ message: r.statusText }));
  const message = typeof body.message === "string" ? body.message : r.statusText;
  if (r.status === 422) return { kind: "no_cry", message };
  if (r.status === 400 || r.status === 413) return { kind: "bad_format", message };
  return { kind: "network", message: `service error ${r.status}` };
}
