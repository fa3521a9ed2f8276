import { describe, expect, it } from "vitest";
import { encodeWavPcm16, resampleLinear, waveformPreview } from "../src/wav.js";

function tag(view: DataView, offset: number): string {
  return String.fromCharCode(
    view.getUint8(offset), view.getUint8(offset + 1),
    view.getUint8(offset + 2), view.getUint8(offset + 3));
}

describe("encodeWavPcm16", () => {
  it("writes a canonical 44-byte RIFF header", () => {
    const buf = encodeWavPcm16(new Float32Array([0, 0.5, -0.5]), 16000);
    const view = new DataView(buf);
    expect(buf.byteLength).toBe(44 + 6);
    expect(tag(view, 0)).toBe("RIFF");
    expect(view.getUint32(4, true)).toBe(36 + 6);
    expect(tag(view, 8)).toBe("WAVE");
    expect(tag(view, 12)).toBe("fmt ");
    expect(view.getUint16(20, true)).toBe(1);      // integer PCM
    expect(view.getUint16(22, true)).toBe(1);      // mono
    expect(view.getUint32(24, true)).toBe(16000);
    expect(view.getUint32(28, true)).toBe(32000);  // byte rate
    expect(view.getUint16(34, true)).toBe(16);     // bits
    expect(tag(view, 36)).toBe("data");
    expect(view.getUint32(40, true)).toBe(6);
  });

  it("scales samples by 32768 with clamping", () => {
    const buf = encodeWavPcm16(new Float32Array([0.5, -1.0, 1.0]), 16000);
    const view = new DataView(buf);
    expect(view.getInt16(44, true)).toBe(16384);
    expect(view.getInt16(46, true)).toBe(-32768);
    expect(view.getInt16(48, true)).toBe(32767);   // +1.0 clamps
  });

  it("round-trips through its own decode", () => {
    const src = new Float32Array(200);
    for (let i = 0; i < src.length; i++) src[i] = Math.sin(i / 7) * 0.8;
    const view = new DataView(encodeWavPcm16(src, 16000));
    for (let i = 0; i < src.length; i++) {
      const back = view.getInt16(44 + 2 * i, true) / 32768;
      expect(Math.abs(back - src[i])).toBeLessThanOrEqual(1 / 32768);
    }
  });
});

describe("resampleLinear", () => {
  it("is identity at equal rates", () => {
    const x = new Float32Array([0.1, 0.2, 0.3]);
    expect(resampleLinear(x, 16000, 16000)).toBe(x);
  });

  it("preserves a constant signal", () => {
    const x = new Float32Array(50).fill(0.7);
    const out = resampleLinear(x, 48000, 16000);
    expect(out.length).toBe(Math.floor((50 * 16000) / 48000));
    for (const v of out) expect(v).toBeCloseTo(0.7, 6);
  });

  it("computes the length as floor(n * to / from)", () => {
    const out = resampleLinear(new Float32Array(441), 44100, 16000);
    expect(out.length).toBe(Math.floor((441 * 16000) / 44100));
  });

  it("stays within input bounds", () => {
    const x = new Float32Array(100);
    for (let i = 0; i < 100; i++) x[i] = Math.sin(i / 3);
    const out = resampleLinear(x, 8000, 16000);
    let lo = Infinity, hi = -Infinity;
    for (const v of x) { lo = Math.min(lo, v); hi = Math.max(hi, v); }
    for (const v of out) {
      expect(v).toBeGreaterThanOrEqual(lo - 1e-7);
      expect(v).toBeLessThanOrEqual(hi + 1e-7);
    }
  });
});

describe("waveformPreview", () => {
  it("returns the requested number of buckets", () => {
    const x = new Float32Array(4800).fill(0.25);
    expect(waveformPreview(x, 120)).toHaveLength(120);
  });

  it("tracks peak amplitude per bucket", () => {
    const x = new Float32Array(100);
    x[75] = -0.9;
    const bars = waveformPreview(x, 4);
    expect(bars[3]).toBeCloseTo(0.9, 6);
    expect(bars[0]).toBe(0);
  });

  it("handles empty input", () => {
    expect(waveformPreview(new Float32Array(0), 10)).toEqual([]);
  });
});
