/** Client-side WAV encoding. The service parses exactly one container
 * format, so the browser always uploads 16-bit PCM mono at 16 kHz. */
export const TARGET_RATE_HZ = 16000;
/** Linear resampler mirroring the service's canonicalization. */
export function resampleLinear(samples, fromRate, toRate) {
    if (fromRate === toRate || samples.length === 0)
        return samples;
    const outLen = Math.floor((samples.length * toRate) / fromRate);
    const out = new Float32Array(outLen);
    const step = fromRate / toRate;
    for (let i = 0; i < outLen; i++) {
        const pos = i * step;
        const left = Math.floor(pos);
        const right = Math.min(left + 1, samples.length - 1);
        const frac = pos - left;
        out[i] = samples[left] * (1 - frac) + samples[right] * frac;
    }
    return out;
}
/** Encode mono float samples in [-1, 1] as a 16-bit PCM RIFF/WAVE buffer. */
export function encodeWavPcm16(samples, sampleRate) {
    const dataBytes = samples.length * 2;
    const buffer = new ArrayBuffer(44 + dataBytes);
    const view = new DataView(buffer);
    const writeTag = (offset, tag) => {
        for (let i = 0; i < 4; i++)
            view.setUint8(offset + i, tag.charCodeAt(i));
    };
    writeTag(0, "RIFF");
    view.setUint32(4, 36 + dataBytes, true);
    writeTag(8, "WAVE");
    writeTag(12, "fmt ");
    view.setUint32(16, 16, true); // fmt chunk size
    view.setUint16(20, 1, true); // integer PCM
    view.setUint16(22, 1, true); // mono
    view.setUint32(24, sampleRate, true);
    view.setUint32(28, sampleRate * 2, true);
    view.setUint16(32, 2, true); // block align
    view.setUint16(34, 16, true); // bits per sample
    writeTag(36, "data");
    view.setUint32(40, dataBytes, true);
    let offset = 44;
    for (let i = 0; i < samples.length; i++) {
        const clamped = Math.max(-32768, Math.min(32767, Math.round(samples[i] * 32768)));
        view.setInt16(offset, clamped, true);
        offset += 2;
    }
    return buffer;
}
/** Downsample amplitudes to a fixed-length preview for the waveform strip. */
export function waveformPreview(samples, buckets) {
    if (samples.length === 0)
        return [];
    const out = new Array(buckets).fill(0);
    const per = Math.max(1, Math.floor(samples.length / buckets));
    for (let b = 0; b < buckets; b++) {
        let peak = 0;
        const start = b * per;
        for (let i = start; i < Math.min(start + per, samples.length); i++) {
            peak = Math.max(peak, Math.abs(samples[i]));
        }
        out[b] = peak;
    }
    return out;
}
