/** Microphone capture: collects mono float chunks via the Web Audio API,
 * then encodes to 16-bit PCM WAV at 16 kHz for upload. */
import { TARGET_RATE_HZ, encodeWavPcm16, resampleLinear } from "./wav.js";
export class RecorderError extends Error {
    constructor(kind, message) {
        super(message);
        this.kind = kind;
    }
}
export class Recorder {
    constructor(maxS, callbacks) {
        this.maxS = maxS;
        this.callbacks = callbacks;
        this.chunks = [];
        this.context = null;
        this.stream = null;
        this.processor = null;
        this.sourceRate = TARGET_RATE_HZ;
        this.collected = 0;
    }
    async start() {
        if (!navigator.mediaDevices?.getUserMedia) {
            throw new RecorderError("no_input_device", "This browser cannot record audio.");
        }
        try {
            this.stream = await navigator.mediaDevices.getUserMedia({ audio: true });
        }
        catch (e) {
            const name = e instanceof DOMException ? e.name : "";
            if (name === "NotAllowedError" || name === "SecurityError") {
                throw new RecorderError("permission_denied", "Microphone access was denied. Allow it in the browser and retry.");
            }
            throw new RecorderError("no_input_device", "No usable microphone was found.");
        }
        this.context = new AudioContext();
        this.sourceRate = this.context.sampleRate;
        const source = this.context.createMediaStreamSource(this.stream);
        this.processor = this.context.createScriptProcessor(4096, 1, 1);
        this.processor.onaudioprocess = (ev) => {
            const data = ev.inputBuffer.getChannelData(0);
            this.chunks.push(new Float32Array(data));
            this.collected += data.length;
            const durationS = this.collected / this.sourceRate;
            let sum = 0;
            for (let i = 0; i < data.length; i++)
                sum += data[i] * data[i];
            const level = Math.sqrt(sum / data.length);
            this.callbacks.onTick(durationS, level, this.merged());
            if (durationS >= this.maxS)
                this.callbacks.onAutoStop();
        };
        source.connect(this.processor);
        this.processor.connect(this.context.destination);
    }
    merged() {
        const out = new Float32Array(this.collected);
        let at = 0;
        for (const c of this.chunks) {
            out.set(c, at);
            at += c.length;
        }
        return out;
    }
    async stop() {
        const raw = this.merged();
        this.processor?.disconnect();
        this.stream?.getTracks().forEach((t) => t.stop());
        await this.context?.close();
        this.processor = null;
        this.stream = null;
        this.context = null;
        const samples = resampleLinear(raw, this.sourceRate, TARGET_RATE_HZ);
        return {
            wav: encodeWavPcm16(samples, TARGET_RATE_HZ),
            samples,
            durationS: samples.length / TARGET_RATE_HZ,
        };
    }
}
