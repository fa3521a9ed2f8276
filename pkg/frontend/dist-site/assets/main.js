/** DOM wiring: one screen, one state machine, no framework. */
import { fetchModelInfo, postDiagnose } from "./api.js";
import { Recorder, RecorderError } from "./recorder.js";
import { noCryView, resultView } from "./render.js";
import { initialState, canSubmit, transition } from "./state.js";
import { waveformPreview } from "./wav.js";
const MAX_RECORD_S = 60;
const PREVIEW_BUCKETS = 120;
let state = initialState();
let recorder = null;
let capturedWav = null;
const el = (id) => document.getElementById(id);
function dispatch(event) {
    state = transition(state, event);
    paint();
}
function paint() {
    for (const phase of ["idle", "recording", "ready", "submitting", "result", "error"]) {
        el(`panel-${phase}`).hidden = state.phase !== phase;
    }
    el("duration").textContent = `${state.durationS.toFixed(1)} s`;
    el("btn-submit").disabled = !canSubmit(state);
    el("min-duration-note").textContent =
        state.durationS < state.minDurationS && state.phase === "ready"
            ? `Recording is shorter than ${state.minDurationS.toFixed(1)} s — too short to diagnose.`
            : "";
    drawPreview();
    if (state.phase === "result" && state.response) {
        const view = resultView(state.response);
        const verdictEl = el("verdict");
        verdictEl.textContent = view.headline;
        verdictEl.className = `verdict ${view.colorClass}`;
        el("verdict-word").textContent = view.verdictText;
        el("confidence").textContent = view.confidencePct;
        el("segment-summary").textContent = view.segmentSummary;
        el("elapsed").textContent = view.elapsedText;
        el("model-digest").textContent = view.modelDigest;
        el("warnings").textContent = view.warnings.join("; ");
        const strip = el("timeline");
        strip.innerHTML = "";
        for (const block of view.blocks) {
            const b = document.createElement("span");
            b.className = `block block-${block.color}`;
            b.title = block.title;
            strip.appendChild(b);
        }
    }
    if (state.phase === "error") {
        if (state.errorKind === "no_cry") {
            const view = noCryView();
            el("error-headline").textContent = view.headline;
            el("error-detail").textContent = view.advice;
            el("panel-error").className = "panel verdict-nocry";
        }
        else {
            el("error-headline").textContent = errorHeadline();
            el("error-detail").textContent = state.errorMessage;
            el("panel-error").className = "panel verdict-error";
        }
    }
}
function errorHeadline() {
    switch (state.errorKind) {
        case "permission_denied": return "Microphone permission needed";
        case "no_input_device": return "No microphone found";
        case "bad_format": return "That file is not a WAV recording";
        case "network": return "Could not reach the service";
        default: return "Something went wrong";
    }
}
function drawPreview() {
    const canvas = el("preview");
    const ctx = canvas.getContext("2d");
    if (!ctx)
        return;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const bars = state.waveformPreview;
    if (!bars.length)
        return;
    const w = canvas.width / bars.length;
    ctx.fillStyle = "#2b6cb0";
    bars.forEach((amp, i) => {
        const h = Math.max(1, amp * canvas.height);
        ctx.fillRect(i * w, (canvas.height - h) / 2, Math.max(1, w - 1), h);
    });
}
async function startRecording() {
    dispatch({ type: "RECORD_START" });
    recorder = new Recorder(MAX_RECORD_S, {
        onTick: (durationS, level, samples) => {
            el("level").style.width = `${Math.min(100, level * 300)}%`;
            dispatch({
                type: "RECORD_TICK",
                durationS,
                preview: waveformPreview(samples, PREVIEW_BUCKETS),
            });
        },
        onAutoStop: () => void stopRecording(),
    });
    try {
        await recorder.start();
    }
    catch (e) {
        if (e instanceof RecorderError) {
            dispatch({ type: "RECORD_FAILED", kind: e.kind, message: e.message });
        }
        else {
            dispatch({ type: "RECORD_FAILED", kind: "no_input_device", message: String(e) });
        }
    }
}
async function stopRecording() {
    if (!recorder || state.phase !== "recording")
        return;
    const capture = await recorder.stop();
    recorder = null;
    capturedWav = capture.wav;
    dispatch({
        type: "RECORD_TICK",
        durationS: capture.durationS,
        preview: waveformPreview(capture.samples, PREVIEW_BUCKETS),
    });
    dispatch({ type: "RECORD_STOP" });
}
async function onFileChosen(file) {
    capturedWav = await file.arrayBuffer();
    // duration per the WAV header the service will see: bytes/2 at 16 kHz is
    // only right for our own recordings, so approximate from byte length and
    // let the service be the judge of short uploads
    const approxS = Math.max(0, (capturedWav.byteLength - 44) / 2 / 16000);
    const pcm = new Float32Array(Math.floor((capturedWav.byteLength - 44) / 2));
    const view = new DataView(capturedWav);
    for (let i = 0; i < pcm.length; i++) {
        pcm[i] = view.getInt16(44 + i * 2, true) / 32768;
    }
    dispatch({
        type: "FILE_CHOSEN",
        durationS: approxS,
        preview: waveformPreview(pcm, PREVIEW_BUCKETS),
    });
}
async function submit() {
    if (!capturedWav)
        return;
    dispatch({ type: "SUBMIT" });
    const result = await postDiagnose(capturedWav);
    switch (result.kind) {
        case "ok":
            dispatch({ type: "RESPONSE_OK", response: result.response });
            break;
        case "no_cry":
            dispatch({ type: "RESPONSE_NO_CRY", message: result.message });
            break;
        case "bad_format":
            dispatch({ type: "RESPONSE_BAD_FORMAT", message: result.message });
            break;
        case "network":
            dispatch({ type: "RESPONSE_NETWORK", message: result.message });
            break;
    }
}
function wire() {
    el("btn-record").onclick = () => void startRecording();
    el("btn-record-again").onclick = () => void startRecording();
    el("btn-record-after-error").onclick = () => {
        dispatch({ type: "RETRY" });
        if (state.phase === "idle")
            void startRecording();
    };
    el("btn-stop").onclick = () => void stopRecording();
    el("btn-submit").onclick = () => void submit();
    el("btn-reset").onclick = () => dispatch({ type: "RESET" });
    el("file-input").onchange = (ev) => {
        const file = ev.target.files?.[0];
        if (file)
            void onFileChosen(file);
    };
    fetchModelInfo()
        .then((info) => {
        dispatch({ type: "MODEL_INFO", minDurationS: info.segment_len_s });
        el("model-note").textContent =
            `model ${info.model_digest} · segments of ${info.segment_len_s.toFixed(1)} s`;
    })
        .catch(() => {
        el("model-note").textContent = "service unreachable — check the server";
    });
    paint();
}
document.addEventListener("DOMContentLoaded", wire);
