/** Capture lifecycle as a pure state machine so the flow is testable
 * without a browser. Phases: idle -> recording -> ready -> submitting ->
 * (result | error); error and result are escapable (retry / start over). */
export function initialState() {
    return {
        phase: "idle",
        durationS: 0,
        waveformPreview: [],
        response: null,
        errorKind: null,
        errorMessage: "",
        minDurationS: 1.0,
    };
}
export function canSubmit(state) {
    return state.phase === "ready" && state.durationS >= state.minDurationS;
}
export class IllegalTransition extends Error {
    constructor(phase, event) {
        super(`event ${event} not allowed in phase ${phase}`);
    }
}
export function transition(state, event) {
    switch (event.type) {
        case "MODEL_INFO":
            return { ...state, minDurationS: event.minDurationS };
        case "RECORD_START":
            if (state.phase !== "idle" && state.phase !== "ready"
                && state.phase !== "result" && state.phase !== "error") {
                throw new IllegalTransition(state.phase, event.type);
            }
            return {
                ...state, phase: "recording", durationS: 0, waveformPreview: [],
                response: null, errorKind: null, errorMessage: "",
            };
        case "RECORD_TICK": {
            if (state.phase !== "recording")
                throw new IllegalTransition(state.phase, event.type);
            // duration is monotone while recording
            const durationS = Math.max(state.durationS, event.durationS);
            return { ...state, durationS, waveformPreview: event.preview };
        }
        case "RECORD_STOP":
            if (state.phase !== "recording")
                throw new IllegalTransition(state.phase, event.type);
            return { ...state, phase: "ready" };
        case "RECORD_FAILED":
            return {
                ...state, phase: "error", errorKind: event.kind,
                errorMessage: event.message,
            };
        case "FILE_CHOSEN":
            if (state.phase === "recording" || state.phase === "submitting") {
                throw new IllegalTransition(state.phase, event.type);
            }
            return {
                ...state, phase: "ready", durationS: event.durationS,
                waveformPreview: event.preview, response: null,
                errorKind: null, errorMessage: "",
            };
        case "SUBMIT":
            if (!canSubmit(state))
                throw new IllegalTransition(state.phase, event.type);
            return { ...state, phase: "submitting" };
        case "RESPONSE_OK":
            if (state.phase !== "submitting")
                throw new IllegalTransition(state.phase, event.type);
            return { ...state, phase: "result", response: event.response };
        case "RESPONSE_NO_CRY":
            if (state.phase !== "submitting")
                throw new IllegalTransition(state.phase, event.type);
            return { ...state, phase: "error", errorKind: "no_cry", errorMessage: event.message };
        case "RESPONSE_BAD_FORMAT":
            if (state.phase !== "submitting")
                throw new IllegalTransition(state.phase, event.type);
            return { ...state, phase: "error", errorKind: "bad_format", errorMessage: event.message };
        case "RESPONSE_NETWORK":
            if (state.phase !== "submitting")
                throw new IllegalTransition(state.phase, event.type);
            return { ...state, phase: "error", errorKind: "network", errorMessage: event.message };
        case "RETRY":
            if (state.phase !== "error")
                throw new IllegalTransition(state.phase, event.type);
            // a retriable network failure keeps the captured audio
            return { ...state, phase: state.errorKind === "network" ? "ready" : "idle" };
        case "RESET":
            return { ...initialState(), minDurationS: state.minDurationS };
    }
}
