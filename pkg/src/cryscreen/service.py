"""HTTP inference service.

One process serves one immutable model. Endpoints:

    GET  /v1/health    liveness plus the model digest
    GET  /v1/model     configuration summary
    POST /v1/diagnose  WAV body (audio/wav or multipart field "audio")
                       -> DiagnoseResponse JSON

Statuses: 400 malformed WAV, 413 oversized body (cap 32 MiB), 422 no cry
detected, 500 opaque error id (details only in the server log). Every
request is logged to stderr as: time, method, path, status, elapsed ms.
"""

from __future__ import annotations

import email.parser
import email.policy
import sys
import time
import uuid
from datetime import datetime, timezone

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from . import model_store
from .audio_io import load_wav
from .errors import (
    CryscreenError,
    EmptyAfterTrim,
    EmptyData,
    InputTooShort,
    LengthMismatch,
    MalformedHeader,
    TooShort,
    UnsupportedEncoding,
)
from .pipeline import PipelineConfig, diagnose, diagnosis_to_response
from .svm import SvmModel

MAX_BODY_BYTES = 32 * 1024 * 1024

_DECODE_ERRORS = (MalformedHeader, UnsupportedEncoding, EmptyData, LengthMismatch)
_NO_CRY_ERRORS = (EmptyAfterTrim, TooShort, InputTooShort)


def _wav_from_multipart(content_type: str, body: bytes) -> bytes | None:
    """Pull the `audio` field out of a multipart/form-data body using the
    stdlib MIME machinery (no form-parsing dependency)."""
    prefix = (f"Content-Type: {content_type}\r\nMIME-Version: 1.0\r\n\r\n").encode()
    msg = email.parser.BytesParser(policy=email.policy.HTTP).parsebytes(prefix + body)
    if not msg.is_multipart():
        return None
    for part in msg.iter_parts():
        name = part.get_param("name", header="content-disposition")
        if name == "audio":
            payload = part.get_payload(decode=True)
            return payload if isinstance(payload, bytes) else None
    return None


def create_app(model: SvmModel, cfg: PipelineConfig, digest: str,
               ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="cryscreen", docs_url=None, redoc_url=None)
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["GET", "POST"], allow_headers=["*"])
    short = model_store.short_digest(digest)
    f = cfg.feature_cfg

    @app.middleware("http")
    async def log_request(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        elapsed_ms = int(round((time.perf_counter() - start) * 1000))
        stamp = datetime.now(timezone.utc).isoformat(timespec="milliseconds")
        print(f"{stamp} {request.method} {request.url.path} "
              f"{response.status_code} {elapsed_ms}ms",
              file=sys.stderr, flush=True)
        return response

    @app.get("/v1/health")
    async def health():
        return {"status": "ok", "model_digest": short}

    @app.get("/v1/model")
    async def model_info():
        return {
            "model_digest": short,
            "kernel": {"kind": model.kernel.kind, "gamma": model.kernel.gamma},
            "n_support_vectors": model.n_support_vectors,
            "feature_dim": model.dim,
            "segment_len_s": cfg.segment_len_s,
            "min_segments": cfg.min_segments,
            "pooling": cfg.pooling,
            "feature": {
                "sample_rate_hz": f.sample_rate_hz,
                "frame_len_ms": f.frame_len_ms,
                "hop_len_ms": f.hop_len_ms,
                "pre_emphasis_alpha": f.pre_emphasis_alpha,
                "n_mel_filters": f.n_mel_filters,
                "n_mfcc": f.n_mfcc,
                "fmin_hz": f.fmin_hz,
                "fmax_hz": f.fmax_hz,
                "log_floor": f.log_floor,
                "trim_threshold": f.trim_threshold,
            },
            "training": {
                "C": model.training_meta.C,
                "tolerance": model.training_meta.tolerance,
                "max_passes": model.training_meta.max_passes,
                "seed": model.training_meta.seed,
                "converged": model.training_meta.converged,
            },
        }

    def _diagnose_blocking(wav_bytes: bytes) -> dict:
        buf = load_wav(wav_bytes)
        return diagnosis_to_response(diagnose(buf, model, cfg, model_digest=short))

    @app.post("/v1/diagnose")
    async def diagnose_endpoint(request: Request):
        declared = request.headers.get("content-length")
        if declared is not None and declared.isdigit() and int(declared) > MAX_BODY_BYTES:
            return JSONResponse(status_code=413, content={
                "error": "payload_too_large",
                "message": f"body exceeds {MAX_BODY_BYTES} bytes"})
        body = await request.body()
        if len(body) > MAX_BODY_BYTES:
            return JSONResponse(status_code=413, content={
                "error": "payload_too_large",
                "message": f"body exceeds {MAX_BODY_BYTES} bytes"})

        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            wav_bytes = _wav_from_multipart(content_type, body)
            if wav_bytes is None:
                return JSONResponse(status_code=400, content={
                    "error": "malformed_wav",
                    "message": "multipart body lacks an 'audio' field"})
        else:
            wav_bytes = body
        if not wav_bytes:
            return JSONResponse(status_code=400, content={
                "error": "malformed_wav", "message": "empty request body"})

        try:
            return await run_in_threadpool(_diagnose_blocking, wav_bytes)
        except _DECODE_ERRORS as exc:
            return JSONResponse(status_code=400, content={
                "error": "malformed_wav", "message": str(exc)})
        except _NO_CRY_ERRORS as exc:
            return JSONResponse(status_code=422, content={
                "error": "no_cry_detected", "message": str(exc)})
        except Exception as exc:  # never leak internals
            error_id = uuid.uuid4().hex[:12]
            kind = exc.code if isinstance(exc, CryscreenError) else type(exc).__name__
            print(f"internal error {error_id}: {kind}: {exc}",
                  file=sys.stderr, flush=True)
            return JSONResponse(status_code=500, content={
                "error": "internal_error", "id": error_id})

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app
