"""HTTP service implementing the toolkit wire protocol over bound models.

Every route answers JSON; every failure answers a non-2xx status with an
``{"error": "..."}`` body.  Responses preserve the order and length of the
request lists.  Models are resolved once at startup, so a bad binding fails
the server before it ever listens.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .errors import BindingError
from .models import ROUTES, ModelBinding, build_model

logger = logging.getLogger(__name__)


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def _string_list(payload: dict, key: str) -> list[str]:
    values = payload.get(key)
    if not isinstance(values, list) or not values or not all(isinstance(v, str) for v in values):
        raise ValueError(f"field {key!r} must be a non-empty list of strings")
    return values


def create_app(bindings: list[ModelBinding]) -> FastAPI:
    models: dict[str, object] = {}
    for binding in bindings:
        if binding.route in models:
            raise BindingError(f"duplicate binding for {binding.route}")
        models[binding.route] = build_model(binding)

    app = FastAPI(title="viram-adapter", docs_url=None, redoc_url=None)

    @app.exception_handler(Exception)
    async def on_exception(request: Request, exc: Exception) -> JSONResponse:
        logger.error("%s failed: %s", request.url.path, exc)
        return _error(500, str(exc))

    @app.exception_handler(StarletteHTTPException)
    async def on_http_exception(request: Request, exc: StarletteHTTPException) -> JSONResponse:
        # unknown paths and wrong methods must still answer {"error": ...}
        return _error(exc.status_code, str(exc.detail))

    async def _read_payload(request: Request) -> dict:
        try:
            payload = await request.json()
        except Exception as exc:
            raise ValueError(f"request body is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ValueError("request body must be a JSON object")
        return payload

    def _model(route: str):
        model = models.get(route)
        if model is None:
            raise LookupError(f"no model bound to {route}")
        return model

    @app.get("/health")
    async def health() -> dict:
        return {"status": "ok"}

    @app.post("/translate")
    async def translate(request: Request):
        try:
            model = _model("/translate")
            payload = await _read_payload(request)
            texts = _string_list(payload, "texts")
            for key in ("source_lang", "target_lang"):
                if not isinstance(payload.get(key), str) or not payload[key]:
                    raise ValueError(f"field {key!r} must be a non-empty string")
        except LookupError as exc:
            return _error(404, str(exc))
        except ValueError as exc:
            return _error(400, str(exc))
        try:
            out = model(texts, payload["source_lang"], payload["target_lang"])
        except Exception as exc:
            logger.error("/translate model failure: %s", exc)
            return _error(500, f"translation failed: {exc}")
        return {"translations": list(out)}

    @app.post("/restore")
    async def restore(request: Request):
        try:
            model = _model("/restore")
            texts = _string_list(await _read_payload(request), "texts")
        except LookupError as exc:
            return _error(404, str(exc))
        except ValueError as exc:
            return _error(400, str(exc))
        try:
            out = model(texts)
        except Exception as exc:
            logger.error("/restore model failure: %s", exc)
            return _error(500, f"restoration failed: {exc}")
        return {"texts": list(out)}

    @app.post("/embed")
    async def embed(request: Request):
        try:
            model = _model("/embed")
            texts = _string_list(await _read_payload(request), "texts")
        except LookupError as exc:
            return _error(404, str(exc))
        except ValueError as exc:
            return _error(400, str(exc))
        try:
            vectors = model(texts)
        except Exception as exc:
            logger.error("/embed model failure: %s", exc)
            return _error(500, f"embedding failed: {exc}")
        return {"vectors": [list(v) for v in vectors]}

    @app.post("/score")
    async def score(request: Request):
        try:
            model = _model("/score")
            payload = await _read_payload(request)
            sources = _string_list(payload, "sources")
            hypotheses = _string_list(payload, "hypotheses")
            references = _string_list(payload, "references")
            if not (len(sources) == len(hypotheses) == len(references)):
                raise ValueError(
                    f"sources/hypotheses/references lengths differ: "
                    f"{len(sources)}/{len(hypotheses)}/{len(references)}"
                )
        except LookupError as exc:
            return _error(404, str(exc))
        except ValueError as exc:
            return _error(400, str(exc))
        try:
            scores = model(sources, hypotheses, references)
        except Exception as exc:
            logger.error("/score model failure: %s", exc)
            return _error(500, f"scoring failed: {exc}")
        return {"scores": [float(s) for s in scores]}

    @app.post("/chat")
    async def chat(request: Request):
        try:
            model = _model("/chat")
            payload = await _read_payload(request)
            prompt = payload.get("prompt")
            if not isinstance(prompt, str) or not prompt:
                raise ValueError("field 'prompt' must be a non-empty string")
        except LookupError as exc:
            return _error(404, str(exc))
        except ValueError as exc:
            return _error(400, str(exc))
        try:
            text = model(prompt)
        except Exception as exc:
            logger.error("/chat model failure: %s", exc)
            return _error(500, f"chat completion failed: {exc}")
        return {"text": str(text)}

    return app


def serve(bindings: list[ModelBinding], host: str = "127.0.0.1", port: int = 8000) -> None:
    """Run the adapter until interrupted."""
    import uvicorn

    app = create_app(bindings)
    bound = ", ".join(sorted(r for r in ROUTES if any(b.route == r for b in bindings)))
    logger.info("serving %s on %s:%d", bound or "no routes", host, port)
    uvicorn.run(app, host=host, port=port, log_level="warning")
