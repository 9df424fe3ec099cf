"""Clients for external model services, plus deterministic mock backends.

All five backend roles (translate, restore, embed, score, chat) share one
JSON-over-HTTP wire protocol.  Batch operations split inputs into
``batch_size`` chunks, run up to ``max_parallel`` requests concurrently, and
reassemble results in input order.  Transport failures are retried with
exponential backoff up to ``max_retries`` extra attempts; protocol
violations (bad status, wrong shape, wrong length) are never retried.

Auth tokens are read from the environment variable named by
``auth_token_env`` at call time and are sent only in the Authorization
header — never logged and never embedded in error messages.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import requests

from .errors import BackendUnavailableError, EmptyInputError, ProtocolError

logger = logging.getLogger(__name__)

ENGLISH = "eng_Latn"
MARATHI = "mar_Deva"


def validate_language_tag(tag: str) -> None:
    """Language tags carry a script suffix, e.g. "eng_Latn"."""
    if not tag or "_" not in tag or not all(tag.split("_")):
        raise ValueError(f"language tag needs a script suffix like 'mar_Deva', got {tag!r}")


@dataclass(frozen=True)
class EndpointConfig:
    base_url: str
    timeout: float = 30.0
    max_retries: int = 2
    retry_backoff: float = 0.5
    auth_token_env: str | None = None
    max_parallel: int = 4
    batch_size: int = 16

    def __post_init__(self) -> None:
        if not self.base_url:
            raise ValueError("base_url must be non-empty")
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.retry_backoff < 0:
            raise ValueError("retry_backoff must be >= 0")
        if self.max_parallel < 1 or self.batch_size < 1:
            raise ValueError("max_parallel and batch_size must be >= 1")


def _headers(cfg: EndpointConfig) -> dict[str, str]:
    headers = {"Content-Type": "application/json"}
    if cfg.auth_token_env:
        token = os.environ.get(cfg.auth_token_env)
        if token is None:
            raise ValueError(f"auth environment variable {cfg.auth_token_env!r} is not set")
        headers["Authorization"] = f"Bearer {token}"
    return headers


def _error_message(resp: requests.Response) -> str:
    try:
        payload = resp.json()
        if isinstance(payload, dict) and isinstance(payload.get("error"), str):
            return payload["error"]
    except ValueError:
        pass
    return resp.text[:200]


def _post_json(cfg: EndpointConfig, route: str, payload: dict) -> dict:
    url = cfg.base_url.rstrip("/") + route
    headers = _headers(cfg)
    attempts = cfg.max_retries + 1
    for attempt in range(attempts):
        try:
            resp = requests.post(url, json=payload, headers=headers, timeout=cfg.timeout)
        except requests.RequestException as exc:
            if attempt + 1 < attempts:
                delay = cfg.retry_backoff * (2**attempt)
                logger.debug("POST %s attempt %d/%d failed, retrying in %.2fs", route, attempt + 1, attempts, delay)
                time.sleep(delay)
                continue
            raise BackendUnavailableError(
                f"{route}: transport failure after {attempts} attempt(s): {exc}"
            ) from exc
        if not 200 <= resp.status_code < 300:
            raise ProtocolError(f"{route}: HTTP {resp.status_code}: {_error_message(resp)}")
        try:
            body = resp.json()
        except ValueError as exc:
            raise ProtocolError(f"{route}: response is not valid JSON") from exc
        if not isinstance(body, dict):
            raise ProtocolError(f"{route}: expected a JSON object, got {type(body).__name__}")
        return body
    raise AssertionError("unreachable")  # pragma: no cover


def _chunks(items: list, size: int) -> list[list]:
    return [items[i : i + size] for i in range(0, len(items), size)]


def _run_batches(cfg: EndpointConfig, route: str, jobs: list[tuple[dict, int]], reply_key: str) -> list:
    """POST one request per job and concatenate results in job order."""

    def run_one(job: tuple[dict, int]) -> list:
        payload, expected = job
        reply = _post_json(cfg, route, payload)
        values = reply.get(reply_key)
        if not isinstance(values, list):
            raise ProtocolError(f"{route}: reply missing list field {reply_key!r}")
        if len(values) != expected:
            raise ProtocolError(f"{route}: sent {expected} items but got {len(values)} results")
        return values

    if cfg.max_parallel == 1 or len(jobs) <= 1:
        chunks = [run_one(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=cfg.max_parallel) as pool:
            chunks = list(pool.map(run_one, jobs))
    return [value for chunk in chunks for value in chunk]


def translate_batch(
    cfg: EndpointConfig,
    sources: list[str],
    source_lang: str = ENGLISH,
    target_lang: str = MARATHI,
) -> list[str]:
    if not sources:
        raise ValueError("sources must be non-empty")
    validate_language_tag(source_lang)
    validate_language_tag(target_lang)
    jobs = [
        ({"source_lang": source_lang, "target_lang": target_lang, "texts": chunk}, len(chunk))
        for chunk in _chunks(list(sources), cfg.batch_size)
    ]
    return _run_batches(cfg, "/translate", jobs, "translations")


def restore_via_backend(cfg: EndpointConfig, texts: list[str]) -> list[str]:
    if not texts:
        raise ValueError("texts must be non-empty")
    for i, text in enumerate(texts):
        if not text:
            raise EmptyInputError(f"restoration of empty text is undefined (index {i})")
    jobs = [({"texts": chunk}, len(chunk)) for chunk in _chunks(list(texts), cfg.batch_size)]
    return _run_batches(cfg, "/restore", jobs, "texts")


def embed(cfg: EndpointConfig, texts: list[str]) -> list[list[float]]:
    if not texts:
        raise ValueError("texts must be non-empty")
    jobs = [({"texts": chunk}, len(chunk)) for chunk in _chunks(list(texts), cfg.batch_size)]
    vectors = _run_batches(cfg, "/embed", jobs, "vectors")
    dims = {len(v) if isinstance(v, list) else -1 for v in vectors}
    if len(dims) != 1 or -1 in dims:
        raise ProtocolError(f"/embed: inconsistent vector dimensions {sorted(dims)}")
    return vectors


def score_pairs(
    cfg: EndpointConfig,
    sources: list[str],
    hypotheses: list[str],
    references: list[str],
) -> list[float]:
    if not (len(sources) == len(hypotheses) == len(references)):
        raise ValueError(
            f"score_pairs needs equal lists, got {len(sources)}/{len(hypotheses)}/{len(references)}"
        )
    if not sources:
        raise ValueError("nothing to score: empty lists")
    jobs = []
    for i in range(0, len(sources), cfg.batch_size):
        chunk = slice(i, i + cfg.batch_size)
        payload = {
            "sources": list(sources[chunk]),
            "hypotheses": list(hypotheses[chunk]),
            "references": list(references[chunk]),
        }
        jobs.append((payload, len(payload["sources"])))
    return _run_batches(cfg, "/score", jobs, "scores")


def chat_complete(cfg: EndpointConfig, prompt: str) -> str:
    if not prompt:
        raise ValueError("prompt must be non-empty")
    reply = _post_json(cfg, "/chat", {"prompt": prompt})
    text = reply.get("text")
    if not isinstance(text, str):
        raise ProtocolError("/chat: reply missing string field 'text'")
    return text


def check_health(cfg: EndpointConfig) -> bool:
    url = cfg.base_url.rstrip("/") + "/health"
    try:
        resp = requests.get(url, headers=_headers(cfg), timeout=cfg.timeout)
    except requests.RequestException:
        return False
    if resp.status_code != 200:
        return False
    try:
        return resp.json().get("status") == "ok"
    except ValueError:
        return False


class MockTranslator:
    """Deterministic stand-in for a translation backend.

    ``identity`` mode echoes sources; ``lookup`` mode maps via a recorded
    table and raises KeyError on unmapped sources unless
    ``passthrough_on_miss`` is set.
    """

    def __init__(
        self,
        mode: str = "identity",
        table: dict[str, str] | None = None,
        passthrough_on_miss: bool = False,
    ) -> None:
        if mode not in {"identity", "lookup"}:
            raise ValueError(f"unknown mock mode {mode!r}")
        if mode == "lookup" and table is None:
            raise ValueError("lookup mode requires a table")
        self.mode = mode
        self.table = dict(table) if table else {}
        self.passthrough_on_miss = passthrough_on_miss

    def translate_batch(
        self, sources: list[str], source_lang: str = ENGLISH, target_lang: str = MARATHI
    ) -> list[str]:
        if not sources:
            raise ValueError("sources must be non-empty")
        if self.mode == "identity":
            return list(sources)
        out = []
        for source in sources:
            if source in self.table:
                out.append(self.table[source])
            elif self.passthrough_on_miss:
                out.append(source)
            else:
                raise KeyError(f"no translation recorded for {source!r}")
        return out


@dataclass(frozen=True)
class HttpTranslator:
    config: EndpointConfig

    def translate_batch(
        self, sources: list[str], source_lang: str = ENGLISH, target_lang: str = MARATHI
    ) -> list[str]:
        return translate_batch(self.config, sources, source_lang, target_lang)


@dataclass(frozen=True)
class HttpRestorer:
    config: EndpointConfig

    def restore_batch(self, texts: list[str]) -> list[str]:
        return restore_via_backend(self.config, texts)


@dataclass(frozen=True)
class HttpEmbedder:
    config: EndpointConfig

    def embed(self, texts: list[str]) -> list[list[float]]:
        return embed(self.config, texts)


@dataclass(frozen=True)
class HttpScorer:
    config: EndpointConfig

    def score_pairs(
        self, sources: list[str], hypotheses: list[str], references: list[str]
    ) -> list[float]:
        return score_pairs(self.config, sources, hypotheses, references)


@dataclass(frozen=True)
class HttpChat:
    config: EndpointConfig

    def complete(self, prompt: str) -> str:
        return chat_complete(self.config, prompt)
