"""Model bindings and the built-in stub model registry.

A binding attaches one model to one wire-protocol route.  Model ids that
start with ``stub-`` resolve to deterministic in-process implementations;
``artifact:<dir>`` loads a fine-tuned artifact produced by ``finetune``.
Anything else is treated as a real pretrained checkpoint, which this build
cannot load, and fails with an explicit capability error.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BindingError, CapabilityError

ROUTES = ("/translate", "/restore", "/embed", "/score", "/chat")

ARTIFACT_FILE = "adapter_model.json"
ARTIFACT_FORMAT = "viram-adapter-stub"


@dataclass(frozen=True)
class ModelBinding:
    route: str
    model_id: str
    device: str = "cpu"
    beam_size: int = 1
    max_length: int = 256
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.route not in ROUTES:
            raise BindingError(f"unknown route {self.route!r}, expected one of {list(ROUTES)}")
        if not self.model_id:
            raise BindingError(f"binding for {self.route} has an empty model_id")
        if self.beam_size < 1 or self.max_length < 1:
            raise BindingError(f"{self.route}: beam_size and max_length must be >= 1")


# --------------------------------------------------------------------- stubs


def _identity_translate(texts, source_lang, target_lang):
    return list(texts)


class _LookupTranslate:
    def __init__(self, table: dict, passthrough: bool = True):
        self.table = {str(k): str(v) for k, v in table.items()}
        self.passthrough = passthrough

    def __call__(self, texts, source_lang, target_lang):
        out = []
        for text in texts:
            if text in self.table:
                out.append(self.table[text])
            elif self.passthrough:
                out.append(text)
            else:
                raise KeyError(f"no translation recorded for {text!r}")
        return out


def _identity_restore(texts):
    return list(texts)


def _append_period_restore(texts):
    return [t if t.endswith(".") else t + "." for t in texts]


class _HashEmbed:
    """Deterministic non-zero embedding from the text digest."""

    def __init__(self, dim: int = 8):
        if dim < 1:
            raise BindingError(f"embedding dim must be >= 1, got {dim}")
        self.dim = dim

    def __call__(self, texts):
        vectors = []
        for text in texts:
            digest = hashlib.sha256(text.encode("utf-8")).digest()
            raw = (digest * (self.dim // len(digest) + 1))[: self.dim]
            vectors.append([b / 255.0 * 0.9 + 0.1 for b in raw])
        return vectors


class _ConstantScore:
    def __init__(self, value: float = 0.5):
        if not 0.0 <= value <= 1.0:
            raise BindingError(f"constant score must be in [0, 1], got {value}")
        self.value = value

    def __call__(self, sources, hypotheses, references):
        return [self.value] * len(hypotheses)


def _equality_score(sources, hypotheses, references):
    return [1.0 if h == r else 0.0 for h, r in zip(hypotheses, references)]


def _echo_chat(prompt):
    return prompt


class _TemplateChat:
    def __init__(self, text: str):
        if not text:
            raise BindingError("template chat needs a non-empty 'text' parameter")
        self.text = text

    def __call__(self, prompt):
        return self.text


_STUBS = {
    "/translate": {
        "stub-identity": lambda p: _identity_translate,
        "stub-lookup": lambda p: _LookupTranslate(p.get("table", {}), p.get("passthrough", True)),
    },
    "/restore": {
        "stub-identity": lambda p: _identity_restore,
        "stub-append-period": lambda p: _append_period_restore,
    },
    "/embed": {
        "stub-hash": lambda p: _HashEmbed(int(p.get("dim", 8))),
    },
    "/score": {
        "stub-constant": lambda p: _ConstantScore(float(p.get("value", 0.5))),
        "stub-equality": lambda p: _equality_score,
    },
    "/chat": {
        "stub-echo": lambda p: _echo_chat,
        "stub-template": lambda p: _TemplateChat(p.get("text", "")),
    },
}


def load_artifact(path: str | Path) -> dict:
    p = Path(path) / ARTIFACT_FILE
    try:
        payload = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise BindingError(f"cannot read model artifact {p}: {exc}") from exc
    if payload.get("format") != ARTIFACT_FORMAT:
        raise BindingError(f"{p}: unknown artifact format {payload.get('format')!r}")
    return payload


def build_model(binding: ModelBinding):
    """Resolve a binding to a callable implementation of its route."""
    model_id = binding.model_id
    if model_id.startswith("artifact:"):
        payload = load_artifact(model_id[len("artifact:"):])
        if binding.route != "/translate":
            raise BindingError(f"artifact models only serve /translate, not {binding.route}")
        return _LookupTranslate(payload["table"], passthrough=True)
    stubs = _STUBS[binding.route]
    if model_id in stubs:
        return stubs[model_id](binding.params)
    if model_id.startswith("stub-"):
        raise BindingError(
            f"unknown stub model {model_id!r} for {binding.route}; available: {sorted(stubs)}"
        )
    raise CapabilityError(
        f"model {model_id!r} is a pretrained checkpoint; this build ships stub models only "
        f"and has no inference runtime for it (available: {sorted(stubs)})"
    )
