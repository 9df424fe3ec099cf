"""Adapter configuration: a TOML file mapping routes to model bindings.

Example::

    host = "127.0.0.1"
    port = 8787

    [bindings.translate]
    model_id = "stub-identity"

    [bindings.embed]
    model_id = "stub-hash"
    dim = 8
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import toml

from .errors import BindingError
from .models import ROUTES, ModelBinding

_BINDING_FIELDS = {"model_id", "device", "beam_size", "max_length"}


@dataclass(frozen=True)
class AdapterConfig:
    host: str
    port: int
    bindings: tuple[ModelBinding, ...]


def load_adapter_config(path: str | Path) -> AdapterConfig:
    p = Path(path)
    data = toml.loads(p.read_text(encoding="utf-8"))
    tables = data.get("bindings")
    if not isinstance(tables, dict) or not tables:
        raise BindingError(f"{p}: missing [bindings.<route>] tables")

    valid_names = {route.lstrip("/") for route in ROUTES}
    bindings = []
    for name, table in tables.items():
        if name not in valid_names:
            raise BindingError(f"{p}: unknown route {name!r}, expected one of {sorted(valid_names)}")
        if not isinstance(table, dict) or "model_id" not in table:
            raise BindingError(f"{p}: binding {name!r} needs a model_id")
        known = {k: v for k, v in table.items() if k in _BINDING_FIELDS}
        params = {k: v for k, v in table.items() if k not in _BINDING_FIELDS}
        bindings.append(ModelBinding(route=f"/{name}", params=params, **known))

    port = int(data.get("port", 8000))
    if not 0 <= port <= 65535:
        raise BindingError(f"{p}: port {port} out of range")
    return AdapterConfig(host=str(data.get("host", "127.0.0.1")), port=port, bindings=tuple(bindings))
