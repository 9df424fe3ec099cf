"""Offline fine-tuning entry point.

Real checkpoint training needs GPU hardware this build does not assume, so
non-stub base models fail with a capability error.  The stub trainer
memorizes the variant corpus into a lookup artifact that ``serve`` can load
via a ``model_id = "artifact:<dir>"`` binding, and records the requested
hyperparameters and validation numbers alongside it.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

from .errors import CapabilityError, FinetuneError
from .models import ARTIFACT_FILE, ARTIFACT_FORMAT


def _find_stem(corpus_dir: Path, stem: str | None) -> str:
    if stem is not None:
        return stem
    stems = sorted(p.name[:-4] for p in corpus_dir.glob("*.src"))
    if not stems:
        raise FinetuneError(f"{corpus_dir}: no *.src corpus files found")
    if len(stems) > 1:
        raise FinetuneError(f"{corpus_dir}: multiple corpora found {stems}, pass an explicit stem")
    return stems[0]


def finetune(
    corpus_dir: str | Path,
    base_model_id: str,
    out_dir: str | Path,
    epochs: int = 1,
    learning_rate: float = 5e-4,
    batch_size: int = 16,
    stem: str | None = None,
) -> Path:
    """Train on a <stem>.src/<stem>.tgt variant corpus; return the artifact dir."""
    if epochs < 1:
        raise FinetuneError(f"epochs must be >= 1, got {epochs}")
    if learning_rate <= 0:
        raise FinetuneError(f"learning_rate must be > 0, got {learning_rate}")
    if batch_size < 1:
        raise FinetuneError(f"batch_size must be >= 1, got {batch_size}")
    if not base_model_id.startswith("stub-"):
        raise CapabilityError(
            f"fine-tuning {base_model_id!r} requires a GPU training runtime this build "
            "does not ship; only stub-* base models can be trained here"
        )

    corpus = Path(corpus_dir)
    chosen = _find_stem(corpus, stem)
    src_lines = (corpus / f"{chosen}.src").read_text(encoding="utf-8").splitlines()
    tgt_path = corpus / f"{chosen}.tgt"
    if not tgt_path.exists():
        raise FinetuneError(f"{tgt_path}: missing target side of the corpus")
    tgt_lines = tgt_path.read_text(encoding="utf-8").splitlines()
    if len(src_lines) != len(tgt_lines):
        raise FinetuneError(
            f"{chosen}: misaligned corpus ({len(src_lines)} source vs {len(tgt_lines)} target lines)"
        )
    pairs = [(s, t) for s, t in zip(src_lines, tgt_lines) if s and t]
    if not pairs:
        raise FinetuneError(f"{chosen}: corpus has no usable pairs")

    meta = {}
    meta_path = corpus / f"{chosen}.meta.json"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))

    table = {s: t for s, t in pairs}
    correct = sum(1 for s, t in pairs if table[s] == t)  # last duplicate wins

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    artifact = {
        "format": ARTIFACT_FORMAT,
        "kind": "translate-lookup",
        "base_model": base_model_id,
        "trained_at": datetime.now(timezone.utc).isoformat(),
        "hyperparameters": {
            "epochs": epochs,
            "learning_rate": learning_rate,
            "batch_size": batch_size,
        },
        "corpus": {"stem": chosen, "variant": meta.get("variant"), "pairs": len(pairs)},
        "validation": {"pairs": len(pairs), "train_accuracy": correct / len(pairs)},
        "table": table,
    }
    (out / ARTIFACT_FILE).write_text(
        json.dumps(artifact, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
    return out
