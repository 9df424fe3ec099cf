"""Experiment orchestration: pipelines over a benchmark, records, report tables.

A pipeline turns each benchmark instance into one hypothesis: plain
translation of the written or meant input (Baseline/Oracle/Direct),
restore-then-translate through the native restorer or a /restore backend
(CascadeNative/CascadeBackend), or prompt+parse against a chat backend
(LlmPrompting).  Every evaluated instance yields exactly one RunRecord;
failed instances are excluded from scoring but counted, and a pipeline with
more than 50% failures is marked failed while keeping its partial artifacts.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Union

import toml

from . import __version__
from .backends import EndpointConfig, HttpChat, HttpEmbedder, HttpRestorer, HttpScorer, HttpTranslator
from .corpus import BenchmarkInstance, load_benchmark
from .errors import ReplyParseError, ValidationError
from .metrics import MetricConfig, MetricReport, build_report
from .prompts import Strategy, contains_devanagari, parse_reply, render_prompt, select_and_exclude_shots
from .restorer import RestorerModel, load_model, restore

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_PARSE_FAILED = "parse_failed"
STATUS_BACKEND_FAILED = "backend_failed"


@dataclass
class Baseline:
    label: str
    translator: object


@dataclass
class Oracle:
    label: str
    translator: object


@dataclass
class CascadeNative:
    label: str
    model: RestorerModel
    translator: object


@dataclass
class CascadeBackend:
    label: str
    restorer: object
    translator: object


@dataclass
class Direct:
    label: str
    translator: object


@dataclass
class LlmPrompting:
    label: str
    strategy: Strategy
    chat: object
    shot_ids: tuple[str, ...] = ()


PipelineSpec = Union[Baseline, Oracle, CascadeNative, CascadeBackend, Direct, LlmPrompting]

RECORD_FIELDS = ("instance_id", "input_sent", "restored", "hypothesis", "status", "timing")


@dataclass
class RunRecord:
    instance_id: str
    input_sent: str
    restored: str | None
    hypothesis: str
    status: str
    timing: float

    def to_json(self) -> str:
        return json.dumps({name: getattr(self, name) for name in RECORD_FIELDS}, ensure_ascii=False)


@dataclass
class PipelineResult:
    label: str
    status: str  # ok | failed
    records: list[RunRecord]
    report: MetricReport | None
    failures: int


def _batch_translate(translator, texts: list[str]) -> tuple[list[str] | None, float]:
    """One batched translate call; None signals the whole batch failed."""
    start = time.perf_counter()
    try:
        outs = translator.translate_batch(texts)
    except Exception as exc:
        logger.error("translate backend failed: %s", exc)
        return None, time.perf_counter() - start
    elapsed = time.perf_counter() - start
    if len(outs) != len(texts):
        logger.error("translator returned %d outputs for %d inputs", len(outs), len(texts))
        return None, elapsed
    return outs, elapsed


def _records_from_batch(
    ids: list[str],
    inputs: list[str],
    restored: list[str | None],
    outs: list[str] | None,
    elapsed: float,
) -> list[RunRecord]:
    share = elapsed / len(ids) if ids else 0.0
    records = []
    for i, (iid, sent) in enumerate(zip(ids, inputs)):
        if outs is None or not outs[i]:
            records.append(RunRecord(iid, sent, restored[i], "", STATUS_BACKEND_FAILED, share))
        else:
            records.append(RunRecord(iid, sent, restored[i], outs[i], STATUS_OK, share))
    return records


def _run_translate_only(spec, instances: list[BenchmarkInstance], use_meant: bool) -> list[RunRecord]:
    inputs = [inst.english_meant if use_meant else inst.english_written for inst in instances]
    ids = [inst.id for inst in instances]
    outs, elapsed = _batch_translate(spec.translator, inputs)
    return _records_from_batch(ids, inputs, [None] * len(ids), outs, elapsed)


def _run_cascade_native(spec: CascadeNative, instances: list[BenchmarkInstance]) -> list[RunRecord]:
    inputs = [inst.english_written for inst in instances]
    restored: list[str | None] = []
    restore_times = []
    for sent in inputs:
        start = time.perf_counter()
        try:
            restored.append(restore(spec.model, sent))
        except Exception as exc:
            logger.error("native restoration failed: %s", exc)
            restored.append(None)
        restore_times.append(time.perf_counter() - start)

    live = [i for i, r in enumerate(restored) if r is not None]
    outs_by_index: dict[int, str] = {}
    translate_share = 0.0
    if live:
        outs, elapsed = _batch_translate(spec.translator, [restored[i] for i in live])
        translate_share = elapsed / len(live)
        if outs is not None:
            outs_by_index = dict(zip(live, outs))

    records = []
    for i, inst in enumerate(instances):
        timing = restore_times[i] + (translate_share if restored[i] is not None else 0.0)
        hyp = outs_by_index.get(i, "")
        if restored[i] is None or not hyp:
            records.append(RunRecord(inst.id, inputs[i], restored[i], "", STATUS_BACKEND_FAILED, timing))
        else:
            records.append(RunRecord(inst.id, inputs[i], restored[i], hyp, STATUS_OK, timing))
    return records


def _run_cascade_backend(spec: CascadeBackend, instances: list[BenchmarkInstance]) -> list[RunRecord]:
    inputs = [inst.english_written for inst in instances]
    ids = [inst.id for inst in instances]
    start = time.perf_counter()
    try:
        restored = spec.restorer.restore_batch(inputs)
    except Exception as exc:
        logger.error("restore backend failed: %s", exc)
        share = (time.perf_counter() - start) / len(ids)
        return [
            RunRecord(iid, sent, None, "", STATUS_BACKEND_FAILED, share)
            for iid, sent in zip(ids, inputs)
        ]
    restore_share = (time.perf_counter() - start) / len(ids)
    outs, elapsed = _batch_translate(spec.translator, restored)
    records = _records_from_batch(ids, inputs, list(restored), outs, elapsed)
    for record in records:
        record.timing += restore_share
    return records


def _run_llm(spec: LlmPrompting, benchmark: list[BenchmarkInstance]) -> list[RunRecord]:
    shots, eval_set = select_and_exclude_shots(benchmark, spec.shot_ids)
    if len(shots) != spec.strategy.shot_count:
        raise ValidationError(
            f"strategy {spec.strategy.value!r} needs {spec.strategy.shot_count} shots, got {len(shots)}"
        )
    if not eval_set:
        raise ValidationError("no instances left to evaluate after shot exclusion")
    use_meant = spec.strategy is Strategy.ORACLE_DIRECT
    records = []
    for inst in eval_set:
        sent = inst.english_meant if use_meant else inst.english_written
        start = time.perf_counter()
        try:
            raw = spec.chat.complete(render_prompt(spec.strategy, sent, shots))
        except Exception as exc:
            logger.error("chat backend failed on %s: %s", inst.id, exc)
            records.append(RunRecord(inst.id, sent, None, "", STATUS_BACKEND_FAILED, time.perf_counter() - start))
            continue
        try:
            parsed = parse_reply(spec.strategy, raw)
        except ReplyParseError as exc:
            logger.warning("unparseable reply on %s: %s", inst.id, exc)
            records.append(RunRecord(inst.id, sent, None, "", STATUS_PARSE_FAILED, time.perf_counter() - start))
            continue
        if not contains_devanagari(parsed.marathi):
            logger.warning("reply for %s has no Devanagari in the Marathi slot", inst.id)
        records.append(
            RunRecord(inst.id, sent, parsed.restored_english, parsed.marathi, STATUS_OK, time.perf_counter() - start)
        )
    return records


def run_pipeline(
    spec: PipelineSpec,
    benchmark: list[BenchmarkInstance],
    metric_cfg: MetricConfig | None = None,
    embed_client=None,
    score_client=None,
) -> PipelineResult:
    """Execute one pipeline over the benchmark and score the ok records."""
    if not benchmark:
        raise ValidationError("benchmark is empty")

    if isinstance(spec, (Baseline, Direct)):
        records = _run_translate_only(spec, benchmark, use_meant=False)
    elif isinstance(spec, Oracle):
        records = _run_translate_only(spec, benchmark, use_meant=True)
    elif isinstance(spec, CascadeNative):
        records = _run_cascade_native(spec, benchmark)
    elif isinstance(spec, CascadeBackend):
        records = _run_cascade_backend(spec, benchmark)
    elif isinstance(spec, LlmPrompting):
        records = _run_llm(spec, benchmark)
    else:
        raise ValidationError(f"unknown pipeline spec {type(spec).__name__}")

    refs_by_id = {inst.id: inst.marathi_meant for inst in benchmark}
    ok = [r for r in records if r.status == STATUS_OK]
    failures = len(records) - len(ok)

    report = None
    if ok:
        report = build_report(
            spec.label,
            [r.hypothesis for r in ok],
            [refs_by_id[r.instance_id] for r in ok],
            embed_client=embed_client,
            score_client=score_client,
            sources=[r.input_sent for r in ok] if score_client is not None else None,
            cfg=metric_cfg,
        )

    status = "failed" if failures * 2 > len(records) else "ok"
    if status == "failed":
        logger.error("pipeline %s failed: %d/%d instances unusable", spec.label, failures, len(records))
    return PipelineResult(spec.label, status, records, report, failures)


@dataclass(frozen=True)
class ReportRow:
    """One emitted table row; score fields are None when no report exists."""

    system_name: str
    status: str
    bleu: float | None
    chrf_pp: float | None
    chrf2_pp: float | None
    cosine_embed: float | None
    learned_score: float | None
    n_instances: int | None
    failures: int

    @classmethod
    def from_result(cls, result: PipelineResult) -> "ReportRow":
        rep = result.report
        return cls(
            system_name=result.label,
            status=result.status,
            bleu=rep.bleu if rep else None,
            chrf_pp=rep.chrf_pp if rep else None,
            chrf2_pp=rep.chrf2_pp if rep else None,
            cosine_embed=rep.cosine_embed if rep else None,
            learned_score=rep.learned_score if rep else None,
            n_instances=rep.n_instances if rep else None,
            failures=result.failures,
        )


@dataclass
class ExperimentConfig:
    benchmark_path: Path
    pipelines: list[PipelineSpec]
    output_dir: Path
    metric_cfg: MetricConfig = field(default_factory=MetricConfig)
    embed_client: object | None = None
    score_client: object | None = None
    seed: int = 0

    def validate(self) -> None:
        if not self.pipelines:
            raise ValidationError("experiment has no pipelines")
        labels = [spec.label for spec in self.pipelines]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"pipeline labels are not unique: {labels}")


def _describe_spec(spec: PipelineSpec) -> dict:
    info: dict = {"kind": type(spec).__name__, "label": spec.label}
    if isinstance(spec, LlmPrompting):
        info["strategy"] = spec.strategy.value
        info["shot_ids"] = list(spec.shot_ids)
    return info


def _config_hash(cfg: ExperimentConfig) -> str:
    payload = {
        "benchmark": str(cfg.benchmark_path),
        "pipelines": [_describe_spec(s) for s in cfg.pipelines],
        "metrics": asdict(cfg.metric_cfg),
        "seed": cfg.seed,
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()


def run_experiment(cfg: ExperimentConfig) -> list[ReportRow]:
    """Run every pipeline, persist records and reports, return the table.

    Per-pipeline records land in ``output_dir/<label>/records.jsonl``; the
    table in ``report.json``; a ``manifest.json`` records the config hash,
    toolkit version and timestamps.  A pipeline that blows up entirely is
    recorded as a failed row and the remaining pipelines still run.
    """
    cfg.validate()
    benchmark = load_benchmark(cfg.benchmark_path)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()

    rows: list[ReportRow] = []
    for spec in cfg.pipelines:
        try:
            result = run_pipeline(
                spec,
                benchmark,
                metric_cfg=cfg.metric_cfg,
                embed_client=cfg.embed_client,
                score_client=cfg.score_client,
            )
        except Exception as exc:
            logger.error("pipeline %s aborted: %s", spec.label, exc)
            rows.append(ReportRow(spec.label, "failed", None, None, None, None, None, None, len(benchmark)))
            continue
        pipeline_dir = out / spec.label
        pipeline_dir.mkdir(parents=True, exist_ok=True)
        (pipeline_dir / "records.jsonl").write_text(
            "".join(r.to_json() + "\n" for r in result.records), encoding="utf-8"
        )
        rows.append(ReportRow.from_result(result))

    emit_report(rows, "json", out / "report.json")
    manifest = {
        "config_hash": _config_hash(cfg),
        "version": __version__,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
        "benchmark_instances": len(benchmark),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return rows


_COLUMNS = ("System", "BLEU", "chrF++", "chrF2++", "Cosine", "Learned", "N", "Failures")


def _fmt(value, decimals: int) -> str:
    return "-" if value is None else f"{value:.{decimals}f}"


def _row_cells(row: ReportRow) -> list[str]:
    name = row.system_name if row.status == "ok" else f"{row.system_name} [failed]"
    return [
        name,
        _fmt(row.bleu, 2),
        _fmt(row.chrf_pp, 2),
        _fmt(row.chrf2_pp, 2),
        _fmt(row.cosine_embed, 4),
        _fmt(row.learned_score, 4),
        "-" if row.n_instances is None else str(row.n_instances),
        str(row.failures),
    ]


def render_markdown(table: list[ReportRow]) -> str:
    lines = [
        "| " + " | ".join(_COLUMNS) + " |",
        "|:---|" + "---:|" * (len(_COLUMNS) - 1),
    ]
    lines += ["| " + " | ".join(_row_cells(row)) + " |" for row in table]
    return "\n".join(lines) + "\n"


def emit_report(table: list[ReportRow], format: str, path: str | Path) -> Path:
    """Write the report table as markdown, csv, or json."""
    if not table:
        raise ValidationError("cannot emit an empty report table")
    p = Path(path)
    if format == "markdown":
        p.write_text(render_markdown(table), encoding="utf-8")
    elif format == "csv":
        lines = [",".join(_COLUMNS + ("Status",))]
        for row in table:
            cells = _row_cells(row)
            cells[0] = row.system_name  # status carried in its own column
            lines.append(",".join(("" if c == "-" else c) for c in cells) + f",{row.status}")
        p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    elif format == "json":
        payload = {"rows": [asdict(row) for row in table]}
        p.write_text(json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    else:
        raise ValueError(f"unknown report format {format!r}")
    return p


def load_report_table(path: str | Path) -> list[ReportRow]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return [ReportRow(**row) for row in payload["rows"]]


_PIPELINE_KINDS = {"baseline", "oracle", "cascade_native", "cascade_backend", "direct", "llm"}


def _endpoint_from_table(table: dict, where: str) -> EndpointConfig:
    allowed = set(EndpointConfig.__dataclass_fields__)
    unknown = set(table) - allowed
    if unknown:
        raise ValidationError(f"{where}: unknown endpoint keys {sorted(unknown)}")
    try:
        return EndpointConfig(**table)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _spec_from_table(entry: dict, base_dir: Path, index: int) -> PipelineSpec:
    where = f"pipeline[{index}]"
    kind = entry.get("kind")
    label = entry.get("label")
    if kind not in _PIPELINE_KINDS:
        raise ValidationError(f"{where}: kind must be one of {sorted(_PIPELINE_KINDS)}, got {kind!r}")
    if not label:
        raise ValidationError(f"{where}: missing label")

    def translator():
        if "translate" not in entry:
            raise ValidationError(f"{where}: missing [pipeline.translate] endpoint")
        return HttpTranslator(_endpoint_from_table(entry["translate"], f"{where}.translate"))

    if kind == "baseline":
        return Baseline(label, translator())
    if kind == "oracle":
        return Oracle(label, translator())
    if kind == "direct":
        return Direct(label, translator())
    if kind == "cascade_native":
        model_path = entry.get("model")
        if not model_path:
            raise ValidationError(f"{where}: cascade_native needs a model path")
        model = load_model(base_dir / model_path)
        return CascadeNative(label, model, translator())
    if kind == "cascade_backend":
        if "restore" not in entry:
            raise ValidationError(f"{where}: cascade_backend needs a [pipeline.restore] endpoint")
        restorer = HttpRestorer(_endpoint_from_table(entry["restore"], f"{where}.restore"))
        return CascadeBackend(label, restorer, translator())
    # llm
    try:
        strategy = Strategy(entry.get("strategy", ""))
    except ValueError:
        valid = [s.value for s in Strategy]
        raise ValidationError(f"{where}: strategy must be one of {valid}, got {entry.get('strategy')!r}")
    if "chat" not in entry:
        raise ValidationError(f"{where}: llm pipeline needs a [pipeline.chat] endpoint")
    chat = HttpChat(_endpoint_from_table(entry["chat"], f"{where}.chat"))
    shot_ids = tuple(entry.get("shot_ids", ()))
    return LlmPrompting(label, strategy, chat, shot_ids)


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """Parse a declarative experiment file into a runnable config.

    Paths inside the file resolve relative to the file's directory.
    """
    p = Path(path)
    data = toml.loads(p.read_text(encoding="utf-8"))
    base_dir = p.parent
    for key in ("benchmark", "output_dir"):
        if key not in data:
            raise ValidationError(f"{p}: missing required key {key!r}")

    metric_cfg = MetricConfig(**data.get("metrics", {}))
    endpoints = data.get("endpoints", {})
    embed_client = (
        HttpEmbedder(_endpoint_from_table(endpoints["embed"], "endpoints.embed"))
        if "embed" in endpoints
        else None
    )
    score_client = (
        HttpScorer(_endpoint_from_table(endpoints["scorer"], "endpoints.scorer"))
        if "scorer" in endpoints
        else None
    )
    pipelines = [
        _spec_from_table(entry, base_dir, i) for i, entry in enumerate(data.get("pipeline", []))
    ]
    cfg = ExperimentConfig(
        benchmark_path=base_dir / data["benchmark"],
        pipelines=pipelines,
        output_dir=base_dir / data["output_dir"],
        metric_cfg=metric_cfg,
        embed_client=embed_client,
        score_client=score_client,
        seed=int(data.get("seed", 0)),
    )
    cfg.validate()
    return cfg
