"""Command-line interface.

Groups mirror the library layout: ``corpus`` for variant building and
counts, ``restore`` for training/applying/evaluating the punctuation
restorer, ``metrics`` for scoring hypothesis files, ``prompts`` for
rendering chat prompts, and ``bench`` for running declarative experiments.
"""

from __future__ import annotations

import functools
import json
import logging
from pathlib import Path

import click

from . import __version__
from .backends import EndpointConfig, HttpEmbedder, HttpScorer
from .corpus import (
    VariantKind,
    corpus_stats,
    load_benchmark,
    load_packaged_fixture,
    load_parallel_corpus,
    make_variant,
    save_parallel_corpus,
)
from .errors import ViramkitError
from .metrics import build_report
from .prompts import Strategy, ShotExample, render_prompt, select_and_exclude_shots
from .restorer import (
    apply_labels,
    evaluate_restorer,
    load_labeled_corpus,
    load_model,
    predict,
    restore,
    save_model,
    train,
)
from .runner import emit_report, load_experiment_config, load_report_table, render_markdown, run_experiment


def _friendly(fn):
    """Turn library errors into clean CLI failures instead of tracebacks."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ViramkitError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


@click.group()
@click.version_option(__version__, prog_name="viramkit")
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)


# --------------------------------------------------------------------------- corpus


@main.group()
def corpus() -> None:
    """Parallel-corpus variants and benchmark statistics."""


@corpus.command("make-variants")
@click.option(
    "--in",
    "in_paths",
    nargs=2,
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    metavar="SRC TGT",
    help="Aligned source and target files, one sentence per line.",
)
@click.option("--name", default=None, help="Corpus name (default: source file stem).")
@click.option(
    "--kind",
    "kinds",
    multiple=True,
    type=click.Choice([k.value for k in VariantKind]),
    help="Variant to build; repeatable. Default: all four.",
)
@click.option(
    "--out",
    "out_dir",
    required=True,
    type=click.Path(file_okay=False, path_type=Path),
    help="Directory for the variant files.",
)
@_friendly
def corpus_make_variants(in_paths, name, kinds, out_dir) -> None:
    """Build punctuation variants of an aligned corpus."""
    src, tgt = in_paths
    base = load_parallel_corpus(src, tgt, name=name or src.stem)
    out_dir.mkdir(parents=True, exist_ok=True)
    wanted = [VariantKind(k) for k in kinds] if kinds else list(VariantKind)
    for kind in wanted:
        variant = make_variant(base, kind)
        meta_path = save_parallel_corpus(variant, out_dir)
        click.echo(f"{kind.value}: {len(variant.pairs)} pairs -> {meta_path.name[: -len('.meta.json')]}")


@corpus.command("stats")
@click.option(
    "--benchmark",
    "benchmark_path",
    required=True,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
)
@_friendly
def corpus_stats_cmd(benchmark_path) -> None:
    """Count benchmark instances per punctuation type."""
    instances = load_benchmark(benchmark_path)
    for name, count in corpus_stats(instances).items():
        click.echo(f"{name}\t{count}")
    click.echo(f"total\t{len(instances)}")


# --------------------------------------------------------------------------- restore


@main.group(name="restore")
def restore_group() -> None:
    """Train, apply and evaluate the punctuation restorer."""


@restore_group.command("train")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--epochs", default=5, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@_friendly
def restore_train(corpus_path, epochs, seed, out_path) -> None:
    """Train a restorer on a punctuated corpus (one sentence per line)."""
    sentences = load_labeled_corpus(corpus_path)
    model = train(sentences, epochs=epochs, seed=seed)
    save_model(model, out_path)
    click.echo(f"trained on {len(sentences)} sentences ({epochs} epochs, seed {seed}) -> {out_path}")


@restore_group.command("apply")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@_friendly
def restore_apply(model_path, in_path, out_path) -> None:
    """Restore punctuation in a raw text file, one sentence per line."""
    model = load_model(model_path)
    lines = in_path.read_text(encoding="utf-8").splitlines()
    restored = [restore(model, line) if line.strip() else "" for line in lines]
    out_path.write_text("\n".join(restored) + "\n", encoding="utf-8")
    click.echo(f"restored {sum(1 for l in lines if l.strip())} sentences -> {out_path}")


@restore_group.command("eval")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@_friendly
def restore_eval(model_path, gold_path) -> None:
    """Score a model against a punctuated gold corpus."""
    model = load_model(model_path)
    gold = load_labeled_corpus(gold_path, label_set=model.label_set)
    result = evaluate_restorer(model, gold)
    click.echo(f"{'label':<12}{'prec':>8}{'rec':>8}{'f1':>8}{'tp':>6}{'fp':>6}{'fn':>6}")
    for cls in result.per_class.values():
        prec = f"{cls.precision:.3f}" if cls.precision_defined else "n/a"
        click.echo(f"{cls.label:<12}{prec:>8}{cls.recall:>8.3f}{cls.f1:>8.3f}{cls.tp:>6}{cls.fp:>6}{cls.fn:>6}")
    click.echo(f"macro F1: {result.macro_f1:.4f}")
    click.echo(
        f"micro precision/recall/F1: {result.micro_precision:.4f} / "
        f"{result.micro_recall:.4f} / {result.micro_f1:.4f}"
    )


# --------------------------------------------------------------------------- metrics


@main.group()
def metrics() -> None:
    """Corpus-level scoring of hypothesis files."""


@metrics.command("score")
@click.option("--hyp", "hyp_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--ref", "ref_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--src", "src_path", default=None, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--embed-url", default=None, help="Embedding endpoint for the cosine column.")
@click.option("--score-url", default=None, help="Learned-scorer endpoint (requires --src).")
@click.option("--system-name", default="system", show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False, path_type=Path))
@_friendly
def metrics_score(hyp_path, ref_path, src_path, embed_url, score_url, system_name, out_path) -> None:
    """Score line-aligned hypothesis and reference files."""
    hyps = hyp_path.read_text(encoding="utf-8").splitlines()
    refs = ref_path.read_text(encoding="utf-8").splitlines()
    if len(hyps) != len(refs):
        raise click.ClickException(f"line counts differ: {len(hyps)} hypotheses vs {len(refs)} references")
    sources = None
    if src_path is not None:
        sources = src_path.read_text(encoding="utf-8").splitlines()
        if len(sources) != len(hyps):
            raise click.ClickException(f"line counts differ: {len(sources)} sources vs {len(hyps)} hypotheses")
    if score_url and sources is None:
        raise click.ClickException("--score-url requires --src")
    embed_client = HttpEmbedder(EndpointConfig(base_url=embed_url)) if embed_url else None
    score_client = HttpScorer(EndpointConfig(base_url=score_url)) if score_url else None
    report = build_report(
        system_name,
        hyps,
        refs,
        embed_client=embed_client,
        score_client=score_client,
        sources=sources if score_client else None,
    )
    for key, value in report.to_dict().items():
        click.echo(f"{key}: {value}")
    if out_path is not None:
        out_path.write_text(json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        click.echo(f"wrote {out_path}")


# --------------------------------------------------------------------------- prompts


@main.group()
def prompts() -> None:
    """Render chat prompts for the translation strategies."""


@prompts.command("render")
@click.option("--strategy", required=True, type=click.Choice([s.value for s in Strategy]))
@click.option("--sentence", required=True, help="Input English sentence.")
@click.option("--shots", "shot_ids", default=None, help="Comma-separated benchmark ids for the examples.")
@click.option(
    "--benchmark",
    "benchmark_path",
    default=None,
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Benchmark file to pull shots from (default: packaged fixture).",
)
@_friendly
def prompts_render(strategy, sentence, shot_ids, benchmark_path) -> None:
    """Print the exact prompt a strategy would send."""
    strat = Strategy(strategy)
    shots: list[ShotExample] = []
    if strat.shot_count:
        instances = load_benchmark(benchmark_path) if benchmark_path else load_packaged_fixture()
        ids = tuple(s.strip() for s in shot_ids.split(",")) if shot_ids else tuple(
            inst.id for inst in instances[: strat.shot_count]
        )
        shots, _ = select_and_exclude_shots(instances, ids)
    click.echo(render_prompt(strat, sentence, shots), nl=False)


# --------------------------------------------------------------------------- bench


@main.group()
def bench() -> None:
    """Run experiments and re-emit their report tables."""


@bench.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@_friendly
def bench_run(config_path) -> None:
    """Run every pipeline in an experiment file and print the table."""
    cfg = load_experiment_config(config_path)
    rows = run_experiment(cfg)
    click.echo(render_markdown(rows), nl=False)
    click.echo(f"artifacts in {cfg.output_dir}")


@bench.command("report")
@click.option("--dir", "out_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--format", "fmt", default="markdown", show_default=True, type=click.Choice(["markdown", "csv", "json"]))
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False, path_type=Path))
@_friendly
def bench_report(out_dir, fmt, out_path) -> None:
    """Re-emit the table from a finished experiment directory."""
    rows = load_report_table(out_dir / "report.json")
    if out_path is None:
        if fmt == "markdown":
            click.echo(render_markdown(rows), nl=False)
        else:
            import tempfile

            with tempfile.NamedTemporaryFile("r", suffix=f".{fmt}", delete=False) as handle:
                tmp = Path(handle.name)
            emit_report(rows, fmt, tmp)
            click.echo(tmp.read_text(encoding="utf-8"), nl=False)
            tmp.unlink()
    else:
        emit_report(rows, fmt, out_path)
        click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
