"""Command-line interface: ``adapter serve`` and ``adapter finetune``."""

from __future__ import annotations

import functools
import logging
from pathlib import Path

import click

from . import __version__
from .config import load_adapter_config
from .errors import AdapterError
from .finetune import finetune
from .server import serve


def _friendly(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AdapterError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


@click.group()
@click.version_option(__version__, prog_name="adapter")
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO)


@main.command("serve")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--host", default=None, help="Override the configured host.")
@click.option("--port", default=None, type=int, help="Override the configured port.")
@_friendly
def serve_cmd(config_path, host, port) -> None:
    """Serve the bound models over the wire protocol."""
    cfg = load_adapter_config(config_path)
    serve(list(cfg.bindings), host=host or cfg.host, port=port if port is not None else cfg.port)


@main.command("finetune")
@click.option("--corpus", "corpus_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--base", "base_model_id", required=True, help="Base model id (stub-* trains locally).")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path))
@click.option("--epochs", default=1, show_default=True, type=int)
@click.option("--learning-rate", default=5e-4, show_default=True, type=float)
@click.option("--batch-size", default=16, show_default=True, type=int)
@click.option("--stem", default=None, help="Corpus stem when the directory holds several.")
@_friendly
def finetune_cmd(corpus_dir, base_model_id, out_dir, epochs, learning_rate, batch_size, stem) -> None:
    """Fine-tune on a variant corpus and write a servable artifact."""
    artifact = finetune(
        corpus_dir,
        base_model_id,
        out_dir,
        epochs=epochs,
        learning_rate=learning_rate,
        batch_size=batch_size,
        stem=stem,
    )
    click.echo(f"artifact written to {artifact} (bind with model_id = \"artifact:{artifact}\")")


if __name__ == "__main__":
    main()
