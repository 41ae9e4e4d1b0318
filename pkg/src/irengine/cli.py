"""``ir-cli``: headless access to the analysis pipeline.

* ``ir-cli analyze --config req.json --csv data.csv --out result.json``
  runs filter/group/partition/metrics/aggregate/chart on a CSV without a
  server; an ``--out`` ending in ``.svg`` writes a rendered summary instead
  of JSON.
* ``ir-cli synth --spec spec.json --out data.csv`` materializes a seeded
  synthetic dataset.
* ``ir-cli serve`` starts the HTTP service.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .analysis import AnalysisRequest, canonical_json, run_analysis
from .dataset import ingest_csv, load_schema_hint
from .errors import IngestError, ValidationError
from .svg import render_svg
from .synth import GeneratorSpec, generate, write_csv


@click.group()
def main():
    """Fold-replicated analytics engine."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="JSON analysis request (the dataset field is taken from --csv).")
@click.option("--csv", "csv_path", required=True, type=click.Path(exists=True),
              help="CSV file to analyze.")
@click.option("--schema-hint", "hint_path", type=click.Path(exists=True), default=None,
              help="JSON object mapping column name to kind.")
@click.option("--out", "out_path", default="-",
              help="Output path; '.svg' renders a chart summary, anything else "
                   "writes canonical JSON. '-' writes JSON to stdout.")
def analyze(config_path, csv_path, hint_path, out_path):
    """Run one analysis over a CSV file."""
    with open(config_path, encoding="utf-8") as fh:
        config = json.load(fh)
    hint = load_schema_hint(hint_path) if hint_path else None
    try:
        dataset = ingest_csv(csv_path, schema_hint=hint)
        config["dataset"] = dataset.name
        request = AnalysisRequest.from_dict(config)
        result = run_analysis(dataset, request)
    except (ValidationError, IngestError) as exc:
        raise click.ClickException(str(exc))
    if out_path != "-" and out_path.endswith(".svg"):
        Path(out_path).write_text(render_svg(result.chart.to_dict()), encoding="utf-8")
        click.echo(f"wrote {out_path}")
        return
    payload = canonical_json(result.to_dict())
    if out_path == "-":
        sys.stdout.buffer.write(payload + b"\n")
    else:
        Path(out_path).write_bytes(payload)
        click.echo(f"wrote {out_path}")


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True),
              help="JSON generator spec.")
@click.option("--out", "out_path", required=True,
              help="CSV output path.")
def synth(spec_path, out_path):
    """Generate a synthetic dataset as CSV."""
    with open(spec_path, encoding="utf-8") as fh:
        spec_dict = json.load(fh)
    try:
        dataset = generate(GeneratorSpec.from_dict(spec_dict))
    except ValidationError as exc:
        raise click.ClickException(str(exc))
    write_csv(dataset, out_path)
    click.echo(f"wrote {out_path} ({dataset.row_count} rows)")


@main.command()
@click.option("--host", default="127.0.0.1", envvar="IR_HOST", show_default=True)
@click.option("--port", default=8750, envvar="IR_PORT", show_default=True, type=int)
@click.option("--dataset-dir", default="./datasets", envvar="IR_DATASET_DIR",
              show_default=True, help="Directory where uploaded CSVs persist.")
@click.option("--session-ttl", default=3600.0, envvar="IR_SESSION_TTL",
              show_default=True, type=float,
              help="Idle seconds before an incremental session expires.")
def serve(host, port, dataset_dir, session_ttl):
    """Start the HTTP service."""
    import uvicorn

    from .server import create_app
    app = create_app(dataset_dir, session_ttl=session_ttl)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
