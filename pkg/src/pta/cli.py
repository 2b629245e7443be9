"""``pta`` command line.

Commands::

    pta audit MODEL [--format matrix-md|json|sarif|dot|plan] [--gate none|partial|unmitigated]
    pta catalog show | validate PATH | export [--out PATH]
    pta import WORKFLOW [--dialect generic|github|gitlab] [--out PATH]
    pta dfd MODEL

Reports go to stdout, diagnostics to stderr. Exit codes: 0 clean, 1 gate
tripped (``audit`` only), 2 usage, parse or validation error.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from pta import __version__
from pta.catalog import Catalog, builtin_catalog, export_catalog, load_catalog
from pta.engine import Status, full_audit
from pta.ingest import DIALECTS, import_ci_workflow, load_document, parse_pipeline_model
from pta.model import Diagnostic, PipelineModel, Severity, StrideCategory, ValidationError
from pta.report import FORMATS, RenderOptions, render, render_dfd_dot

EXIT_OK, EXIT_GATE, EXIT_ERROR = 0, 1, 2


class Failure(click.ClickException):
    exit_code = EXIT_ERROR

    def show(self, file=None) -> None:
        click.echo(f"error: {self.message}", err=True)


def _emit_diagnostics(diags, quiet: bool) -> None:
    for d in diags:
        if quiet and d.severity != Severity.ERROR:
            continue
        click.echo(str(d), err=True)


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise Failure(f"cannot read {path}: {exc.strerror}") from None


def _load_catalog(source: str | None, quiet: bool) -> Catalog:
    if not source or source == "builtin":
        return builtin_catalog()
    try:
        tree = load_document(_read(source))
        catalog = load_catalog(tree)
    except ValidationError as exc:
        _emit_diagnostics(exc.diagnostics, quiet=False)
        raise Failure(f"invalid catalog {source}") from None
    _emit_diagnostics(catalog.diagnostics, quiet)
    return catalog


def _load_model(path: str, catalog: Catalog, quiet: bool) -> PipelineModel:
    warnings: list[Diagnostic] = []
    try:
        model = parse_pipeline_model(_read(path), catalog, warnings=warnings)
    except ValidationError as exc:
        _emit_diagnostics(exc.diagnostics, quiet=False)
        raise Failure(f"invalid pipeline model {path}") from None
    _emit_diagnostics(warnings, quiet)
    return model


@click.group()
@click.version_option(__version__, prog_name="pta")
@click.option("--catalog", "catalog_spec", envvar="PTA_CATALOG", default=None,
              help="Catalog JSON/YAML path, or 'builtin' (default). Env: PTA_CATALOG.")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default=None, help="Output format for audit.")
@click.option("--quiet", "-q", is_flag=True, help="Suppress warnings and informational diagnostics.")
@click.pass_context
def cli(ctx: click.Context, catalog_spec: str | None, fmt: str | None, quiet: bool) -> None:
    """Threat-model-as-code auditor for CI/CD pipelines."""
    ctx.obj = {"catalog": catalog_spec, "format": fmt, "quiet": quiet}


@cli.command()
@click.argument("model_path", metavar="MODEL")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default=None)
@click.option("--gate", type=click.Choice(["none", "partial", "unmitigated"]), default="none", show_default=True,
              help="Exit 1 when any finding is at or below this status.")
@click.option("--catalog", "catalog_spec", default=None)
@click.option("--open-only", is_flag=True, help="Omit mitigated rows from the matrix.")
@click.option("--glyphs", is_flag=True, help="Use check/cross symbols instead of x/-.")
@click.option("--split-columns", is_flag=True, help="Separate controls, SLSA and SSDF into columns.")
@click.pass_obj
def audit(obj, model_path, fmt, gate, catalog_spec, open_only, glyphs, split_columns):
    """Audit a pipeline model against the threat catalog."""
    quiet = obj["quiet"]
    catalog = _load_catalog(catalog_spec or obj["catalog"], quiet)
    model = _load_model(model_path, catalog, quiet)
    report = full_audit(model, catalog)
    options = RenderOptions(
        format=fmt or obj["format"] or "matrix-md",
        include_mitigated=not open_only,
        glyphs=glyphs,
        split_columns=split_columns,
    )
    text = render(report, options, catalog=catalog, model=model)
    click.echo(text, nl=not text.endswith("\n"))

    statuses = {a.status for a in report.findings}
    tripped = (
        (gate == "unmitigated" and Status.UNMITIGATED in statuses)
        or (gate == "partial" and bool(statuses - {Status.MITIGATED}))
    )
    if tripped:
        if not quiet:
            click.echo(f"gate '{gate}' tripped: {len(report.open_findings)} open finding(s)", err=True)
        sys.exit(EXIT_GATE)


@cli.group("catalog")
def catalog_group():
    """Inspect, validate or export the threat catalog."""


@catalog_group.command("show")
@click.pass_obj
def catalog_show(obj):
    catalog = _load_catalog(obj["catalog"], obj["quiet"])
    click.echo(catalog.summary())
    click.echo(f"version {catalog.version}; {len(catalog.controls)} controls")
    for e in catalog.entries:
        mask = "".join(c.letter if c in e.stride else "." for c in StrideCategory)
        click.echo(f"  {e.threat_id:<4} {e.stage.value:<11} {mask}  {e.description}")
    click.echo("coverage (L1 L2 L3 L4):")
    for cat in StrideCategory:
        row = " ".join(f"{v.value:<7}" for v in catalog.coverage.row(cat))
        click.echo(f"  {cat.value:<22} {row}")


@catalog_group.command("validate")
@click.argument("path")
@click.pass_obj
def catalog_validate(obj, path):
    """Load PATH as a catalog and report diagnostics."""
    try:
        catalog = load_catalog(load_document(_read(path)))
    except ValidationError as exc:
        _emit_diagnostics(exc.diagnostics, quiet=False)
        raise Failure(f"{path}: invalid catalog ({len(exc.diagnostics)} error(s))") from None
    _emit_diagnostics(catalog.diagnostics, obj["quiet"])
    click.echo(f"{path}: valid ({catalog.summary()})")


@catalog_group.command("export")
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
@click.pass_obj
def catalog_export(obj, out):
    """Write the catalog as JSON (stdout unless --out)."""
    catalog = _load_catalog(obj["catalog"], obj["quiet"])
    text = json.dumps(export_catalog(catalog), indent=2, ensure_ascii=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@cli.command("import")
@click.argument("workflow_path", metavar="WORKFLOW")
@click.option("--dialect", type=click.Choice(DIALECTS), default="generic", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None,
              help="Write the partial model here; indicators still print to stdout.")
@click.pass_obj
def import_cmd(obj, workflow_path, dialect, out):
    """Infer a partial model and risk indicators from a CI workflow file."""
    catalog = _load_catalog(obj["catalog"], obj["quiet"])
    raw = _read(workflow_path)
    try:
        partial, indicators = import_ci_workflow(raw, catalog, dialect=dialect, filename=workflow_path,
                                                 source_text=raw.decode("utf-8", errors="replace"))
    except ValidationError as exc:
        _emit_diagnostics(exc.diagnostics, quiet=False)
        raise Failure(f"cannot import {workflow_path}") from None
    if out:
        Path(out).write_text(json.dumps(partial, indent=2) + "\n", encoding="utf-8")
        for ind in indicators:
            click.echo(
                f"{ind.confidence.value.upper():<6} {ind.indicator_id:<26} {ind.location}  "
                f"-> {ind.suggests_threat}  {ind.evidence}"
            )
        if not indicators and not obj["quiet"]:
            click.echo("no indicators", err=True)
    else:
        doc = {"partial_model": partial, "indicators": [i.to_dict() for i in indicators]}
        click.echo(json.dumps(doc, indent=2, ensure_ascii=False))


@cli.command()
@click.argument("model_path", metavar="MODEL")
@click.pass_obj
def dfd(obj, model_path):
    """Print the model's data-flow diagram as Graphviz DOT."""
    catalog = _load_catalog(obj["catalog"], obj["quiet"])
    model = _load_model(model_path, catalog, obj["quiet"])
    click.echo(render_dfd_dot(model), nl=False)


def main() -> None:
    cli(prog_name="pta")


if __name__ == "__main__":
    main()
