"""Renderers for audit reports and pipeline models.

All renderers are pure: equal inputs give byte-identical output. Markdown
uses LF line endings and ASCII check marks unless ``glyphs`` is set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

from pta.catalog import Catalog, Coverage, SlsaApplies, builtin_catalog, toolchain_for
from pta.engine import (
    PRIORITY_FORMULA,
    AuditReport,
    MitigationAssessment,
    SlsaAssessment,
    StageGap,
    Status,
    ThreatFinding,
)
from pta.model import (
    CANONICAL_STAGES,
    PipelineModel,
    PipelineStage,
    SlsaLevel,
    StrideCategory,
    ThreatKey,
    model_to_document,
    natural_key,
)

SCHEMA_VERSION = "audit/1"
SARIF_SCHEMA = "https://json.schemastore.org/sarif-2.1.0.json"
FORMATS = ("matrix-md", "json", "sarif", "dot", "plan")
TOOL_NAME = "pta"


@dataclass(frozen=True)
class RenderOptions:
    format: str = "matrix-md"
    include_mitigated: bool = True
    redact_evidence: bool = True
    glyphs: bool = False
    split_columns: bool = False

    def __post_init__(self) -> None:
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}; choose one of {', '.join(FORMATS)}")


def _rule_id(key: ThreatKey) -> str:
    return f"THREAT-{key.threat_id}-{key.stage.value}"


def _md_escape(text: str) -> str:
    return text.replace("|", "\\|")


# -- traceability matrix --------------------------------------------------------

def render_matrix(
    report: AuditReport,
    catalog: Catalog | None = None,
    options: RenderOptions | None = None,
) -> str:
    catalog = catalog or builtin_catalog()
    opts = options or RenderOptions()
    yes, no = ("✓", "✗") if opts.glyphs else ("x", "-")
    bullet = "•" if opts.glyphs else "*"
    letters = [c.letter for c in StrideCategory]

    head = ["Asset (AS#)", "Threat Agent (TA#)", *letters, "Threat Description (incl. OWASP)"]
    if opts.split_columns:
        head += ["Security Controls", "SLSA", "SSDF"]
    else:
        head += ["Security Controls and SLSA/SSDF Mapping"]
    head.append("Status (tool)")

    out = [
        f"# Threat-control traceability matrix: {report.model_name}",
        "",
        f"Catalog {report.catalog_version}; attained SLSA level {report.slsa.attained}.",
    ]
    index = catalog.entry_index
    controls = catalog.control_index
    for stage in CANONICAL_STAGES:
        rows = [
            a for a in report.findings
            if a.finding.stage == stage and (opts.include_mitigated or a.status != Status.MITIGATED)
        ]
        out += ["", f"## {stage.display} stage", ""]
        if not rows:
            out.append("_No open threats._")
            continue
        out.append("| " + " | ".join(head) + " |")
        out.append("|" + "|".join("---" for _ in head) + "|")
        for a in rows:
            e = index[a.key]
            owasp = ", ".join(str(o) for o in e.owasp)
            desc = f"**{e.threat_id}**: {e.description}<br>OWASP: {owasp}"
            ctrl_lines = [f"{bullet} {controls[c].text}" for c in e.controls]
            slsa = ", ".join(str(lv) for lv in sorted(e.slsa_levels)) or "None"
            ssdf = ", ".join(s.code for s in e.ssdf)
            cells = [
                "<br>".join(e.assets),
                "<br>".join(e.agent_label(t) for t in e.agents),
                *(yes if c in e.stride else no for c in StrideCategory),
                desc,
            ]
            if opts.split_columns:
                cells += ["<br>".join(ctrl_lines), slsa, ssdf]
            else:
                cells.append("<br>".join(ctrl_lines + [f"**SLSA:** {slsa}", f"**SSDF:** {ssdf}"]))
            cells.append(f"{a.status.value} ({a.met_units}/{a.required_units})")
            out.append("| " + " | ".join(_md_escape(c) for c in cells) + " |")
    return "\n".join(out) + "\n"


# -- canonical JSON ---------------------------------------------------------

def _key_doc(key: ThreatKey) -> dict:
    return {"threat_id": key.threat_id, "stage": key.stage.value}


def _stride_doc(cats) -> list[str]:
    return [c.value for c in StrideCategory if c in cats]


def report_to_dict(report: AuditReport) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "model": report.model_name,
        "catalog_version": report.catalog_version,
        "findings": [
            {
                "key": _key_doc(a.key),
                "matched_assets": sorted(a.finding.matched_assets, key=natural_key),
                "matched_agents": sorted(a.finding.matched_agents, key=natural_key),
                "stride": _stride_doc(a.finding.stride),
                "satisfied_controls": list(a.satisfied_controls),
                "missing_controls": list(a.missing_controls),
                "slsa_assist": a.slsa_assist,
                "status": a.status.value,
                "coverage_ratio": str(a.coverage_ratio),
                "units": {"met": a.met_units, "required": a.required_units},
            }
            for a in report.findings
        ],
        "slsa": {
            "attained": str(report.slsa.attained),
            "per_category": {c.value: v.value for c, v in report.slsa.per_category},
            "unaddressed": _stride_doc(report.slsa.unaddressed),
        },
        "stage_gaps": [
            {
                "stage": g.stage.value,
                "stage_label": g.stage_label,
                "typical_threats": g.typical_threats,
                "slsa_applies": {"kind": g.slsa_applies.kind, "levels": [str(lv) for lv in g.slsa_applies.levels]},
                "stride_required": g.stride_required,
                "open_findings": g.open_findings,
                "stride_residual": _stride_doc(g.stride_residual),
                "editorial": g.editorial,
            }
            for g in report.stage_gaps
        ],
        "priorities": [{"key": _key_doc(k), "score": s} for k, s in report.priorities],
        "priority_formula": PRIORITY_FORMULA,
    }


def render_json(report: AuditReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _key_from(d: dict) -> ThreatKey:
    return ThreatKey(d["threat_id"], PipelineStage(d["stage"]))


def report_from_json(text: str | dict) -> AuditReport:
    """Inverse of :func:`render_json`."""
    d = json.loads(text) if isinstance(text, str) else text
    if d.get("version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema {d.get('version')!r}")
    findings = []
    for f in d["findings"]:
        finding = ThreatFinding(
            _key_from(f["key"]),
            frozenset(f["matched_assets"]),
            frozenset(f["matched_agents"]),
            frozenset(StrideCategory(s) for s in f["stride"]),
        )
        findings.append(
            MitigationAssessment(
                finding,
                tuple(f["satisfied_controls"]),
                tuple(f["missing_controls"]),
                f["slsa_assist"],
                Status(f["status"]),
                f["units"]["met"],
                f["units"]["required"],
            )
        )
    slsa = SlsaAssessment(
        SlsaLevel.parse(d["slsa"]["attained"]),
        tuple((StrideCategory(c), Coverage(v)) for c, v in
              sorted(d["slsa"]["per_category"].items(), key=lambda kv: StrideCategory(kv[0]).index)),
    )
    gaps = tuple(
        StageGap(
            stage=PipelineStage(g["stage"]),
            stage_label=g["stage_label"],
            typical_threats=g["typical_threats"],
            slsa_applies=SlsaApplies(g["slsa_applies"]["kind"], tuple(SlsaLevel.parse(x) for x in g["slsa_applies"]["levels"])),
            stride_required=g["stride_required"],
            open_findings=g["open_findings"],
            stride_residual=frozenset(StrideCategory(s) for s in g["stride_residual"]),
            editorial=g["editorial"],
        )
        for g in d["stage_gaps"]
    )
    return AuditReport(
        model_name=d["model"],
        catalog_version=d["catalog_version"],
        findings=tuple(findings),
        slsa=slsa,
        stage_gaps=gaps,
        priorities=tuple((_key_from(p["key"]), p["score"]) for p in d["priorities"]),
    )


# -- SARIF ----------------------------------------------------------------------

def render_sarif(report: AuditReport, catalog: Catalog | None = None) -> str:
    catalog = catalog or builtin_catalog()
    rules = []
    rule_index = {}
    for i, e in enumerate(catalog.entries):
        rid = _rule_id(e.key)
        rule_index[e.key] = i
        rules.append(
            {
                "id": rid,
                "name": f"{e.threat_id}{e.stage.display}",
                "shortDescription": {"text": e.description},
                "properties": {
                    "stride": _stride_doc(e.stride),
                    "owasp": [o.code for o in e.owasp],
                    "slsa": [str(lv) for lv in sorted(e.slsa_levels)],
                    "ssdf": [s.code for s in e.ssdf],
                },
            }
        )
    results = []
    for a in report.findings:
        if a.status == Status.MITIGATED:
            continue
        missing = ", ".join(catalog.control_index[c].text for c in a.missing_controls) or "SLSA level"
        results.append(
            {
                "ruleId": _rule_id(a.key),
                "ruleIndex": rule_index.get(a.key, -1),
                "level": "error" if a.status == Status.UNMITIGATED else "warning",
                "message": {
                    "text": f"{a.key.threat_id} at {a.key.stage.display} stage is {a.status.value.lower()} "
                    f"({a.met_units}/{a.required_units} units); missing: {missing}"
                },
                "locations": [
                    {"logicalLocations": [{"name": report.model_name, "fullyQualifiedName": f"{report.model_name}/{a.key.stage.value}"}]}
                ],
            }
        )
    sarif = {
        "$schema": SARIF_SCHEMA,
        "version": "2.1.0",
        "runs": [
            {
                "tool": {"driver": {"name": TOOL_NAME, "version": catalog.version, "rules": rules}},
                "results": results,
            }
        ],
    }
    return json.dumps(sarif, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# -- DFD ----------------------------------------------------------------------

def _dot_id(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dfd_dot(model: PipelineModel) -> str:
    nodes = set()
    for f in model.flows:
        nodes.update((f.source, f.target))
    for b in model.boundaries:
        nodes.update(b.members)
    lines = [f"digraph {_dot_id(model.name)} {{", "  rankdir=LR;", "  node [shape=box];"]
    for n in sorted(nodes):
        lines.append(f"  {_dot_id(n)};")
    for i, b in enumerate(model.boundaries):
        lines.append(f"  subgraph {_dot_id('cluster_' + str(i) + '_' + b.name)} {{")
        lines.append(f"    label={_dot_id(b.name)};")
        lines.append("    style=dashed;")
        for m in sorted(b.members):
            lines.append(f"    {_dot_id(m)};")
        lines.append("  }")
    for f in model.flows:
        attrs = [f"label={_dot_id(f.label)}"]
        if f.crosses_boundary:
            attrs.append("color=red")
        lines.append(f"  {_dot_id(f.source)} -> {_dot_id(f.target)} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- toolchain plan ---------------------------------------------------------

def plan_rows(report: AuditReport, catalog: Catalog) -> list[tuple[MitigationAssessment, Any]]:
    rows = []
    for a in report.open_findings:
        for t in toolchain_for(a.key.threat_id, catalog):
            rows.append((a, t))
    return rows


def render_toolchain_plan(report: AuditReport, catalog: Catalog | None = None) -> str:
    catalog = catalog or builtin_catalog()
    scores = dict(report.priorities)
    out = [f"# Hardening plan: {report.model_name}", ""]
    rows = plan_rows(report, catalog)
    if not rows:
        out.append("Pipeline fully mitigated per catalog.")
        return "\n".join(out) + "\n"
    out.append(f"Priority: {PRIORITY_FORMULA}.")
    for stage in CANONICAL_STAGES:
        stage_rows = [(a, t) for a, t in rows if a.key.stage == stage]
        if not stage_rows:
            continue
        out += ["", f"## {stage.display} stage", ""]
        out.append("| Threat | Status | Priority | Control objective | Tools and frameworks | Stages |")
        out.append("|---|---|---|---|---|---|")
        for a, t in stage_rows:
            cells = [
                a.key.threat_id,
                a.status.value,
                str(scores.get(a.key, 0)),
                t.objective,
                t.tools_text,
                ", ".join(s.display for s in t.stages),
            ]
            out.append("| " + " | ".join(_md_escape(c) for c in cells) + " |")
    return "\n".join(out) + "\n"


# -- model export -----------------------------------------------------------

def render_model_json(model: PipelineModel) -> str:
    return json.dumps(model_to_document(model), indent=2, ensure_ascii=False) + "\n"


def render(
    report: AuditReport,
    options: RenderOptions,
    *,
    catalog: Catalog | None = None,
    model: PipelineModel | None = None,
) -> str:
    if options.format == "matrix-md":
        return render_matrix(report, catalog, options)
    if options.format == "json":
        return render_json(report)
    if options.format == "sarif":
        return render_sarif(report, catalog)
    if options.format == "plan":
        return render_toolchain_plan(report, catalog)
    if model is None:
        raise ValueError("dot output needs the pipeline model")
    return render_dfd_dot(model)
