"""One test per acceptance criterion. Each records a PASS/FAIL line that the
terminal summary prints, whatever the outcome."""

import json
import random
import re
import time
from itertools import combinations

from click.testing import CliRunner

from conftest import AGENTS, ASSETS, FIXTURES, GOLDEN, reference_model
from pta.catalog import Coverage, builtin_catalog, builtin_catalog_document, export_catalog, load_catalog
from pta.cli import cli
from pta.engine import assess_slsa, evaluate_controls, full_audit, identify_threats
from pta.ingest import import_ci_workflow, parse_pipeline_model
from pta.model import (
    CANONICAL_STAGES,
    PipelineModel,
    PipelineStage,
    SlsaCapability,
    StrideCategory,
    model_to_document,
)
from pta.report import plan_rows, render_json, render_matrix

RESULTS: list[str] = []

# Expected checklists in catalog row order (S T R I D E).
CHECKLISTS = [
    ("T1", "source", "YNNYNY"),
    ("T5", "source", "YYYNNN"),
    ("T4", "source", "NYNYNN"),
    ("T11", "source", "NNNYNY"),
    ("T3", "build", "NYNYNY"),
    ("T14", "build", "NYYYYY"),
    ("T9", "build", "YYNYNY"),
    ("T2", "build", "YYNYNY"),
    ("T8", "build", "NYNYNY"),
    ("T7", "build", "NYYNNY"),
    ("T12", "build", "YYYNNN"),
    ("T10", "deployment", "NYNNNY"),
    ("T13", "deployment", "NYNNNN"),
    ("T14", "deployment", "NYNYNY"),
    ("T6", "monitoring", "NYNYNY"),
]

COVERAGE_TABLE = {
    StrideCategory.SPOOFING: ("None", "None", "Full", "Partial"),
    StrideCategory.TAMPERING: ("Partial", "Full", "Full", "Full"),
    StrideCategory.REPUDIATION: ("Partial", "Full", "Full", "Full"),
    StrideCategory.INFORMATION_DISCLOSURE: ("None", "Partial", "Full", "Full"),
    StrideCategory.DENIAL_OF_SERVICE: ("None", "None", "None", "None"),
    StrideCategory.ELEVATION_OF_PRIVILEGE: ("None", "None", "None", "Partial"),
}

EXPECTED_INDICATORS = {
    "credential.yml": [("secret-aws-access-key", "/jobs/test/env/AWS_ACCESS_KEY_ID", "T4", "source", "High")],
    "unpinned.yml": [
        ("unpinned-image", "/jobs/build/container", "T9", "build", "Medium"),
        ("unpinned-action", "/jobs/build/steps/0/uses", "T9", "build", "Medium"),
    ],
    "clean.yml": [],
}


def record(number: int, title: str, problems: list[str], elapsed: float, limit: float):
    if elapsed >= limit:
        problems = problems + [f"took {elapsed:.3f}s, limit {limit}s"]
    verdict = "PASS" if not problems else "FAIL"
    detail = f"{elapsed:.3f}s" if not problems else "; ".join(problems[:3])
    line = f"[{verdict}] criterion {number}: {title} ({detail})"
    RESULTS.append(line)
    print(line)
    assert not problems, line


def random_model(rng: random.Random, controls: list[str]) -> PipelineModel:
    def subset(pool):
        return frozenset(x for x in pool if rng.random() < 0.4)

    return PipelineModel(
        name="random",
        stages=subset(CANONICAL_STAGES),
        assets=subset(ASSETS),
        agents=subset(AGENTS),
        controls=subset(controls),
        slsa_capabilities=subset(list(SlsaCapability)),
    )


def test_catalog_fidelity():
    t0 = time.perf_counter()
    catalog = load_catalog(builtin_catalog_document())
    problems = []
    if len(catalog.assets) != 11:
        problems.append(f"{len(catalog.assets)} assets")
    if len(catalog.agents) != 7:
        problems.append(f"{len(catalog.agents)} agents")
    per_stage = [sum(e.stage == s for e in catalog.entries) for s in CANONICAL_STAGES]
    if per_stage != [4, 7, 3, 1]:
        problems.append(f"stage split {per_stage}")
    for cat, row in COVERAGE_TABLE.items():
        got = tuple(v.value for v in catalog.coverage.row(cat))
        if got != row:
            problems.append(f"{cat.value} coverage {got}")
    record(1, "catalog fidelity, 11/7/15 and 24 coverage cells", problems, time.perf_counter() - t0, 1.0)


def test_stride_checklist_reproduction():
    t0 = time.perf_counter()
    catalog = builtin_catalog()
    text = render_matrix(full_audit(reference_model(), catalog), catalog)
    problems = []
    if text != (GOLDEN / "reference_matrix.md").read_text(encoding="utf-8"):
        problems.append("matrix differs from golden file")
    rows = []
    stage = None
    for line in text.splitlines():
        if line.startswith("## "):
            stage = line[3:].split()[0].lower()
        m = re.search(r"\*\*(T\d+)\*\*", line)
        if line.startswith("| ") and m:
            cells = [c.strip() for c in line.strip("|").split(" | ")][2:8]
            rows.append((m.group(1), stage, "".join("Y" if c == "x" else "N" for c in cells)))
    cells = sum(len(flags) for _, _, flags in rows)
    if cells != 90:
        problems.append(f"{cells} flag cells rendered")
    for want, got in zip(CHECKLISTS, rows):
        if want != got:
            problems.append(f"expected {want}, rendered {got}")
    if len(rows) != len(CHECKLISTS):
        problems.append(f"{len(rows)} rows rendered")
    record(2, "STRIDE checklist reproduction, 90 flags", problems, time.perf_counter() - t0, 1.0)


def test_slsa_gap_semantics():
    t0 = time.perf_counter()
    catalog = builtin_catalog()
    caps = list(SlsaCapability)
    subsets = [frozenset(c) for n in range(5) for c in combinations(caps, n)]
    problems = []
    by_level = {}
    for subset in subsets:
        result = assess_slsa(reference_model(slsa_capabilities=subset), catalog)
        if result.coverage[StrideCategory.DENIAL_OF_SERVICE] != Coverage.NONE:
            problems.append(f"DoS covered at {result.attained}")
        by_level[result.attained] = result.coverage
    levels = sorted(by_level)
    for cat in StrideCategory:
        for lo, hi in zip(levels, levels[1:]):
            if by_level[hi][cat].rank < by_level[lo][cat].rank:
                problems.append(
                    f"{cat.value} drops {by_level[lo][cat].value}->{by_level[hi][cat].value} at {hi}"
                )
    assert len(subsets) == 16
    record(3, "SLSA gap semantics over 16 capability subsets", problems, time.perf_counter() - t0, 1.0)


def test_matching_oracle():
    t0 = time.perf_counter()
    catalog = builtin_catalog()
    rng = random.Random(20240521)
    problems = []
    for _ in range(1000):
        model = random_model(rng, [])
        expected = [
            e.key
            for e in catalog.entries
            if e.stage in model.stages and set(e.assets) & model.assets and set(e.agents) & model.agents
        ]
        got = [f.entry_key for f in identify_threats(model, catalog)]
        if got != expected:
            problems.append(f"mismatch for {sorted(model.assets)}")
    record(4, "matching oracle, 1000 random models", problems, time.perf_counter() - t0, 5.0)


def test_mitigation_monotonicity():
    t0 = time.perf_counter()
    catalog = builtin_catalog()
    control_ids = [c.id for c in catalog.controls]
    rng = random.Random(7)
    problems = []
    for _ in range(1000):
        base = random_model(rng, control_ids)
        extra = frozenset(c for c in control_ids if rng.random() < 0.3)
        richer = PipelineModel(**{**base.__dict__, "controls": base.controls | extra})
        before = evaluate_controls(base, catalog, identify_threats(base, catalog))
        after = evaluate_controls(richer, catalog, identify_threats(richer, catalog))
        for a, b in zip(before, after):
            if b.status.rank < a.status.rank or b.coverage_ratio < a.coverage_ratio:
                problems.append(f"{a.key} degraded")
    record(5, "mitigation monotonicity, 1000 control supersets", problems, time.perf_counter() - t0, 5.0)


def test_determinism_and_round_trips():
    t0 = time.perf_counter()
    catalog = builtin_catalog()
    problems = []
    model = parse_pipeline_model((FIXTURES / "models" / "reference.yaml").read_text())
    first = render_json(full_audit(model, catalog))
    if any(render_json(full_audit(model, catalog)) != first for _ in range(3)):
        problems.append("render_json not byte-identical")
    if first + "\n" != (GOLDEN / "reference_audit.json").read_text(encoding="utf-8"):
        problems.append("json differs from golden file")
    if parse_pipeline_model(model_to_document(model)) != model:
        problems.append("model round-trip")
    saturated = reference_model(
        controls=frozenset(c.id for c in catalog.controls), slsa_capabilities=frozenset(SlsaCapability)
    )
    if parse_pipeline_model(json.dumps(model_to_document(saturated))) != saturated:
        problems.append("saturated model round-trip")
    if load_catalog(export_catalog(catalog)) != catalog:
        problems.append("catalog round-trip")
    record(6, "determinism and round-trips", problems, time.perf_counter() - t0, 1.0)


def test_importer_indicators():
    t0 = time.perf_counter()
    problems = []
    runner = CliRunner()
    for name, expected in EXPECTED_INDICATORS.items():
        path = FIXTURES / "workflows" / name
        text = path.read_text()
        _, found = import_ci_workflow(text)
        got = [
            (f.indicator_id, f.location.path, f.suggests_threat.threat_id, f.suggests_threat.stage.value,
             f.confidence.value)
            for f in found
        ]
        if got != expected:
            problems.append(f"{name}: {got}")
        output = runner.invoke(cli, ["import", str(path)]).output
        for secret in re.findall(r"AKIA[0-9A-Z]{16}", text):
            leaked = [secret[i : i + 8] for i in range(len(secret) - 7) if secret[i : i + 8] in output]
            if leaked:
                problems.append(f"{name}: secret fragment {leaked[0]!r} in output")
    record(7, "importer indicators with redacted evidence", problems, time.perf_counter() - t0, 1.0)


def test_toolchain_plan_coverage():
    t0 = time.perf_counter()
    catalog = builtin_catalog()
    report = full_audit(reference_model(), catalog)
    rows = plan_rows(report, catalog)
    problems = []
    open_ids = {a.key.threat_id for a in report.open_findings}
    planned = {a.key.threat_id for a, _ in rows}
    for n in range(1, 15):
        tid = f"T{n}"
        if tid in open_ids and tid not in planned:
            problems.append(f"{tid} has no plan row")
    for key, want in ((("T9", PipelineStage.BUILD), 4), (("T14", PipelineStage.BUILD), 4)):
        got = sum(1 for a, _ in rows if a.key == key)
        if got != want:
            problems.append(f"{key[0]} has {got} rows")
    record(8, "toolchain plan coverage for T1-T14", problems, time.perf_counter() - t0, 1.0)
