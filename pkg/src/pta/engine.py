"""Audit engine: instantiate catalog threats against a pipeline model, score
control coverage, assess SLSA maturity and compose the audit report.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from pta.catalog import (
    Catalog,
    Coverage,
    SlsaApplies,
    StageApplicability,
    ThreatCatalogEntry,
)
from pta.model import (
    CANONICAL_STAGES,
    PipelineModel,
    PipelineStage,
    Severity,
    SlsaLevel,
    StrideCategory,
    ThreatKey,
    ValidationError,
    slsa_level_from_capabilities,
    validate_model,
)

PRIORITY_FORMULA = "score = |STRIDE flags| x |matched assets| for open findings, 0 when mitigated (tool heuristic)"

# Applicability row label -> pipeline stage. "CI Configuration" lands on Source because
# the config-tampering threat sits in the source-stage table.
STAGE_OF_LABEL = {
    "Source Code": PipelineStage.SOURCE,
    "CI Configuration": PipelineStage.SOURCE,
    "Build & Artifact Creation": PipelineStage.BUILD,
    "Image Deployment": PipelineStage.DEPLOYMENT,
}

MONITORING_ROW = StageApplicability(
    stage_label="Monitoring",
    typical_threats="Log tampering, undetected pipeline abuse",
    slsa_applies=SlsaApplies("no"),
    stride_required=True,
)


class Status(str, Enum):
    MITIGATED = "Mitigated"
    PARTIAL = "Partial"
    UNMITIGATED = "Unmitigated"

    @property
    def rank(self) -> int:
        """Higher is better."""
        return {"Unmitigated": 0, "Partial": 1, "Mitigated": 2}[self.value]


@dataclass(frozen=True)
class ThreatFinding:
    entry_key: ThreatKey
    matched_assets: frozenset[str]
    matched_agents: frozenset[str]
    stride: frozenset[StrideCategory]

    @property
    def stage(self) -> PipelineStage:
        return self.entry_key.stage


@dataclass(frozen=True)
class MitigationAssessment:
    finding: ThreatFinding
    satisfied_controls: tuple[str, ...]
    missing_controls: tuple[str, ...]
    slsa_assist: bool
    status: Status
    met_units: int
    required_units: int

    @property
    def key(self) -> ThreatKey:
        return self.finding.entry_key

    @property
    def coverage_ratio(self) -> Fraction:
        if not self.required_units:
            return Fraction(1)
        return Fraction(self.met_units, self.required_units)


@dataclass(frozen=True)
class SlsaAssessment:
    attained: SlsaLevel
    per_category: tuple[tuple[StrideCategory, Coverage], ...]

    @property
    def coverage(self) -> dict[StrideCategory, Coverage]:
        return dict(self.per_category)

    @property
    def unaddressed(self) -> frozenset[StrideCategory]:
        return frozenset(c for c, v in self.per_category if v == Coverage.NONE)


@dataclass(frozen=True)
class StageGap:
    stage: PipelineStage
    stage_label: str
    typical_threats: str
    slsa_applies: SlsaApplies
    stride_required: bool
    open_findings: int
    stride_residual: frozenset[StrideCategory]
    editorial: bool = False


@dataclass(frozen=True)
class AuditReport:
    model_name: str
    catalog_version: str
    findings: tuple[MitigationAssessment, ...]
    slsa: SlsaAssessment
    stage_gaps: tuple[StageGap, ...]
    priorities: tuple[tuple[ThreatKey, int], ...]

    def by_status(self, status: Status) -> list[MitigationAssessment]:
        return [a for a in self.findings if a.status == status]

    @property
    def open_findings(self) -> list[MitigationAssessment]:
        return [a for a in self.findings if a.status != Status.MITIGATED]


def identify_threats(model: PipelineModel, catalog: Catalog) -> list[ThreatFinding]:
    """Catalog entries whose stage is modelled and whose asset and agent sets
    both intersect the model's. Returned in catalog (table) order."""
    found = []
    for entry in catalog.entries:
        if entry.stage not in model.stages:
            continue
        assets = model.assets.intersection(entry.assets)
        agents = model.agents.intersection(entry.agents)
        if assets and agents:
            found.append(ThreatFinding(entry.key, frozenset(assets), frozenset(agents), entry.stride))
    return found


def _assess(entry: ThreatCatalogEntry, finding: ThreatFinding, controls: frozenset[str], attained: SlsaLevel):
    satisfied = tuple(c for c in entry.controls if c in controls)
    missing = tuple(c for c in entry.controls if c not in controls)
    slsa_assist = bool(entry.slsa_levels) and attained >= min(entry.slsa_levels)

    required = len(entry.controls) + (1 if entry.slsa_levels else 0)
    met = len(satisfied) + (1 if slsa_assist else 0)

    if not missing and (not entry.slsa_levels or slsa_assist):
        status = Status.MITIGATED
    elif not satisfied and not slsa_assist:
        status = Status.UNMITIGATED
    else:
        status = Status.PARTIAL
    return MitigationAssessment(finding, satisfied, missing, slsa_assist, status, met, required)


def evaluate_controls(
    model: PipelineModel, catalog: Catalog, findings: list[ThreatFinding]
) -> list[MitigationAssessment]:
    attained = slsa_level_from_capabilities(model.slsa_capabilities)
    index = catalog.entry_index
    return [_assess(index[f.entry_key], f, model.controls, attained) for f in findings]


def assess_slsa(model: PipelineModel, catalog: Catalog) -> SlsaAssessment:
    attained = slsa_level_from_capabilities(model.slsa_capabilities)
    cells = tuple((cat, catalog.coverage.at(cat, attained)) for cat in StrideCategory)
    return SlsaAssessment(attained, cells)


def stage_gap_analysis(
    model: PipelineModel, catalog: Catalog, assessments: list[MitigationAssessment]
) -> list[StageGap]:
    rows: list[tuple[PipelineStage, StageApplicability, bool]] = []
    for row in catalog.applicability:
        stage = STAGE_OF_LABEL.get(row.stage_label)
        if stage is not None and stage in model.stages:
            rows.append((stage, row, False))
    if PipelineStage.MONITORING in model.stages:
        rows.append((PipelineStage.MONITORING, MONITORING_ROW, True))

    gaps = []
    for stage, row, editorial in rows:
        open_ = [a for a in assessments if a.finding.stage == stage and a.status != Status.MITIGATED]
        residual: frozenset[StrideCategory] = frozenset().union(*(a.finding.stride for a in open_))
        gaps.append(
            StageGap(
                stage=stage,
                stage_label=row.stage_label,
                typical_threats=row.typical_threats,
                slsa_applies=row.slsa_applies,
                stride_required=row.stride_required,
                open_findings=len(open_),
                stride_residual=residual,
                editorial=editorial,
            )
        )
    return gaps


def priority_score(assessment: MitigationAssessment) -> int:
    if assessment.status == Status.MITIGATED:
        return 0
    return len(assessment.finding.stride) * len(assessment.finding.matched_assets)


def prioritize(assessments: list[MitigationAssessment]) -> list[tuple[ThreatKey, int]]:
    scored = [(a.key, priority_score(a)) for a in assessments]
    return sorted(scored, key=lambda ks: (-ks[1], ks[0].sort_key()))


def full_audit(model: PipelineModel, catalog: Catalog) -> AuditReport:
    """Run the complete audit. Raises :class:`ValidationError` if *model*
    does not resolve against *catalog*."""
    errors = [d for d in validate_model(model, catalog) if d.severity == Severity.ERROR]
    if errors:
        raise ValidationError(errors, what="pipeline model")
    findings = identify_threats(model, catalog)
    assessments = evaluate_controls(model, catalog, findings)
    stage_rank = {s: i for i, s in enumerate(CANONICAL_STAGES)}
    row_rank = {e.key: i for i, e in enumerate(catalog.entries)}
    assessments.sort(key=lambda a: (stage_rank[a.finding.stage], row_rank[a.key]))
    return AuditReport(
        model_name=model.name,
        catalog_version=catalog.version,
        findings=tuple(assessments),
        slsa=assess_slsa(model, catalog),
        stage_gaps=tuple(stage_gap_analysis(model, catalog, assessments)),
        priorities=tuple(prioritize(assessments)),
    )
