"""Threat knowledge base: the traceability matrix, control registry, SLSA x STRIDE
coverage, stage applicability, toolchain recommendations and incident notes.

The built-in catalog ships as ``data/catalog.json`` and goes through the same
loader as any user-supplied catalog.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property, lru_cache
from importlib import resources
from typing import Any, Mapping

import jsonschema

from pta.model import (
    CANONICAL_STAGES,
    AssetRef,
    ControlDescriptor,
    ControlType,
    Diagnostic,
    OwaspCategory,
    PipelineStage,
    Severity,
    SlsaLevel,
    SsdfPracticeId,
    StrideCategory,
    ThreatAgentRef,
    ThreatKey,
    ValidationError,
    format_stride_flags,
    parse_stride_flags,
    pointer,
)

TOP_LEVEL_KEYS = (
    "version",
    "assets",
    "agents",
    "controls",
    "entries",
    "coverage",
    "applicability",
    "aspects",
    "toolchain",
    "incidents",
)
OPTIONAL_KEYS = ("heuristics",)

APPLICABILITY_LABELS = ("Source Code", "CI Configuration", "Build & Artifact Creation", "Image Deployment")
SLSA_LEVELS = (SlsaLevel.L1, SlsaLevel.L2, SlsaLevel.L3, SlsaLevel.L4)


class CatalogError(ValidationError):
    def __init__(self, diagnostics):
        super().__init__(diagnostics, what="catalog")


class NotFoundError(KeyError):
    pass


class Coverage(str, Enum):
    NONE = "None"
    PARTIAL = "Partial"
    FULL = "Full"

    @property
    def rank(self) -> int:
        return list(Coverage).index(self)

    def __str__(self) -> str:
        return self.value


class Confidence(str, Enum):
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"


@dataclass(frozen=True)
class ThreatCatalogEntry:
    key: ThreatKey
    assets: tuple[str, ...]
    agents: tuple[str, ...]
    stride: frozenset[StrideCategory]
    description: str
    owasp: tuple[OwaspCategory, ...]
    controls: tuple[str, ...]
    slsa_levels: frozenset[SlsaLevel]
    ssdf: tuple[SsdfPracticeId, ...]
    agent_notes: tuple[tuple[str, str], ...] = ()

    @property
    def threat_id(self) -> str:
        return self.key.threat_id

    @property
    def stage(self) -> PipelineStage:
        return self.key.stage

    def agent_label(self, agent_id: str) -> str:
        note = dict(self.agent_notes).get(agent_id)
        return f"{agent_id} ({note})" if note else agent_id


@dataclass(frozen=True)
class SlsaStrideCoverage:
    matrix: Mapping[tuple[StrideCategory, SlsaLevel], Coverage]
    gap_note: Mapping[StrideCategory, str]

    def at(self, category: StrideCategory, level: SlsaLevel) -> Coverage:
        if level == SlsaLevel.L0:
            return Coverage.NONE
        return self.matrix[(category, level)]

    def row(self, category: StrideCategory) -> tuple[Coverage, ...]:
        return tuple(self.matrix[(category, lv)] for lv in SLSA_LEVELS)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SlsaStrideCoverage):
            return NotImplemented
        return dict(self.matrix) == dict(other.matrix) and dict(self.gap_note) == dict(other.gap_note)

    def __hash__(self) -> int:
        return hash(tuple(sorted((str(k), v.value) for k, v in self.matrix.items())))


@dataclass(frozen=True)
class SlsaApplies:
    kind: str  # "no" | "partial" | "yes"
    levels: tuple[SlsaLevel, ...] = ()

    def __str__(self) -> str:
        if self.kind == "no":
            return "No"
        span = ""
        if self.levels:
            lo, hi = self.levels[0], self.levels[-1]
            span = f" ({lo})" if lo == hi else f" ({lo}-{hi})"
        return ("Partial" if self.kind == "partial" else "Yes") + span


@dataclass(frozen=True)
class StageApplicability:
    stage_label: str
    typical_threats: str
    slsa_applies: SlsaApplies
    stride_required: bool


@dataclass(frozen=True)
class AspectGap:
    aspect: str
    slsa_coverage: str
    gap: str


@dataclass(frozen=True)
class ToolchainEntry:
    threat_id: str
    objective: str
    tools_text: str
    stages: tuple[PipelineStage, ...]


@dataclass(frozen=True)
class IncidentAnnotation:
    stride: StrideCategory
    incident_name: str
    year: int
    summary: str


@dataclass(frozen=True)
class Heuristic:
    id: str
    kind: str
    pattern: str
    suggests: ThreatKey
    confidence: Confidence
    description: str


@dataclass(frozen=True)
class Catalog:
    version: str
    assets: tuple[AssetRef, ...]
    agents: tuple[ThreatAgentRef, ...]
    controls: tuple[ControlDescriptor, ...]
    entries: tuple[ThreatCatalogEntry, ...]
    coverage: SlsaStrideCoverage
    applicability: tuple[StageApplicability, ...]
    aspects: tuple[AspectGap, ...]
    toolchain: tuple[ToolchainEntry, ...]
    incidents: tuple[IncidentAnnotation, ...]
    heuristics: tuple[Heuristic, ...] = ()
    heuristics_version: str = ""
    diagnostics: tuple[Diagnostic, ...] = field(default=(), compare=False, repr=False)

    @cached_property
    def asset_index(self) -> dict[str, AssetRef]:
        return {a.id: a for a in self.assets}

    @cached_property
    def agent_index(self) -> dict[str, ThreatAgentRef]:
        return {a.id: a for a in self.agents}

    @cached_property
    def control_index(self) -> dict[str, ControlDescriptor]:
        return {c.id: c for c in self.controls}

    @cached_property
    def entry_index(self) -> dict[ThreatKey, ThreatCatalogEntry]:
        return {e.key: e for e in self.entries}

    def entry(self, key: ThreatKey) -> ThreatCatalogEntry:
        try:
            return self.entry_index[key]
        except KeyError:
            raise NotFoundError(f"no catalog entry for {key}") from None

    def summary(self) -> str:
        return f"{len(self.entries)} threats, {len(self.assets)} assets, {len(self.agents)} agents"


# -- schema -----------------------------------------------------------------

_STR = {"type": "string"}
_NONEMPTY = {"type": "string", "minLength": 1}
_STR_LIST = {"type": "array", "items": _STR}
_LEVELS = {"type": "array", "items": {"enum": ["L1", "L2", "L3", "L4"]}}
_STAGE_NAMES = [s.value for s in PipelineStage]

CATALOG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": list(TOP_LEVEL_KEYS),
    "additionalProperties": False,
    "properties": {
        "version": _NONEMPTY,
        "assets": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "description"],
                "additionalProperties": False,
                "properties": {"id": _NONEMPTY, "description": _STR},
            },
        },
        "agents": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "name"],
                "additionalProperties": False,
                "properties": {"id": _NONEMPTY, "name": _NONEMPTY, "description": _STR},
            },
        },
        "controls": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "text", "control_type"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "pattern": "^[a-z0-9]+(-[a-z0-9]+)*$"},
                    "text": _NONEMPTY,
                    "control_type": {"enum": [t.value for t in ControlType]},
                    "classification": _STR,
                },
            },
        },
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "threat_id", "stage", "assets", "agents", "stride",
                    "description", "owasp", "controls", "slsa_levels", "ssdf",
                ],
                "additionalProperties": False,
                "properties": {
                    "threat_id": {"type": "string", "pattern": r"^T\d+$"},
                    "stage": {"enum": [s.value for s in CANONICAL_STAGES]},
                    "assets": _STR_LIST,
                    "agents": _STR_LIST,
                    "agent_notes": {"type": "object", "additionalProperties": _STR},
                    "stride": _STR,
                    "description": _NONEMPTY,
                    "owasp": {
                        "type": "array",
                        "items": {
                            "oneOf": [
                                _STR,
                                {
                                    "type": "object",
                                    "required": ["code"],
                                    "additionalProperties": False,
                                    "properties": {"code": _STR, "name": _STR},
                                },
                            ]
                        },
                    },
                    "controls": _STR_LIST,
                    "slsa_levels": _LEVELS,
                    "ssdf": {"type": "array", "minItems": 1, "items": _STR},
                },
            },
        },
        "coverage": {
            "type": "object",
            "required": ["matrix", "gap_note"],
            "additionalProperties": False,
            "properties": {
                "matrix": {
                    "type": "object",
                    "additionalProperties": {
                        "type": "object",
                        "additionalProperties": {"enum": [c.value for c in Coverage]},
                    },
                },
                "gap_note": {"type": "object", "additionalProperties": _STR},
            },
        },
        "applicability": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["stage_label", "typical_threats", "slsa_applies", "stride_required"],
                "additionalProperties": False,
                "properties": {
                    "stage_label": _NONEMPTY,
                    "typical_threats": _STR,
                    "slsa_applies": {
                        "type": "object",
                        "required": ["kind"],
                        "additionalProperties": False,
                        "properties": {"kind": {"enum": ["no", "partial", "yes"]}, "levels": _LEVELS},
                    },
                    "stride_required": {"type": "boolean"},
                },
            },
        },
        "aspects": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["aspect", "slsa_coverage", "gap"],
                "additionalProperties": False,
                "properties": {"aspect": _NONEMPTY, "slsa_coverage": _STR, "gap": _STR},
            },
        },
        "toolchain": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["threat_id", "objective", "tools_text", "stages"],
                "additionalProperties": False,
                "properties": {
                    "threat_id": {"type": "string", "pattern": r"^T\d+$"},
                    "objective": _NONEMPTY,
                    "tools_text": _NONEMPTY,
                    "stages": {"type": "array", "minItems": 1, "items": {"enum": _STAGE_NAMES}},
                },
            },
        },
        "incidents": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["stride", "incident_name", "year", "summary"],
                "additionalProperties": False,
                "properties": {
                    "stride": {"enum": [c.value for c in StrideCategory]},
                    "incident_name": _NONEMPTY,
                    "year": {"type": "integer"},
                    "summary": _STR,
                },
            },
        },
        "heuristics": {
            "type": "object",
            "required": ["version", "rules"],
            "additionalProperties": False,
            "properties": {
                "version": _STR,
                "rules": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "kind", "pattern", "suggests", "confidence"],
                        "additionalProperties": False,
                        "properties": {
                            "id": _NONEMPTY,
                            "kind": {
                                "enum": [
                                    "secret_value", "secret_assignment", "unpinned_action",
                                    "unpinned_image", "command", "auto_deploy",
                                ]
                            },
                            "pattern": _STR,
                            "suggests": {
                                "type": "object",
                                "required": ["threat_id", "stage"],
                                "additionalProperties": False,
                                "properties": {
                                    "threat_id": _STR,
                                    "stage": {"enum": [s.value for s in CANONICAL_STAGES]},
                                },
                            },
                            "confidence": {"enum": [c.value for c in Confidence]},
                            "description": _STR,
                        },
                    },
                },
            },
        },
    },
}


def _schema_diagnostics(document: Any) -> list[Diagnostic]:
    validator = jsonschema.Draft202012Validator(CATALOG_SCHEMA)
    diags = []
    for e in validator.iter_errors(document):
        diags.append(Diagnostic(Severity.ERROR, "schema", pointer(*e.absolute_path), e.message))
    diags.sort(key=lambda d: (d.path, d.message))
    return diags


# -- loading ----------------------------------------------------------------

def load_catalog(document: Any) -> Catalog:
    """Validate a catalog document tree and build a :class:`Catalog`.

    Raises :class:`CatalogError` carrying every error found. Warnings and
    informational notes (such as deduplicated SSDF ids) are kept on
    ``Catalog.diagnostics``.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise CatalogError(
                [Diagnostic(Severity.ERROR, "syntax", "", f"line {exc.lineno} column {exc.colno}: {exc.msg}")]
            ) from None
    diags = _schema_diagnostics(document)
    if diags:
        raise CatalogError(diags)

    notes: list[Diagnostic] = []
    errors: list[Diagnostic] = []

    def err(code: str, path: str, msg: str) -> None:
        errors.append(Diagnostic(Severity.ERROR, code, path, msg))

    assets = tuple(AssetRef(a["id"], a["description"]) for a in document["assets"])
    agents = tuple(ThreatAgentRef(a["id"], a["name"], a.get("description", "")) for a in document["agents"])
    for name, items in (("assets", assets), ("agents", agents)):
        seen: set[str] = set()
        for i, item in enumerate(items):
            if item.id in seen:
                err("duplicate-id", pointer(name, i, "id"), f"duplicate id {item.id!r}")
            seen.add(item.id)
    asset_ids = {a.id for a in assets}
    agent_ids = {a.id for a in agents}

    control_docs: dict[str, tuple[int, dict]] = {}
    for i, c in enumerate(document["controls"]):
        if c["id"] in control_docs:
            err("duplicate-id", pointer("controls", i, "id"), f"duplicate control id {c['id']!r}")
            continue
        control_docs[c["id"]] = (i, c)

    entries: list[ThreatCatalogEntry] = []
    seen_keys: set[ThreatKey] = set()
    referenced: dict[str, list[ThreatKey]] = {}
    for i, e in enumerate(document["entries"]):
        base = ("entries", i)
        key = ThreatKey(e["threat_id"], PipelineStage(e["stage"]))
        if key in seen_keys:
            err("duplicate-key", pointer(*base), f"duplicate entry key {key}")
        seen_keys.add(key)
        try:
            stride = parse_stride_flags(e["stride"])
        except ValueError as exc:
            err("stride", pointer(*base, "stride"), str(exc))
            stride = frozenset()
        else:
            if not stride:
                err("empty-stride", pointer(*base, "stride"), "every entry needs at least one STRIDE flag")
        for j, a in enumerate(e["assets"]):
            if a not in asset_ids:
                err("dangling-asset", pointer(*base, "assets", j), f"unknown asset id {a!r}")
        for j, a in enumerate(e["agents"]):
            if a not in agent_ids:
                err("dangling-agent", pointer(*base, "agents", j), f"unknown agent id {a!r}")
        for a in e.get("agent_notes", {}):
            if a not in e["agents"]:
                err("dangling-agent", pointer(*base, "agent_notes", a), f"note for agent {a!r} not listed on entry")
        for j, c in enumerate(e["controls"]):
            if c not in control_docs:
                err("dangling-control", pointer(*base, "controls", j), f"unknown control id {c!r}")
            else:
                referenced.setdefault(c, []).append(key)
        owasp = []
        for j, o in enumerate(e["owasp"]):
            code, name = (o, None) if isinstance(o, str) else (o["code"], o.get("name"))
            try:
                owasp.append(OwaspCategory(code, name))
            except ValueError as exc:
                err("owasp", pointer(*base, "owasp", j), str(exc))
        ssdf: list[SsdfPracticeId] = []
        for j, s in enumerate(e["ssdf"]):
            try:
                pid = SsdfPracticeId(s)
            except ValueError as exc:
                err("ssdf", pointer(*base, "ssdf", j), str(exc))
                continue
            if pid in ssdf:
                notes.append(
                    Diagnostic(Severity.INFO, "duplicate-ssdf", pointer(*base, "ssdf", j), f"duplicate SSDF id {s} dropped")
                )
                continue
            ssdf.append(pid)
        entries.append(
            ThreatCatalogEntry(
                key=key,
                assets=tuple(e["assets"]),
                agents=tuple(e["agents"]),
                stride=stride,
                description=e["description"],
                owasp=tuple(owasp),
                controls=tuple(e["controls"]),
                slsa_levels=frozenset(SlsaLevel.parse(x) for x in e["slsa_levels"]),
                ssdf=tuple(ssdf),
                agent_notes=tuple(sorted(e.get("agent_notes", {}).items())),
            )
        )

    controls = []
    for cid, (i, c) in control_docs.items():
        if cid not in referenced:
            err("unreferenced-control", pointer("controls", i), f"control {cid!r} is not used by any entry")
        controls.append(
            ControlDescriptor(
                id=cid,
                text=c["text"],
                control_type=ControlType(c["control_type"]),
                source_threats=tuple(referenced.get(cid, ())),
                classification=c.get("classification", "editorial"),
            )
        )

    coverage = _load_coverage(document["coverage"], err, notes)

    applicability = []
    for i, row in enumerate(document["applicability"]):
        sa = row["slsa_applies"]
        applicability.append(
            StageApplicability(
                stage_label=row["stage_label"],
                typical_threats=row["typical_threats"],
                slsa_applies=SlsaApplies(sa["kind"], tuple(SlsaLevel.parse(x) for x in sa.get("levels", []))),
                stride_required=row["stride_required"],
            )
        )
    labels = tuple(r.stage_label for r in applicability)
    if labels != APPLICABILITY_LABELS:
        err("applicability-rows", "/applicability", f"expected rows {list(APPLICABILITY_LABELS)}, got {list(labels)}")

    toolchain = tuple(
        ToolchainEntry(t["threat_id"], t["objective"], t["tools_text"], tuple(PipelineStage(s) for s in t["stages"]))
        for t in document["toolchain"]
    )
    tool_ids = {t.threat_id for t in toolchain}
    for tid in sorted({e.threat_id for e in entries} - tool_ids, key=lambda t: int(t[1:])):
        err("toolchain-gap", "/toolchain", f"threat {tid} has no toolchain entry")

    incidents = tuple(
        IncidentAnnotation(StrideCategory(x["stride"]), x["incident_name"], x["year"], x["summary"])
        for x in document["incidents"]
    )

    heuristics: list[Heuristic] = []
    hdoc = document.get("heuristics") or {"version": "", "rules": []}
    for i, h in enumerate(hdoc["rules"]):
        key = ThreatKey(h["suggests"]["threat_id"], PipelineStage(h["suggests"]["stage"]))
        if key not in seen_keys:
            err("dangling-threat", pointer("heuristics", "rules", i, "suggests"), f"heuristic suggests unknown threat {key}")
        try:
            re.compile(h["pattern"])
        except re.error as exc:
            err("pattern", pointer("heuristics", "rules", i, "pattern"), f"bad regex: {exc}")
        heuristics.append(
            Heuristic(h["id"], h["kind"], h["pattern"], key, Confidence(h["confidence"]), h.get("description", ""))
        )

    if errors:
        raise CatalogError(errors)
    return Catalog(
        version=document["version"],
        assets=assets,
        agents=agents,
        controls=tuple(controls),
        entries=tuple(entries),
        coverage=coverage,
        applicability=tuple(applicability),
        aspects=tuple(AspectGap(a["aspect"], a["slsa_coverage"], a["gap"]) for a in document["aspects"]),
        toolchain=toolchain,
        incidents=incidents,
        heuristics=tuple(heuristics),
        heuristics_version=hdoc["version"],
        diagnostics=tuple(notes),
    )


def _load_coverage(doc: dict, err, notes: list[Diagnostic]) -> SlsaStrideCoverage:
    matrix: dict[tuple[StrideCategory, SlsaLevel], Coverage] = {}
    for name in doc["matrix"]:
        if name not in StrideCategory._value2member_map_:
            err("coverage", pointer("coverage", "matrix", name), f"unknown STRIDE category {name!r}")
    for cat in StrideCategory:
        row = doc["matrix"].get(cat.value, {})
        for lv in SLSA_LEVELS:
            cell = row.get(lv.name)
            if cell is None:
                err("missing-cell", pointer("coverage", "matrix", cat.value, lv.name), f"coverage cell ({cat}, {lv}) missing")
                continue
            matrix[(cat, lv)] = Coverage(cell)
        ranks = [matrix[(cat, lv)].rank for lv in SLSA_LEVELS if (cat, lv) in matrix]
        for a, b, lv in zip(ranks, ranks[1:], SLSA_LEVELS[1:]):
            if b < a:
                # Spoofing is Full at L3 but Partial at L4 in the source matrix; keep it verbatim.
                notes.append(
                    Diagnostic(
                        Severity.WARNING,
                        "non-monotone-coverage",
                        pointer("coverage", "matrix", cat.value, lv.name),
                        f"coverage for {cat} drops at {lv}",
                    )
                )
    gap_note = {}
    for cat in StrideCategory:
        if cat.value in doc["gap_note"]:
            gap_note[cat] = doc["gap_note"][cat.value]
    return SlsaStrideCoverage(matrix=matrix, gap_note=gap_note)


def export_catalog(catalog: Catalog) -> dict:
    """Document tree for *catalog*; ``load_catalog`` of it gives an equal catalog."""
    entries = []
    for e in catalog.entries:
        d: dict[str, Any] = {
            "threat_id": e.threat_id,
            "stage": e.stage.value,
            "assets": list(e.assets),
            "agents": list(e.agents),
            "stride": format_stride_flags(e.stride),
            "description": e.description,
            "owasp": [o.code if o.name is None else {"code": o.code, "name": o.name} for o in e.owasp],
            "controls": list(e.controls),
            "slsa_levels": [lv.name for lv in sorted(e.slsa_levels)],
            "ssdf": [s.code for s in e.ssdf],
        }
        if e.agent_notes:
            d["agent_notes"] = dict(e.agent_notes)
        entries.append(d)
    doc: dict[str, Any] = {
        "version": catalog.version,
        "assets": [{"id": a.id, "description": a.description} for a in catalog.assets],
        "agents": [{"id": a.id, "name": a.name, "description": a.description} for a in catalog.agents],
        "controls": [
            {"id": c.id, "text": c.text, "control_type": c.control_type.value, "classification": c.classification}
            for c in catalog.controls
        ],
        "entries": entries,
        "coverage": {
            "matrix": {
                cat.value: {lv.name: catalog.coverage.matrix[(cat, lv)].value for lv in SLSA_LEVELS}
                for cat in StrideCategory
            },
            "gap_note": {cat.value: note for cat, note in catalog.coverage.gap_note.items()},
        },
        "applicability": [
            {
                "stage_label": r.stage_label,
                "typical_threats": r.typical_threats,
                "slsa_applies": {"kind": r.slsa_applies.kind, "levels": [lv.name for lv in r.slsa_applies.levels]},
                "stride_required": r.stride_required,
            }
            for r in catalog.applicability
        ],
        "aspects": [{"aspect": a.aspect, "slsa_coverage": a.slsa_coverage, "gap": a.gap} for a in catalog.aspects],
        "toolchain": [
            {"threat_id": t.threat_id, "objective": t.objective, "tools_text": t.tools_text,
             "stages": [s.value for s in t.stages]}
            for t in catalog.toolchain
        ],
        "incidents": [
            {"stride": i.stride.value, "incident_name": i.incident_name, "year": i.year, "summary": i.summary}
            for i in catalog.incidents
        ],
    }
    if catalog.heuristics or catalog.heuristics_version:
        doc["heuristics"] = {
            "version": catalog.heuristics_version,
            "rules": [
                {
                    "id": h.id,
                    "kind": h.kind,
                    "pattern": h.pattern,
                    "suggests": {"threat_id": h.suggests.threat_id, "stage": h.suggests.stage.value},
                    "confidence": h.confidence.value,
                    "description": h.description,
                }
                for h in catalog.heuristics
            ],
        }
    return doc


def builtin_catalog_document() -> dict:
    text = resources.files("pta").joinpath("data/catalog.json").read_text(encoding="utf-8")
    return json.loads(text)


@lru_cache(maxsize=1)
def builtin_catalog() -> Catalog:
    return load_catalog(builtin_catalog_document())


# -- queries ----------------------------------------------------------------

def threats_for(stage: PipelineStage, catalog: Catalog) -> list[ThreatCatalogEntry]:
    return [e for e in catalog.entries if e.stage == stage]


def controls_for_threat(key: ThreatKey, catalog: Catalog) -> list[ControlDescriptor]:
    entry = catalog.entry(key)
    index = catalog.control_index
    return [index[c] for c in entry.controls]


def toolchain_for(threat_id: str, catalog: Catalog) -> list[ToolchainEntry]:
    return [t for t in catalog.toolchain if t.threat_id == threat_id]
