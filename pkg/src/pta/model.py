"""Shared vocabulary: STRIDE, SLSA, SSDF, OWASP, stages, assets, agents, controls,
and the :class:`PipelineModel` that users author.

Every value here is immutable once constructed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Any, Iterable, NamedTuple

STRIDE_ORDER = "STRIDE"


class StrideCategory(str, Enum):
    SPOOFING = "Spoofing"
    TAMPERING = "Tampering"
    REPUDIATION = "Repudiation"
    INFORMATION_DISCLOSURE = "InformationDisclosure"
    DENIAL_OF_SERVICE = "DenialOfService"
    ELEVATION_OF_PRIVILEGE = "ElevationOfPrivilege"

    def __str__(self) -> str:
        return self.value

    @property
    def letter(self) -> str:
        return STRIDE_ORDER[self.index]

    @property
    def index(self) -> int:
        return list(StrideCategory).index(self)

    @classmethod
    def parse(cls, text: str) -> "StrideCategory":
        """Accept the symbolic value, the enum name, or the single letter."""
        t = text.strip()
        for cat in cls:
            if t in (cat.value, cat.name) or t.upper() == cat.letter and len(t) == 1:
                return cat
        raise ValueError(f"unknown STRIDE category {text!r}")


class SlsaLevel(IntEnum):
    L0 = 0
    L1 = 1
    L2 = 2
    L3 = 3
    L4 = 4

    def __str__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, text: str) -> "SlsaLevel":
        t = text.strip().upper()
        if t in cls.__members__:
            return cls[t]
        raise ValueError(f"unknown SLSA level {text!r}")


class SlsaCapability(str, Enum):
    SCRIPTED_BUILD = "scripted_build"
    HOSTED_BUILD_PROVENANCE = "hosted_build_provenance"
    HARDENED_BUILD_VERIFIABLE_PROVENANCE = "hardened_build_verifiable_provenance"
    HERMETIC_REPRODUCIBLE = "hermetic_reproducible"

    def __str__(self) -> str:
        return self.value

    @property
    def level(self) -> SlsaLevel:
        return SlsaLevel(list(SlsaCapability).index(self) + 1)


class PipelineStage(str, Enum):
    SOURCE = "source"
    BUILD = "build"
    DEPLOYMENT = "deployment"
    MONITORING = "monitoring"
    # extended stages, toolchain entries only
    ARTIFACT_STORAGE = "artifact_storage"
    RUNTIME = "runtime"
    ACCESS_CONTROL = "access_control"

    def __str__(self) -> str:
        return self.value

    @property
    def canonical(self) -> bool:
        return self in CANONICAL_STAGES

    @property
    def display(self) -> str:
        return self.value.replace("_", " ").title()

    @property
    def order(self) -> int:
        return list(PipelineStage).index(self)

    @classmethod
    def parse(cls, text: str) -> "PipelineStage":
        t = text.strip().lower().replace(" ", "_").replace("-", "_")
        for stage in cls:
            if t == stage.value:
                return stage
        raise ValueError(f"unknown pipeline stage {text!r}")


CANONICAL_STAGES = (
    PipelineStage.SOURCE,
    PipelineStage.BUILD,
    PipelineStage.DEPLOYMENT,
    PipelineStage.MONITORING,
)

_SSDF_RE = re.compile(r"^(PO|PS|PW|RV)\.\d(\.\d)?$")
_OWASP_RE = re.compile(r"^A(0[1-9]|10)$")


@dataclass(frozen=True, order=True)
class SsdfPracticeId:
    code: str

    def __post_init__(self) -> None:
        if not _SSDF_RE.match(self.code):
            raise ValueError(f"invalid SSDF practice id {self.code!r}")

    @property
    def group(self) -> str:
        return self.code[:2]

    def __str__(self) -> str:
        return self.code


@dataclass(frozen=True)
class OwaspCategory:
    code: str
    name: str | None = None

    def __post_init__(self) -> None:
        if not _OWASP_RE.match(self.code):
            raise ValueError(f"invalid OWASP category {self.code!r} (expected A01..A10)")

    def __str__(self) -> str:
        return f"{self.code} - {self.name}" if self.name else self.code


class ControlType(str, Enum):
    PREVENTIVE = "preventive"
    DETECTIVE = "detective"
    CORRECTIVE = "corrective"


class ThreatKey(NamedTuple):
    threat_id: str
    stage: PipelineStage

    def __str__(self) -> str:
        return f"({self.threat_id}, {self.stage.display})"

    @property
    def number(self) -> int:
        return int(self.threat_id[1:]) if self.threat_id[1:].isdigit() else 10**6

    def sort_key(self) -> tuple[int, int, str]:
        return (self.stage.order, self.number, self.threat_id)


@dataclass(frozen=True)
class AssetRef:
    id: str
    description: str


@dataclass(frozen=True)
class ThreatAgentRef:
    id: str
    name: str
    description: str = ""


@dataclass(frozen=True)
class ControlDescriptor:
    id: str
    text: str
    control_type: ControlType
    source_threats: tuple[ThreatKey, ...] = ()
    classification: str = "editorial"


@dataclass(frozen=True)
class DataFlow:
    source: str
    target: str
    label: str = ""
    crosses_boundary: bool = False


@dataclass(frozen=True)
class TrustBoundary:
    name: str
    members: frozenset[str]
    nested: bool = False


@dataclass(frozen=True)
class PipelineModel:
    name: str
    stages: frozenset[PipelineStage]
    assets: frozenset[str] = frozenset()
    agents: frozenset[str] = frozenset()
    controls: frozenset[str] = frozenset()
    slsa_capabilities: frozenset[SlsaCapability] = frozenset()
    flows: tuple[DataFlow, ...] = ()
    boundaries: tuple[TrustBoundary, ...] = ()
    custom_assets: tuple[AssetRef, ...] = ()
    custom_agents: tuple[ThreatAgentRef, ...] = ()


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value}: {self.path or '/'}: {self.message} [{self.code}]"


class ValidationError(Exception):
    """Raised with every error-level diagnostic found in one document."""

    def __init__(self, diagnostics: Iterable[Diagnostic], what: str = "document"):
        self.diagnostics = list(diagnostics)
        lines = "\n".join(f"  {d}" for d in self.diagnostics)
        super().__init__(f"invalid {what}:\n{lines}")


def pointer(*parts: Any) -> str:
    """JSON-pointer for a path given as raw segments."""
    out = ""
    for p in parts:
        out += "/" + str(p).replace("~", "~0").replace("/", "~1")
    return out


def natural_key(ident: str) -> tuple[str, int, str]:
    m = re.match(r"^([A-Za-z]+)(\d+)$", ident)
    if m:
        return (m.group(1), int(m.group(2)), "")
    return (ident, -1, ident)


def parse_stride_flags(text: str) -> frozenset[StrideCategory]:
    if len(text) != 6:
        raise ValueError(f"STRIDE checklist must be 6 characters, got {len(text)} in {text!r}")
    cats = list(StrideCategory)
    found = set()
    for pos, ch in enumerate(text):
        if ch == "Y":
            found.add(cats[pos])
        elif ch != "N":
            raise ValueError(
                f"STRIDE checklist {text!r}: position {pos} ({STRIDE_ORDER[pos]}) "
                f"must be 'Y' or 'N', got {ch!r}"
            )
    return frozenset(found)


def format_stride_flags(cats: Iterable[StrideCategory]) -> str:
    present = set(cats)
    return "".join("Y" if c in present else "N" for c in StrideCategory)


def slsa_level_from_capabilities(caps: Iterable[SlsaCapability]) -> SlsaLevel:
    """Highest level whose capabilities, and all below it, are present."""
    present = set(caps)
    level = SlsaLevel.L0
    for cap in SlsaCapability:
        if cap not in present:
            break
        level = cap.level
    return level


def capabilities_contiguous(caps: Iterable[SlsaCapability]) -> bool:
    present = set(caps)
    return len(present) == slsa_level_from_capabilities(present)


# -- model validation -------------------------------------------------------

BUILTIN_ASSET_RE = re.compile(r"^AS\d+$")
BUILTIN_AGENT_RE = re.compile(r"^TA\d+$")
CUSTOM_ASSET_PREFIX = "ASX-"
CUSTOM_AGENT_PREFIX = "TAX-"


def validate_model(model: PipelineModel, catalog: Any, *, partial: bool = False) -> list[Diagnostic]:
    """Check *model* against the catalog's asset, agent and control registries.

    Paths are JSON pointers into the model document. The result is ordered
    by document position so identical inputs give identical output.
    """
    diags: list[Diagnostic] = []

    def err(code: str, path: str, msg: str) -> None:
        diags.append(Diagnostic(Severity.ERROR, code, path, msg))

    if not model.stages and not partial:
        err("empty-stages", "/stages", "at least one stage is required")
    for stage in sorted(model.stages, key=lambda s: s.order):
        if not stage.canonical:
            err("non-canonical-stage", "/stages", f"stage {stage.value!r} is not allowed in models")

    custom_assets = {a.id for a in model.custom_assets}
    for ident in sorted(model.assets, key=natural_key):
        if ident in catalog.asset_index:
            continue
        if ident.startswith(CUSTOM_ASSET_PREFIX) and ident in custom_assets:
            continue
        hint = ""
        if BUILTIN_ASSET_RE.match(ident):
            hint = f" (built-in assets are {_id_range(catalog.asset_index)})"
        elif ident.startswith(CUSTOM_ASSET_PREFIX):
            hint = " (custom assets need an {id, description} declaration)"
        else:
            hint = f" (custom assets must use the {CUSTOM_ASSET_PREFIX!r} prefix)"
        err("unresolved-asset", "/assets", f"unknown asset id {ident!r}{hint}")

    custom_agents = {a.id for a in model.custom_agents}
    for ident in sorted(model.agents, key=natural_key):
        if ident in catalog.agent_index:
            continue
        if ident.startswith(CUSTOM_AGENT_PREFIX) and ident in custom_agents:
            continue
        hint = ""
        if BUILTIN_AGENT_RE.match(ident):
            hint = f" (built-in agents are {_id_range(catalog.agent_index)})"
        elif not ident.startswith(CUSTOM_AGENT_PREFIX):
            hint = f" (custom agents must use the {CUSTOM_AGENT_PREFIX!r} prefix)"
        err("unresolved-agent", "/agents", f"unknown agent id {ident!r}{hint}")

    for ident in sorted(model.controls):
        if ident not in catalog.control_index:
            err("unresolved-control", "/controls", f"unknown control id {ident!r}")

    if model.slsa_capabilities and not capabilities_contiguous(model.slsa_capabilities):
        level = slsa_level_from_capabilities(model.slsa_capabilities)
        diags.append(
            Diagnostic(
                Severity.WARNING,
                "non-contiguous-capabilities",
                "/slsa_capabilities",
                f"capabilities skip a level; attained level is {level}",
            )
        )

    for i, flow in enumerate(model.flows):
        if flow.source == flow.target:
            err("self-flow", pointer("flows", i), f"flow from {flow.source!r} to itself")

    for i, a in enumerate(model.boundaries):
        for j in range(i + 1, len(model.boundaries)):
            b = model.boundaries[j]
            shared = a.members & b.members
            if shared and not (a.nested or b.nested):
                err(
                    "boundary-overlap",
                    pointer("boundaries", j, "members"),
                    f"boundaries {a.name!r} and {b.name!r} share {sorted(shared)} "
                    "but neither is marked nested",
                )
    return diags


def _id_range(index: dict) -> str:
    ids = sorted(index, key=natural_key)
    return f"{ids[0]}..{ids[-1]}" if ids else "none"


# -- document form ----------------------------------------------------------

def model_to_document(model: PipelineModel) -> dict:
    """Canonical document tree for *model*; parses back to an equal model."""
    custom_a = {a.id: a for a in model.custom_assets}
    custom_t = {a.id: a for a in model.custom_agents}
    assets: list[Any] = []
    for ident in sorted(model.assets, key=natural_key):
        if ident in custom_a:
            assets.append({"id": ident, "description": custom_a[ident].description})
        else:
            assets.append(ident)
    agents: list[Any] = []
    for ident in sorted(model.agents, key=natural_key):
        if ident in custom_t:
            a = custom_t[ident]
            agents.append({"id": ident, "name": a.name, "description": a.description})
        else:
            agents.append(ident)
    doc = {
        "name": model.name,
        "stages": [s.value for s in sorted(model.stages, key=lambda s: s.order)],
        "assets": assets,
        "agents": agents,
        "controls": sorted(model.controls),
        "slsa_capabilities": [c.value for c in SlsaCapability if c in model.slsa_capabilities],
        "flows": [
            {"from": f.source, "to": f.target, "label": f.label, "crosses_boundary": f.crosses_boundary}
            for f in model.flows
        ],
        "boundaries": [
            {"name": b.name, "members": sorted(b.members), **({"nested": True} if b.nested else {})}
            for b in model.boundaries
        ],
    }
    return doc


__all__ = [
    "AssetRef",
    "CANONICAL_STAGES",
    "ControlDescriptor",
    "ControlType",
    "DataFlow",
    "Diagnostic",
    "OwaspCategory",
    "PipelineModel",
    "PipelineStage",
    "Severity",
    "SlsaCapability",
    "SlsaLevel",
    "SsdfPracticeId",
    "StrideCategory",
    "ThreatAgentRef",
    "ThreatKey",
    "TrustBoundary",
    "ValidationError",
    "capabilities_contiguous",
    "format_stride_flags",
    "model_to_document",
    "natural_key",
    "parse_stride_flags",
    "slsa_level_from_capabilities",
    "validate_model",
]
