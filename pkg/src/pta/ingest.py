"""Reading pipeline-model documents and importing CI workflow files.

Documents may be JSON or YAML; both are normalised to the same tree before
validation so diagnostics never depend on the surface syntax.
"""

from __future__ import annotations

import difflib
import json
import re
from dataclasses import dataclass
from typing import Any, Iterator

import jsonschema
import yaml

from pta.catalog import Catalog, Confidence, Heuristic, builtin_catalog
from pta.model import (
    CANONICAL_STAGES,
    AssetRef,
    DataFlow,
    Diagnostic,
    PipelineModel,
    PipelineStage,
    Severity,
    SlsaCapability,
    ThreatAgentRef,
    ThreatKey,
    TrustBoundary,
    ValidationError,
    pointer,
    validate_model,
)

MODEL_KEYS = ("name", "stages", "assets", "agents", "controls", "slsa_capabilities", "flows", "boundaries")


class DocumentSyntaxError(ValidationError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f"line {line} column {column}: " if line is not None else ""
        super().__init__([Diagnostic(Severity.ERROR, "syntax", "", where + message)], what="document syntax")


class MergeError(ValidationError):
    def __init__(self, diagnostics):
        super().__init__(diagnostics, what="merge")


def load_document(text: str | bytes, fmt: str | None = None) -> Any:
    """Parse JSON or YAML text into a plain tree.

    *fmt* may be ``"json"`` or ``"yaml"``; when omitted, text that starts
    with ``{`` or ``[`` is read as JSON and anything else as YAML.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DocumentSyntaxError(f"not UTF-8 text ({exc.reason} at byte {exc.start})") from None
    if "\x00" in text:
        raise DocumentSyntaxError("binary content (NUL byte)")
    stripped = text.lstrip()
    if fmt == "json" or (fmt is None and stripped[:1] in ("{", "[")):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise DocumentSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    try:
        return yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        msg = exc.problem or str(exc)
        if mark is None:
            raise DocumentSyntaxError(msg) from None
        raise DocumentSyntaxError(msg, mark.line + 1, mark.column + 1) from None
    except yaml.YAMLError as exc:
        raise DocumentSyntaxError(str(exc)) from None


# -- pipeline model documents ------------------------------------------------

_ID_OBJ_ASSET = {
    "type": "object",
    "required": ["id", "description"],
    "additionalProperties": False,
    "properties": {"id": {"type": "string"}, "description": {"type": "string"}},
}
_ID_OBJ_AGENT = {
    "type": "object",
    "required": ["id", "name"],
    "additionalProperties": False,
    "properties": {"id": {"type": "string"}, "name": {"type": "string"}, "description": {"type": "string"}},
}
_STRINGS = {"type": "array", "items": {"type": "string"}}

MODEL_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "stages"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "stages": _STRINGS,
        "assets": {"type": "array", "items": {"anyOf": [{"type": "string"}, _ID_OBJ_ASSET]}},
        "agents": {"type": "array", "items": {"anyOf": [{"type": "string"}, _ID_OBJ_AGENT]}},
        "controls": _STRINGS,
        "slsa_capabilities": _STRINGS,
        "flows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["from", "to"],
                "additionalProperties": False,
                "properties": {
                    "from": {"type": "string", "minLength": 1},
                    "to": {"type": "string", "minLength": 1},
                    "label": {"type": "string"},
                    "crosses_boundary": {"type": "boolean"},
                },
            },
        },
        "boundaries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "members"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "members": _STRINGS,
                    "nested": {"type": "boolean"},
                },
            },
        },
    },
}
PARTIAL_SCHEMA = {**MODEL_SCHEMA, "required": []}


def _schema_errors(tree: Any, schema: dict) -> list[Diagnostic]:
    validator = jsonschema.Draft202012Validator(schema)
    out = []
    for e in validator.iter_errors(tree):
        msg = e.message
        if e.validator == "additionalProperties" and not e.absolute_path:
            msg = "unknown top-level key(s): " + msg.split("(")[-1].rstrip(")")
        out.append(Diagnostic(Severity.ERROR, "schema", pointer(*e.absolute_path), msg))
    out.sort(key=lambda d: (d.path, d.message))
    return out


def _suggest(word: str, choices: list[str]) -> str:
    near = difflib.get_close_matches(word.lower(), choices, n=1, cutoff=0.5)
    return f"; did you mean {near[0]!r}?" if near else ""


def _build_model(tree: dict) -> tuple[PipelineModel, list[Diagnostic]]:
    diags: list[Diagnostic] = []

    def err(code: str, path: str, msg: str) -> None:
        diags.append(Diagnostic(Severity.ERROR, code, path, msg))

    stage_names = [s.value for s in CANONICAL_STAGES]
    stages = set()
    for i, s in enumerate(tree.get("stages", [])):
        if s in stage_names:
            stages.add(PipelineStage(s))
        else:
            err("unknown-stage", pointer("stages", i), f"unknown stage {s!r}{_suggest(s, stage_names)}")

    assets, custom_assets = _collect_ids(tree.get("assets", []), "assets", err, agent=False)
    agents, custom_agents = _collect_ids(tree.get("agents", []), "agents", err, agent=True)

    caps = set()
    cap_names = [c.value for c in SlsaCapability]
    for i, c in enumerate(tree.get("slsa_capabilities", [])):
        if c in cap_names:
            caps.add(SlsaCapability(c))
        else:
            err("unknown-capability", pointer("slsa_capabilities", i), f"unknown SLSA capability {c!r}{_suggest(c, cap_names)}")

    flows = tuple(
        DataFlow(f["from"], f["to"], f.get("label", ""), bool(f.get("crosses_boundary", False)))
        for f in tree.get("flows", [])
    )
    boundaries = tuple(
        TrustBoundary(b["name"], frozenset(b["members"]), bool(b.get("nested", False)))
        for b in tree.get("boundaries", [])
    )
    model = PipelineModel(
        name=tree.get("name", ""),
        stages=frozenset(stages),
        assets=frozenset(assets),
        agents=frozenset(agents),
        controls=frozenset(tree.get("controls", [])),
        slsa_capabilities=frozenset(caps),
        flows=flows,
        boundaries=boundaries,
        custom_assets=tuple(sorted(custom_assets.values(), key=lambda a: a.id)),
        custom_agents=tuple(sorted(custom_agents.values(), key=lambda a: a.id)),
    )
    return model, diags


def _collect_ids(items: list, key: str, err, *, agent: bool):
    ids: set[str] = set()
    custom: dict[str, Any] = {}
    for i, item in enumerate(items):
        if isinstance(item, str):
            ids.add(item)
            continue
        ref = ThreatAgentRef(item["id"], item["name"], item.get("description", "")) if agent else AssetRef(
            item["id"], item["description"]
        )
        prefix = "TAX-" if agent else "ASX-"
        if not ref.id.startswith(prefix):
            err("custom-prefix", pointer(key, i, "id"), f"custom id {ref.id!r} must start with {prefix!r}")
        elif ref.id in custom and custom[ref.id] != ref:
            err("custom-redefined", pointer(key, i), f"{ref.id!r} declared twice with different content")
        custom[ref.id] = ref
        ids.add(ref.id)
    return ids, custom


def parse_pipeline_model(
    document: Any, catalog: Catalog | None = None, *, warnings: list[Diagnostic] | None = None
) -> PipelineModel:
    """Build a validated :class:`PipelineModel` from text or a document tree.

    Raises :class:`ValidationError` with every error found; warnings (for
    example non-contiguous SLSA capabilities) are appended to *warnings*
    when a list is given.
    """
    catalog = catalog or builtin_catalog()
    tree = load_document(document) if isinstance(document, (str, bytes)) else document
    diags = _schema_errors(tree, MODEL_SCHEMA)
    if diags:
        raise ValidationError(diags, what="pipeline model")
    model, diags = _build_model(tree)
    follow_on = {"empty-stages"} if any(d.code == "unknown-stage" for d in diags) else set()
    diags += [d for d in validate_model(model, catalog) if d.code not in follow_on]
    errors = [d for d in diags if d.severity == Severity.ERROR]
    if errors:
        raise ValidationError(errors, what="pipeline model")
    if warnings is not None:
        warnings.extend(d for d in diags if d.severity != Severity.ERROR)
    return model


def merge_models(base: PipelineModel, overlay: Any, catalog: Catalog | None = None) -> PipelineModel:
    """Union *overlay* (a possibly partial model document) into *base*."""
    catalog = catalog or builtin_catalog()
    tree = load_document(overlay) if isinstance(overlay, (str, bytes)) else (overlay or {})
    diags = _schema_errors(tree, PARTIAL_SCHEMA)
    if diags:
        raise ValidationError(diags, what="overlay")
    over, diags = _build_model(tree)
    diags += validate_model(over, catalog, partial=True)
    errors = [d for d in diags if d.severity == Severity.ERROR]
    if errors:
        raise ValidationError(errors, what="overlay")

    conflicts = []
    for kind, mine, theirs in (
        ("assets", base.custom_assets, over.custom_assets),
        ("agents", base.custom_agents, over.custom_agents),
    ):
        have = {a.id: a for a in mine}
        for ref in theirs:
            if ref.id in have and have[ref.id] != ref:
                conflicts.append(
                    Diagnostic(Severity.ERROR, "custom-redefined", f"/{kind}", f"overlay redefines {ref.id!r} differently")
                )
    if conflicts:
        raise MergeError(conflicts)

    def union_refs(a, b):
        out = {r.id: r for r in a}
        out.update({r.id: r for r in b})
        return tuple(sorted(out.values(), key=lambda r: r.id))

    return PipelineModel(
        name=base.name,
        stages=base.stages | over.stages,
        assets=base.assets | over.assets,
        agents=base.agents | over.agents,
        controls=base.controls | over.controls,
        slsa_capabilities=base.slsa_capabilities | over.slsa_capabilities,
        flows=base.flows + over.flows,
        boundaries=base.boundaries + over.boundaries,
        custom_assets=union_refs(base.custom_assets, over.custom_assets),
        custom_agents=union_refs(base.custom_agents, over.custom_agents),
    )


# -- CI workflow import ---------------------------------------------------------

@dataclass(frozen=True)
class Location:
    path: str
    file: str | None = None
    line: int | None = None

    def __str__(self) -> str:
        if self.file and self.line:
            return f"{self.file}:{self.line}"
        if self.line:
            return f"line {self.line} ({self.path})"
        return f"{self.file}#{self.path}" if self.file else self.path


@dataclass(frozen=True)
class IndicatorFinding:
    indicator_id: str
    location: Location
    evidence: str
    suggests_threat: ThreatKey
    confidence: Confidence

    def to_dict(self) -> dict:
        return {
            "indicator_id": self.indicator_id,
            "location": {"path": self.location.path, "file": self.location.file, "line": self.location.line},
            "evidence": self.evidence,
            "suggests_threat": {"threat_id": self.suggests_threat.threat_id, "stage": self.suggests_threat.stage.value},
            "confidence": self.confidence.value,
        }


def mask_secret(secret: str) -> str:
    """Keep the first and last two characters, star the rest."""
    if len(secret) <= 4:
        return "*" * len(secret)
    return secret[:2] + "*" * (len(secret) - 4) + secret[-2:]


@dataclass
class _Job:
    name: str
    path: tuple
    label: str
    has_environment: bool
    manual: bool


DIALECTS = ("generic", "github", "gitlab")
_GITLAB_RESERVED = {
    "stages", "variables", "default", "include", "workflow", "image", "services",
    "before_script", "after_script", "cache", "pages",
}
_DEPLOY_WORDS = ("deploy", "release", "publish", "rollout", "promote")
_EXPR_RE = re.compile(r"\$\{\{|^\$[A-Za-z_{]|\$\(")


def _jobs(tree: dict, dialect: str) -> list[_Job]:
    raw: list[tuple[str, tuple, dict]] = []
    if dialect == "gitlab":
        for k, v in tree.items():
            if isinstance(k, str) and k not in _GITLAB_RESERVED and not k.startswith(".") and isinstance(v, dict):
                if "script" in v or "trigger" in v:
                    raw.append((k, (k,), v))
    else:
        jobs = tree.get("jobs")
        if isinstance(jobs, dict):
            raw = [(str(k), ("jobs", k), v) for k, v in jobs.items() if isinstance(v, dict)]
        elif isinstance(jobs, list):
            raw = [(str(v.get("name", i)), ("jobs", i), v) for i, v in enumerate(jobs) if isinstance(v, dict)]
    out = []
    for name, path, job in raw:
        label = " ".join(str(x) for x in (name, job.get("name", ""), job.get("stage", ""))).lower()
        out.append(
            _Job(
                name=name,
                path=path,
                label=label,
                has_environment="environment" in job,
                manual=job.get("when") == "manual",
            )
        )
    return out


def _walk(node: Any, path: tuple = ()) -> Iterator[tuple[tuple, Any, Any]]:
    """Yield (path, parent_key, value) for every scalar in document order."""
    if isinstance(node, dict):
        for k, v in node.items():
            yield from _walk(v, path + (k,))
    elif isinstance(node, list):
        for i, v in enumerate(node):
            yield from _walk(v, path + (i,))
    else:
        yield path, (path[-1] if path else None), node


def _line_index(text: str | None) -> dict[tuple, int]:
    """Map document paths to 1-based line numbers using the YAML node graph."""
    if not text:
        return {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    index: dict[tuple, int] = {}

    def visit(node, path):
        index[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                visit(v, path + (str(k.value),))
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                visit(v, path + (i,))

    if root is not None:
        visit(root, ())
    return index


def _triggers_on_push(tree: dict) -> bool:
    trig = tree.get("on", tree.get(True, tree.get("trigger")))
    if isinstance(trig, str):
        return trig == "push"
    if isinstance(trig, (list, dict)):
        return "push" in trig
    return False


def import_ci_workflow(
    document: Any,
    catalog: Catalog | None = None,
    *,
    dialect: str = "generic",
    source_text: str | None = None,
    filename: str | None = None,
) -> tuple[dict, list[IndicatorFinding]]:
    """Infer a partial model document and indicator findings from a CI workflow.

    Stages: any job makes the workflow file itself CI configuration (source);
    deploy-labelled jobs add deployment; all other jobs add build.
    The result is advisory and meant for review, not for direct auditing.
    """
    if dialect not in DIALECTS:
        raise ValueError(f"unknown dialect {dialect!r}; choose from {', '.join(DIALECTS)}")
    catalog = catalog or builtin_catalog()
    if isinstance(document, (str, bytes)):
        if source_text is None and isinstance(document, str):
            source_text = document
        document = load_document(document)
    if document is None:
        return {"stages": []}, []
    if not isinstance(document, dict):
        raise DocumentSyntaxError(f"workflow root must be a mapping, got {type(document).__name__}")

    lines = _line_index(source_text)
    jobs = _jobs(document, dialect)
    known = set(catalog.entry_index)
    rules = [h for h in catalog.heuristics if h.suggests in known]
    findings = _scan(document, jobs, rules, lines, filename, dialect)

    if not jobs:
        return {"stages": []}, findings

    stages = {PipelineStage.SOURCE}
    for job in jobs:
        if any(w in job.label for w in _DEPLOY_WORDS):
            stages.add(PipelineStage.DEPLOYMENT)
        else:
            stages.add(PipelineStage.BUILD)
    has_env = any(
        isinstance(k, str) and k in ("env", "variables") for path, _, _ in _walk(document) for k in path
    )
    assets = ["AS2", "AS3"] + (["AS4"] if has_env else [])
    partial = {
        "stages": [s.value for s in CANONICAL_STAGES if s in stages],
        "assets": assets,
        "agents": ["TA1", "TA2"],
    }
    return partial, findings


def _scan(tree: dict, jobs: list[_Job], rules: list[Heuristic], lines: dict, filename: str | None, dialect: str):
    findings: list[IndicatorFinding] = []

    def emit(rule: Heuristic, path: tuple, evidence: str) -> None:
        line = lines.get(tuple(str(p) if not isinstance(p, int) else p for p in path))
        loc = Location(pointer(*path), filename, line)
        findings.append(IndicatorFinding(rule.id, loc, evidence[:160], rule.suggests, rule.confidence))

    by_kind: dict[str, list[Heuristic]] = {}
    for r in rules:
        by_kind.setdefault(r.kind, []).append(r)

    for path, key, value in _walk(tree):
        if not isinstance(value, str):
            continue
        label = str(key) if key is not None else ""
        secret_hit = False
        for rule in by_kind.get("secret_value", []):
            pat = re.compile(rule.pattern)
            matches = list(pat.finditer(value))
            if not matches:
                continue
            secret_hit = True
            redacted = pat.sub(lambda m: mask_secret(m.group(0)), value)
            emit(rule, path, f"{label}: {_one_line(redacted)}")
        if not secret_hit and isinstance(key, str):
            for rule in by_kind.get("secret_assignment", []):
                if (
                    re.search(rule.pattern, key)
                    and len(value) >= 8
                    and not _EXPR_RE.search(value)
                    and " " not in value.strip()
                    and _in_env_block(path)
                ):
                    emit(rule, path, f"{label}: {mask_secret(value)}")
        if key == "uses":
            _check_uses(value, path, by_kind, emit)
        if key in ("image", "container") or (len(path) >= 2 and path[-2] in ("image", "container") and key == "name"):
            _check_image(value, path, by_kind, emit)
        if key in ("run", "script") or (len(path) >= 2 and path[-2] in ("script", "before_script", "after_script")):
            for rule in by_kind.get("command", []):
                m = re.search(rule.pattern, value)
                if m:
                    emit(rule, path, f"{label}: {_one_line(m.group(0))}")

    # GitLab pipelines run on every push unless workflow rules say otherwise
    if _triggers_on_push(tree) or (dialect == "gitlab" and "workflow" not in tree):
        for job in jobs:
            if job.has_environment or job.manual:
                continue
            for rule in by_kind.get("auto_deploy", []):
                if re.search(rule.pattern, job.label):
                    emit(rule, job.path, f"job {job.name!r} runs on push without an environment gate")
    return findings


def _in_env_block(path: tuple) -> bool:
    return any(p in ("env", "variables", "with", "environment") for p in path[:-1] if isinstance(p, str))


def _check_uses(value: str, path, by_kind, emit) -> None:
    if value.startswith("./"):
        return
    if value.startswith("docker://"):
        _check_image(value[len("docker://"):], path, by_kind, emit)
        return
    ref = value.split("@", 1)[1] if "@" in value else ""
    for rule in by_kind.get("unpinned_action", []):
        if not re.search(rule.pattern, ref):
            emit(rule, path, f"uses: {value}")


def _check_image(value: str, path, by_kind, emit) -> None:
    for rule in by_kind.get("unpinned_image", []):
        if not re.search(rule.pattern, value):
            emit(rule, path, f"image: {value}")


def _one_line(text: str) -> str:
    return " ".join(text.split())
