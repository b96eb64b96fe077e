"""Strict JSON readers and writers for the documented file formats.

Parsing is deliberately unforgiving: unknown keys, wrong types, and
out-of-range values are schema errors, so that a typo like "treshold"
cannot silently fall back to a default. parse(serialize(p)) returns an
identical portfolio. JSON Schema documents mirroring these rules ship
under partis/schemas/.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import SchemaError
from .model import (
    Activity,
    Artifact,
    ConstraintKind,
    Dependency,
    DependencyKind,
    Determinism,
    GovernanceLinks,
    Institution,
    Logic,
    Portfolio,
    Process,
    Role,
    Standard,
    Step,
    Task,
    TypedConstraint,
)
from .scoring import (
    BoundaryPolicy,
    ConsensusRule,
    DimensionScores,
    Level,
    ScoringPolicy,
    Thresholds,
    WeightVector,
)
from .tca import Baseline

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# strict extraction helpers
# ---------------------------------------------------------------------------

class _Record:
    """One JSON object being picked apart; leftovers are schema errors."""

    def __init__(self, raw: Any, where: str):
        if not isinstance(raw, dict):
            raise SchemaError(f"{where} must be an object, got {type(raw).__name__}")
        self.raw = dict(raw)
        self.where = where

    def take(self, key: str, kind: type, required: bool = True, default: Any = None) -> Any:
        if key not in self.raw:
            if required:
                raise SchemaError(f"{self.where} is missing required key {key!r}")
            return default
        value = self.raw.pop(key)
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError(f"{self.where}.{key} must be a number")
            return float(value)
        if kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise SchemaError(f"{self.where}.{key} must be an integer")
            return value
        if not isinstance(value, kind):
            raise SchemaError(
                f"{self.where}.{key} must be {kind.__name__}, "
                f"got {type(value).__name__}")
        return value

    def take_str_list(self, key: str, required: bool = True) -> tuple[str, ...] | None:
        value = self.take(key, list, required=required)
        if value is None:
            return None
        for item in value:
            if not isinstance(item, str):
                raise SchemaError(f"{self.where}.{key} must contain only strings")
        return tuple(value)

    def finish(self) -> None:
        if self.raw:
            keys = ", ".join(sorted(self.raw))
            raise SchemaError(f"{self.where} has unknown key(s): {keys}")


def _enum(cls: type, value: str, where: str):
    try:
        return cls(value)
    except ValueError:
        allowed = ", ".join(member.value for member in cls)
        raise SchemaError(
            f"{where} must be one of: {allowed}; got {value!r}") from None


def _load_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


def dump_json(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# portfolio
# ---------------------------------------------------------------------------

def parse_portfolio(doc: Any) -> tuple[Portfolio, list[str]]:
    """Build a Portfolio from a parsed JSON document.

    Returns the portfolio plus parse warnings; currently those flag a
    stated logic.bloom_level that disagrees with the value derived from
    steps (the derived value wins).
    """
    warnings: list[str] = []
    record = _Record(doc, "portfolio")
    version = record.take("schema_version", int)
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported schema_version {version}; this build reads "
            f"version {SCHEMA_VERSION}")

    processes = tuple(
        _parse_process(item, f"processes[{i}]")
        for i, item in enumerate(record.take("processes", list)))
    activities = tuple(
        _parse_activity(item, f"activities[{i}]", warnings)
        for i, item in enumerate(record.take("activities", list)))
    institutions = tuple(
        _parse_institution(item, f"institutions[{i}]")
        for i, item in enumerate(record.take("institutions", list,
                                             required=False, default=[])))
    standards = tuple(
        _parse_standard(item, f"standards[{i}]")
        for i, item in enumerate(record.take("standards", list,
                                             required=False, default=[])))
    links_raw = record.take("links", dict, required=False)
    links = _parse_links(links_raw) if links_raw is not None else GovernanceLinks()
    record.finish()
    return Portfolio(
        processes=processes,
        activities=activities,
        institutions=institutions,
        standards=standards,
        links=links,
    ), warnings


def load_portfolio(path: str | Path) -> tuple[Portfolio, list[str]]:
    return parse_portfolio(_load_json(path))


def _parse_process(raw: Any, where: str) -> Process:
    record = _Record(raw, where)
    process = Process(
        id=record.take("id", str),
        name=record.take("name", str),
        activity_ids=record.take_str_list("activity_ids"),
    )
    record.finish()
    return process


def _parse_activity(raw: Any, where: str, warnings: list[str]) -> Activity:
    record = _Record(raw, where)
    activity = Activity(
        id=record.take("id", str),
        name=record.take("name", str),
        domain=record.take("domain", str, required=False),
        tasks=tuple(
            _parse_task(item, f"{where}.tasks[{i}]", warnings)
            for i, item in enumerate(record.take("tasks", list))),
    )
    record.finish()
    return activity


def _parse_task(raw: Any, where: str, warnings: list[str]) -> Task:
    record = _Record(raw, where)
    task_id = record.take("id", str)
    role_raw = record.take("role", object)
    if isinstance(role_raw, str):
        roles = (_enum(Role, role_raw, f"{where}.role"),)
    elif isinstance(role_raw, list):
        roles = tuple(_enum(Role, item, f"{where}.role") for item in role_raw)
    else:
        raise SchemaError(f"{where}.role must be a string or a list of strings")
    task = Task(
        id=task_id,
        name=record.take("name", str),
        roles=roles,
        inputs=tuple(
            _parse_artifact(item, f"{where}.inputs[{i}]", is_output=False)
            for i, item in enumerate(record.take("inputs", list))),
        logic=_parse_logic(record.take("logic", dict), f"{where}.logic",
                           task_id, warnings),
        outputs=tuple(
            _parse_artifact(item, f"{where}.outputs[{i}]", is_output=True)
            for i, item in enumerate(record.take("outputs", list))),
        constraints=tuple(
            _parse_constraint(item, f"{where}.constraints[{i}]")
            for i, item in enumerate(record.take("constraints", list,
                                                 required=False, default=[]))),
        dependencies=tuple(
            _parse_dependency(item, f"{where}.dependencies[{i}]")
            for i, item in enumerate(record.take("dependencies", list,
                                                 required=False, default=[]))),
    )
    record.finish()
    return task


def _parse_artifact(raw: Any, where: str, is_output: bool) -> Artifact:
    record = _Record(raw, where)
    kwargs: dict[str, Any] = dict(
        id=record.take("id", str),
        name=record.take("name", str),
        format=record.take("format", str),
    )
    encodings = record.take_str_list("encoding_tolerance", required=False)
    if encodings is not None:
        kwargs["encoding_tolerance"] = encodings
    if is_output:
        kwargs["dod"] = record.take_str_list("dod", required=False) or ()
        kwargs["deliverable"] = record.take("deliverable", bool,
                                            required=False, default=False)
    record.finish()
    return Artifact(**kwargs)


def _parse_logic(raw: Any, where: str, task_id: str, warnings: list[str]) -> Logic:
    record = _Record(raw, where)
    steps = tuple(
        _parse_step(item, f"{where}.steps[{i}]")
        for i, item in enumerate(record.take("steps", list)))
    logic = Logic(
        steps=steps,
        tools=record.take_str_list("tools", required=False) or (),
        determinism=_enum(Determinism, record.take("determinism", str),
                          f"{where}.determinism"),
    )
    stated = record.take("bloom_level", int, required=False)
    record.finish()
    if stated is not None and stated != logic.bloom_level:
        warnings.append(
            f"task {task_id}: stated bloom_level {stated} differs from the "
            f"value {logic.bloom_level} derived from steps; using the "
            "derived value")
    return logic


def _parse_step(raw: Any, where: str) -> Step:
    record = _Record(raw, where)
    step = Step(
        description=record.take("description", str),
        bloom_level=record.take("bloom_level", int),
    )
    record.finish()
    return step


def _parse_constraint(raw: Any, where: str) -> TypedConstraint:
    record = _Record(raw, where)
    constraint = TypedConstraint(
        kind=_enum(ConstraintKind, record.take("kind", str), f"{where}.kind"),
        description=record.take("description", str),
        source_standard_id=record.take("source_standard_id", str, required=False),
        source_institution_id=record.take("source_institution_id", str,
                                          required=False),
    )
    record.finish()
    return constraint


def _parse_dependency(raw: Any, where: str) -> Dependency:
    record = _Record(raw, where)
    dependency = Dependency(
        kind=_enum(DependencyKind, record.take("kind", str), f"{where}.kind"),
        from_task_id=record.take("from_task_id", str),
        to_task_id=record.take("to_task_id", str),
    )
    record.finish()
    return dependency


def _parse_institution(raw: Any, where: str) -> Institution:
    record = _Record(raw, where)
    institution = Institution(
        id=record.take("id", str),
        name=record.take("name", str),
        description=record.take("description", str, required=False, default=""),
    )
    record.finish()
    return institution


def _parse_standard(raw: Any, where: str) -> Standard:
    record = _Record(raw, where)
    standard = Standard(
        id=record.take("id", str),
        name=record.take("name", str),
        institution_ids=record.take_str_list("institution_ids"),
        description=record.take("description", str, required=False, default=""),
    )
    record.finish()
    return standard


def _parse_links(raw: Any) -> GovernanceLinks:
    record = _Record(raw, "links")
    t2i = []
    for i, item in enumerate(record.take("task_to_institution", list,
                                         required=False, default=[])):
        entry = _Record(item, f"links.task_to_institution[{i}]")
        t2i.append((entry.take("task_id", str), entry.take("institution_id", str)))
        entry.finish()
    s2p = []
    for i, item in enumerate(record.take("standard_to_process", list,
                                         required=False, default=[])):
        entry = _Record(item, f"links.standard_to_process[{i}]")
        s2p.append((entry.take("standard_id", str), entry.take("process_id", str)))
        entry.finish()
    record.finish()
    return GovernanceLinks(task_to_institution=tuple(t2i),
                           standard_to_process=tuple(s2p))


def serialize_portfolio(portfolio: Portfolio) -> dict:
    doc: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "processes": [
            {"id": p.id, "name": p.name, "activity_ids": list(p.activity_ids)}
            for p in portfolio.processes
        ],
        "activities": [_serialize_activity(a) for a in portfolio.activities],
    }
    if portfolio.institutions:
        doc["institutions"] = [
            _drop_empty({"id": i.id, "name": i.name, "description": i.description})
            for i in portfolio.institutions
        ]
    if portfolio.standards:
        doc["standards"] = [
            _drop_empty({
                "id": s.id,
                "name": s.name,
                "institution_ids": list(s.institution_ids),
                "description": s.description,
            })
            for s in portfolio.standards
        ]
    links = portfolio.links
    if links.task_to_institution or links.standard_to_process:
        link_doc: dict[str, Any] = {}
        if links.task_to_institution:
            link_doc["task_to_institution"] = [
                {"task_id": t, "institution_id": i}
                for t, i in links.task_to_institution
            ]
        if links.standard_to_process:
            link_doc["standard_to_process"] = [
                {"standard_id": s, "process_id": p}
                for s, p in links.standard_to_process
            ]
        doc["links"] = link_doc
    return doc


def _drop_empty(doc: dict) -> dict:
    return {k: v for k, v in doc.items() if v != "" and v is not None}


def _serialize_activity(activity: Activity) -> dict:
    doc: dict[str, Any] = {"id": activity.id, "name": activity.name}
    if activity.domain is not None:
        doc["domain"] = activity.domain
    doc["tasks"] = [_serialize_task(t) for t in activity.tasks]
    return doc


def _serialize_task(task: Task) -> dict:
    doc: dict[str, Any] = {
        "id": task.id,
        "name": task.name,
        "role": task.roles[0].value if len(task.roles) == 1
                else [r.value for r in task.roles],
        "inputs": [_serialize_artifact(a, is_output=False) for a in task.inputs],
        "logic": {
            "steps": [
                {"description": s.description, "bloom_level": s.bloom_level}
                for s in task.logic.steps
            ],
            "tools": list(task.logic.tools),
            "determinism": task.logic.determinism.value,
            "bloom_level": task.logic.bloom_level,
        },
        "outputs": [_serialize_artifact(a, is_output=True) for a in task.outputs],
    }
    if task.constraints:
        doc["constraints"] = [
            _drop_empty({
                "kind": c.kind.value,
                "description": c.description,
                "source_standard_id": c.source_standard_id,
                "source_institution_id": c.source_institution_id,
            })
            for c in task.constraints
        ]
    if task.dependencies:
        doc["dependencies"] = [
            {"kind": d.kind.value, "from_task_id": d.from_task_id,
             "to_task_id": d.to_task_id}
            for d in task.dependencies
        ]
    return doc


def _serialize_artifact(artifact: Artifact, is_output: bool) -> dict:
    doc: dict[str, Any] = {
        "id": artifact.id,
        "name": artifact.name,
        "format": artifact.format,
    }
    if artifact.encoding_tolerance is not None:
        doc["encoding_tolerance"] = list(artifact.encoding_tolerance)
    if is_output:
        doc["dod"] = list(artifact.dod)
        if artifact.deliverable:
            doc["deliverable"] = True
    return doc


# ---------------------------------------------------------------------------
# ratings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatingsFile:
    raters: tuple[str, ...]
    rows: dict[tuple[str, str], DimensionScores]

    def task_ids(self) -> tuple[str, ...]:
        return tuple(sorted({task_id for task_id, _ in self.rows}))


def parse_ratings(doc: Any) -> RatingsFile:
    record = _Record(doc, "ratings")
    raters = record.take_str_list("raters")
    if not raters:
        raise SchemaError("ratings.raters must list at least one rater")
    if len(set(raters)) != len(raters):
        raise SchemaError("ratings.raters contains duplicates")
    rows: dict[tuple[str, str], DimensionScores] = {}
    for i, item in enumerate(record.take("ratings", list)):
        entry = _Record(item, f"ratings.ratings[{i}]")
        task_id = entry.take("task_id", str)
        rater_id = entry.take("rater_id", str)
        scores = DimensionScores(
            d1=entry.take("d1", int),
            d2=entry.take("d2", int),
            d3=entry.take("d3", int),
            d4=entry.take("d4", int),
            d5=entry.take("d5", int),
        )
        entry.finish()
        if rater_id not in raters:
            raise SchemaError(
                f"ratings.ratings[{i}] names undeclared rater {rater_id!r}")
        key = (task_id, rater_id)
        if key in rows:
            raise SchemaError(
                f"duplicate rating for task {task_id!r} by rater {rater_id!r}")
        rows[key] = scores
    record.finish()
    return RatingsFile(raters=raters, rows=rows)


def load_ratings(path: str | Path) -> RatingsFile:
    return parse_ratings(_load_json(path))


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    weights: WeightVector
    thresholds: Thresholds
    policy: ScoringPolicy


DEFAULT_CONFIG = RunConfig(
    weights=WeightVector(),
    thresholds=Thresholds(),
    policy=ScoringPolicy(),
)


def parse_config(doc: Any) -> RunConfig:
    record = _Record(doc, "config")
    weights_raw = record.take("weights", dict, required=False)
    thresholds_raw = record.take("thresholds", dict, required=False)
    policy_raw = record.take("policy", dict, required=False)
    fingerprint = record.take("weight_fingerprint", str, required=False)
    record.finish()

    weights = WeightVector()
    if weights_raw is not None:
        entry = _Record(weights_raw, "config.weights")
        weights = WeightVector(
            w1=entry.take("w1", float),
            w2=entry.take("w2", float),
            w3=entry.take("w3", float),
            w4=entry.take("w4", float),
            w5=entry.take("w5", float),
        )
        entry.finish()

    thresholds = Thresholds()
    if thresholds_raw is not None:
        entry = _Record(thresholds_raw, "config.thresholds")
        thresholds = Thresholds(
            t12=entry.take("t12", float, required=False, default=2.0),
            t23=entry.take("t23", float, required=False, default=3.0),
            t34=entry.take("t34", float, required=False, default=4.0),
            boundary_halfwidth=entry.take("boundary_halfwidth", float,
                                          required=False, default=0.15),
        )
        entry.finish()

    defaults = ScoringPolicy()
    policy_kwargs: dict[str, Any] = {"weight_fingerprint": fingerprint}
    if policy_raw is not None:
        entry = _Record(policy_raw, "config.policy")
        policy_kwargs["floor_enabled"] = entry.take(
            "floor_enabled", bool, required=False,
            default=defaults.floor_enabled)
        policy_kwargs["floor_d4_threshold"] = entry.take(
            "floor_d4_threshold", int, required=False,
            default=defaults.floor_d4_threshold)
        floor_level = entry.take("floor_level", str, required=False)
        if floor_level is not None:
            try:
                policy_kwargs["floor_level"] = Level[floor_level]
            except KeyError:
                raise SchemaError(
                    "config.policy.floor_level must be one of L2, L3, L4; "
                    f"got {floor_level!r}") from None
        boundary = entry.take("boundary_policy", str, required=False)
        if boundary is not None:
            policy_kwargs["boundary_policy"] = _enum(
                BoundaryPolicy, boundary, "config.policy.boundary_policy")
        consensus = entry.take("consensus", str, required=False)
        if consensus is not None:
            policy_kwargs["consensus"] = _enum(
                ConsensusRule, consensus, "config.policy.consensus")
        entry.finish()
    policy = ScoringPolicy(**policy_kwargs)
    return RunConfig(weights=weights, thresholds=thresholds, policy=policy)


def load_config(path: str | Path) -> RunConfig:
    return parse_config(_load_json(path))


def serialize_config(config: RunConfig) -> dict:
    doc: dict[str, Any] = {
        "weights": dict(zip(("w1", "w2", "w3", "w4", "w5"),
                            config.weights.as_tuple())),
        "thresholds": {
            "t12": config.thresholds.t12,
            "t23": config.thresholds.t23,
            "t34": config.thresholds.t34,
            "boundary_halfwidth": config.thresholds.boundary_halfwidth,
        },
        "policy": {
            "floor_enabled": config.policy.floor_enabled,
            "floor_d4_threshold": config.policy.floor_d4_threshold,
            "floor_level": config.policy.floor_level.name,
            "boundary_policy": config.policy.boundary_policy.value,
            "consensus": config.policy.consensus.value,
        },
    }
    if config.policy.weight_fingerprint is not None:
        doc["weight_fingerprint"] = config.policy.weight_fingerprint
    return doc


# ---------------------------------------------------------------------------
# small auxiliary documents
# ---------------------------------------------------------------------------

def load_matrix(path: str | Path) -> tuple[tuple[float, ...], ...]:
    """Pairwise-comparison matrix file: {"matrix": [[...], ...]}."""
    record = _Record(_load_json(path), "matrix file")
    rows_raw = record.take("matrix", list)
    record.finish()
    rows = []
    for i, row in enumerate(rows_raw):
        if not isinstance(row, list):
            raise SchemaError(f"matrix[{i}] must be an array of numbers")
        for item in row:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise SchemaError(f"matrix[{i}] must contain only numbers")
        rows.append(tuple(float(v) for v in row))
    return tuple(rows)


def load_rankings(path: str | Path) -> tuple[tuple[float, ...], ...]:
    """Judge rankings file: {"rankings": [[...], ...]}, one row per judge."""
    record = _Record(_load_json(path), "rankings file")
    rows_raw = record.take("rankings", list)
    record.finish()
    rows = []
    for i, row in enumerate(rows_raw):
        if not isinstance(row, list):
            raise SchemaError(f"rankings[{i}] must be an array of numbers")
        for item in row:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise SchemaError(f"rankings[{i}] must contain only numbers")
        rows.append(tuple(float(v) for v in row))
    return tuple(rows)


def load_scores(path: str | Path) -> tuple[float, ...]:
    """Observed-score file for threshold estimation: {"scores": [...]}."""
    record = _Record(_load_json(path), "scores file")
    raw = record.take("scores", list)
    record.finish()
    for item in raw:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise SchemaError("scores must contain only numbers")
    return tuple(float(v) for v in raw)


# ---------------------------------------------------------------------------
# baseline
# ---------------------------------------------------------------------------

def parse_baseline(doc: Any) -> Baseline:
    record = _Record(doc, "baseline")
    timestamp_raw = record.take("timestamp", str)
    try:
        timestamp = dt.date.fromisoformat(timestamp_raw)
    except ValueError:
        raise SchemaError(
            f"baseline.timestamp must be an ISO date, got {timestamp_raw!r}"
        ) from None
    model_label = record.take("model_label", str)
    weights_raw = _Record(record.take("weights", dict), "baseline.weights")
    weights = WeightVector(
        w1=weights_raw.take("w1", float),
        w2=weights_raw.take("w2", float),
        w3=weights_raw.take("w3", float),
        w4=weights_raw.take("w4", float),
        w5=weights_raw.take("w5", float),
    )
    weights_raw.finish()
    thresholds_raw = _Record(record.take("thresholds", dict), "baseline.thresholds")
    thresholds = Thresholds(
        t12=thresholds_raw.take("t12", float),
        t23=thresholds_raw.take("t23", float),
        t34=thresholds_raw.take("t34", float),
        boundary_halfwidth=thresholds_raw.take("boundary_halfwidth", float,
                                               required=False, default=0.15),
    )
    thresholds_raw.finish()
    scores: dict[str, DimensionScores] = {}
    for i, item in enumerate(record.take("scores", list)):
        entry = _Record(item, f"baseline.scores[{i}]")
        task_id = entry.take("task_id", str)
        if task_id in scores:
            raise SchemaError(f"baseline lists task {task_id!r} twice")
        scores[task_id] = DimensionScores(
            d1=entry.take("d1", int),
            d2=entry.take("d2", int),
            d3=entry.take("d3", int),
            d4=entry.take("d4", int),
            d5=entry.take("d5", int),
        )
        entry.finish()
    record.finish()
    return Baseline(
        timestamp=timestamp,
        scores=scores,
        weights=weights,
        thresholds=thresholds,
        model_label=model_label,
    )


def load_baseline(path: str | Path) -> Baseline:
    return parse_baseline(_load_json(path))


def serialize_baseline(baseline: Baseline) -> dict:
    return {
        "timestamp": baseline.timestamp.isoformat(),
        "model_label": baseline.model_label,
        "weights": dict(zip(("w1", "w2", "w3", "w4", "w5"),
                            baseline.weights.as_tuple())),
        "thresholds": {
            "t12": baseline.thresholds.t12,
            "t23": baseline.thresholds.t23,
            "t34": baseline.thresholds.t34,
            "boundary_halfwidth": baseline.thresholds.boundary_halfwidth,
        },
        "scores": [
            {"task_id": task_id, **dict(zip(("d1", "d2", "d3", "d4", "d5"),
                                            scores.as_tuple()))}
            for task_id, scores in sorted(baseline.scores.items())
        ],
    }
