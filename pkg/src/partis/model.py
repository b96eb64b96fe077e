"""T-IPO domain model: processes, activities, tasks and their governance links.

Construction enforces structural well-formedness only (enum membership,
value ranges, non-empty step lists). Rule-level checks such as "every task
has at least one input" are deliberately representable here and live in
:mod:`partis.validation`, so that a loaded portfolio can be diagnosed
instead of refused.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import DomainError, SchemaError


class Role(enum.Enum):
    HUMAN = "Human"
    LLM_AGENT = "LLMAgent"
    SYSTEM = "System"
    HYBRID = "Hybrid"


class Determinism(enum.Enum):
    DETERMINISTIC = "Deterministic"
    PROBABILISTIC = "Probabilistic"
    HEURISTIC = "Heuristic"


class ConstraintKind(enum.Enum):
    TIME = "TimeConst"
    AUTH = "AuthConst"
    QUAL = "QualConst"
    AUDIT = "AuditConst"


class DependencyKind(enum.Enum):
    DATA = "Data"
    TEMPORAL = "Temporal"
    RESOURCE = "Resource"


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


@dataclass(frozen=True)
class Step:
    description: str
    bloom_level: int

    def __post_init__(self) -> None:
        if not isinstance(self.bloom_level, int) or not 1 <= self.bloom_level <= 6:
            raise SchemaError(
                f"step bloom_level must be an integer in 1..6, got {self.bloom_level!r}"
            )
        if not self.description:
            raise SchemaError("step description must be non-empty")


@dataclass(frozen=True)
class Logic:
    steps: tuple[Step, ...]
    tools: tuple[str, ...]
    determinism: Determinism

    def __post_init__(self) -> None:
        if not self.steps:
            raise SchemaError("logic.steps must contain at least one step")

    @property
    def bloom_level(self) -> int:
        # Derived, never stored: the peak cognitive demand across steps.
        return max(step.bloom_level for step in self.steps)


@dataclass(frozen=True)
class Artifact:
    id: str
    name: str
    format: str
    dod: tuple[str, ...] = ()
    encoding_tolerance: tuple[str, ...] | None = None
    deliverable: bool = False


@dataclass(frozen=True)
class TypedConstraint:
    kind: ConstraintKind
    description: str
    source_standard_id: str | None = None
    source_institution_id: str | None = None

    def __post_init__(self) -> None:
        if not self.description:
            raise SchemaError("constraint description must be non-empty")


@dataclass(frozen=True)
class Dependency:
    kind: DependencyKind
    from_task_id: str
    to_task_id: str


@dataclass(frozen=True)
class Task:
    id: str
    name: str
    # Held as a tuple so that a portfolio naming zero or several roles is
    # still loadable; rule C5 reports it instead of the parser refusing.
    roles: tuple[Role, ...]
    inputs: tuple[Artifact, ...]
    logic: Logic
    outputs: tuple[Artifact, ...]
    constraints: tuple[TypedConstraint, ...] = ()
    dependencies: tuple[Dependency, ...] = ()

    @property
    def role(self) -> Role:
        if len(self.roles) != 1:
            raise DomainError(
                f"task {self.id} does not name exactly one role"
            )
        return self.roles[0]


@dataclass(frozen=True)
class Activity:
    id: str
    name: str
    tasks: tuple[Task, ...]
    domain: str | None = None

    @property
    def task_ids(self) -> tuple[str, ...]:
        return tuple(task.id for task in self.tasks)


@dataclass(frozen=True)
class Process:
    id: str
    name: str
    activity_ids: tuple[str, ...]


@dataclass(frozen=True)
class Institution:
    id: str
    name: str
    description: str = ""


@dataclass(frozen=True)
class Standard:
    id: str
    name: str
    institution_ids: tuple[str, ...]
    description: str = ""


@dataclass(frozen=True)
class GovernanceLinks:
    task_to_institution: tuple[tuple[str, str], ...] = ()
    standard_to_process: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Portfolio:
    processes: tuple[Process, ...]
    activities: tuple[Activity, ...]
    institutions: tuple[Institution, ...] = ()
    standards: tuple[Standard, ...] = ()
    links: GovernanceLinks = field(default_factory=GovernanceLinks)

    def iter_tasks(self):
        for activity in self.activities:
            yield from activity.tasks

    def task(self, task_id: str) -> Task:
        for task in self.iter_tasks():
            if task.id == task_id:
                return task
        raise DomainError(f"unknown task id: {task_id}")

    def activity_of(self, task_id: str) -> Activity:
        for activity in self.activities:
            if any(task.id == task_id for task in activity.tasks):
                return activity
        raise DomainError(f"unknown task id: {task_id}")

    def institution(self, institution_id: str) -> Institution:
        for inst in self.institutions:
            if inst.id == institution_id:
                return inst
        raise DomainError(f"unknown institution id: {institution_id}")


@dataclass(frozen=True)
class Diagnostic:
    """One finding from validation or lint.

    code is one of C1..C6 (rule violations), REF (reference integrity),
    R2 / R4 / NAME (lint findings).
    """

    code: str
    severity: Severity
    element_id: str
    message: str

    def sort_key(self) -> tuple[str, str]:
        return (self.element_id, self.code)
