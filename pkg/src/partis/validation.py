"""Portfolio validation: structural rules C1..C6, reference integrity,
decomposition lints, and institutional impact analysis.

All functions are pure; diagnostics come back deterministically ordered
by (element id, code, message) so repeated runs are byte-stable.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import DomainError
from .model import Diagnostic, Portfolio, Severity, Task

# Rule severities are fixed: C-rules and broken references block scoring
# and prompt generation, lints never do.
SEVERITY_BY_CODE = {
    "C1": Severity.ERROR,
    "C2": Severity.ERROR,
    "C3": Severity.ERROR,
    "C4": Severity.ERROR,
    "C5": Severity.ERROR,
    "C6": Severity.ERROR,
    "REF": Severity.ERROR,
    "R2": Severity.WARNING,
    "R4": Severity.INFO,
    "NAME": Severity.INFO,
}

# First tokens accepted by the NAME lint. Deliberately small: common
# English process verbs, lowercase.
DEFAULT_VERB_LEXICON: tuple[str, ...] = (
    "analyze", "approve", "archive", "assemble", "assess", "assign",
    "audit", "build", "calculate", "check", "classify", "code", "collect",
    "compile", "configure", "confirm", "create", "define", "deploy",
    "design", "detect", "determine", "develop", "document", "draft",
    "estimate", "evaluate", "execute", "extract", "generate", "identify",
    "implement", "inspect", "install", "maintain", "merge", "monitor",
    "notify", "package", "perform", "plan", "prepare", "process",
    "produce", "publish", "record", "register", "release", "report",
    "review", "scan", "schedule", "submit", "summarize", "test", "track",
    "update", "validate", "verify", "write",
)


@dataclass(frozen=True)
class DagResult:
    """Either a stable topological order or one representative cycle."""

    order: tuple[str, ...] | None
    cycle: tuple[str, ...] | None

    @property
    def is_acyclic(self) -> bool:
        return self.cycle is None


@dataclass(frozen=True)
class ImpactReport:
    institution_id: str
    standard_ids: tuple[str, ...]
    task_ids: tuple[str, ...]
    process_ids: tuple[str, ...]


def _diag(code: str, element_id: str, message: str) -> Diagnostic:
    return Diagnostic(code, SEVERITY_BY_CODE[code], element_id, message)


def _sorted(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    # set(): an artifact mentioned by several tasks reports each defect once.
    return sorted(set(diagnostics), key=lambda d: (d.element_id, d.code, d.message))


# ---------------------------------------------------------------------------
# dependency graph
# ---------------------------------------------------------------------------

def dependency_edges(portfolio: Portfolio) -> list[tuple[str, str]]:
    """All (from_task_id, to_task_id) pairs declared anywhere in the portfolio."""
    edges = []
    for task in portfolio.iter_tasks():
        for dep in task.dependencies:
            edges.append((dep.from_task_id, dep.to_task_id))
    return edges


def check_dag(portfolio: Portfolio) -> DagResult:
    """Topologically sort the task dependency graph.

    The order is stable: ties break by task id, so a portfolio with no
    dependencies comes back in plain lexicographic order. If a cycle
    exists, one representative cycle is returned instead, rotated so the
    smallest task id leads.
    """
    task_ids = sorted(task.id for task in portfolio.iter_tasks())
    known = set(task_ids)
    successors: dict[str, list[str]] = {tid: [] for tid in task_ids}
    indegree = {tid: 0 for tid in task_ids}
    for src, dst in dependency_edges(portfolio):
        if src in known and dst in known and src != dst:
            successors[src].append(dst)
            indegree[dst] += 1

    ready = [tid for tid in task_ids if indegree[tid] == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        tid = heapq.heappop(ready)
        order.append(tid)
        for nxt in sorted(successors[tid]):
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(ready, nxt)

    if len(order) == len(task_ids):
        return DagResult(order=tuple(order), cycle=None)

    remaining = {tid for tid in task_ids if tid not in set(order)}
    cycle = _find_cycle(successors, remaining)
    return DagResult(order=None, cycle=cycle)


def _find_cycle(successors: dict[str, list[str]], remaining: set[str]) -> tuple[str, ...]:
    # Every remaining vertex keeps at least one predecessor inside the
    # remaining set, so walking backward must revisit a vertex. Walking
    # forward could dead-end in a task that merely sits downstream of
    # the cycle.
    predecessors: dict[str, list[str]] = {tid: [] for tid in remaining}
    for src, targets in successors.items():
        if src not in remaining:
            continue
        for dst in targets:
            if dst in remaining:
                predecessors[dst].append(src)
    start = min(remaining)
    seen: dict[str, int] = {}
    path: list[str] = []
    node = start
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = min(predecessors[node])
    cycle = path[seen[node]:]
    cycle.reverse()
    pivot = cycle.index(min(cycle))
    return tuple(cycle[pivot:] + cycle[:pivot])


# ---------------------------------------------------------------------------
# validation rules
# ---------------------------------------------------------------------------

def validate_portfolio(portfolio: Portfolio) -> list[Diagnostic]:
    """Check rules C1..C6 plus reference integrity.

    Returns an empty list iff the portfolio is structurally sound; lint
    findings are separate (see lint_decomposition).
    """
    out: list[Diagnostic] = []
    out.extend(_check_uniqueness(portfolio))
    out.extend(_check_references(portfolio))

    for process in portfolio.processes:
        if not process.activity_ids:
            out.append(_diag("C1", process.id,
                             f"process {process.id} defines no activities"))
    for activity in portfolio.activities:
        if not activity.tasks:
            out.append(_diag("C2", activity.id,
                             f"activity {activity.id} defines no tasks"))

    for task in portfolio.iter_tasks():
        if not task.inputs:
            out.append(_diag("C3", task.id,
                             f"task {task.id} declares no input artifacts"))
        if not task.outputs:
            out.append(_diag("C4", task.id,
                             f"task {task.id} declares no output artifacts"))
        for artifact in task.outputs:
            if not artifact.dod:
                out.append(_diag(
                    "C4", task.id,
                    f"output artifact {artifact.id} of task {task.id} "
                    "has an empty definition of done"))
        if len(task.roles) != 1:
            listed = ", ".join(r.value for r in task.roles) or "none"
            out.append(_diag(
                "C5", task.id,
                f"task {task.id} must name exactly one responsible role "
                f"(found: {listed})"))

    dag = check_dag(portfolio)
    if dag.cycle is not None:
        out.append(_diag(
            "C6", dag.cycle[0],
            "tasks form a dependency cycle: "
            + " -> ".join(dag.cycle + (dag.cycle[0],))))

    return _sorted(out)


def _check_uniqueness(portfolio: Portfolio) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    seen: dict[str, str] = {}
    declared = (
        [("process", p.id) for p in portfolio.processes]
        + [("activity", a.id) for a in portfolio.activities]
        + [("task", t.id) for t in portfolio.iter_tasks()]
        + [("institution", i.id) for i in portfolio.institutions]
        + [("standard", s.id) for s in portfolio.standards]
    )
    for kind, element_id in declared:
        if element_id in seen:
            out.append(_diag(
                "REF", element_id,
                f"identifier {element_id} declared more than once "
                f"({seen[element_id]} and {kind})"))
        else:
            seen[element_id] = kind

    # Artifact ids may legitimately recur across tasks (an output consumed
    # elsewhere as an input), but they must not shadow element ids and all
    # mentions must agree on name and format.
    artifacts: dict[str, tuple[str, str]] = {}
    for task in portfolio.iter_tasks():
        for artifact in task.inputs + task.outputs:
            if artifact.id in seen:
                out.append(_diag(
                    "REF", artifact.id,
                    f"artifact id {artifact.id} collides with a declared "
                    f"{seen[artifact.id]} id"))
                continue
            shape = (artifact.name, artifact.format)
            if artifacts.setdefault(artifact.id, shape) != shape:
                out.append(_diag(
                    "REF", artifact.id,
                    f"artifact {artifact.id} is mentioned with conflicting "
                    "name or format"))
    return out


def _check_references(portfolio: Portfolio) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    process_ids = {p.id for p in portfolio.processes}
    activity_ids = {a.id for a in portfolio.activities}
    task_ids = {t.id for t in portfolio.iter_tasks()}
    institution_ids = {i.id for i in portfolio.institutions}
    standard_ids = {s.id for s in portfolio.standards}

    def missing(element_id: str, ref: str, what: str) -> None:
        out.append(_diag("REF", element_id,
                         f"{element_id} references unknown {what} {ref}"))

    for process in portfolio.processes:
        for aid in process.activity_ids:
            if aid not in activity_ids:
                missing(process.id, aid, "activity")
    for task in portfolio.iter_tasks():
        for dep in task.dependencies:
            if dep.from_task_id == dep.to_task_id:
                out.append(_diag("REF", task.id,
                                 f"dependency on task {task.id} loops "
                                 f"{dep.from_task_id} onto itself"))
            for ref in (dep.from_task_id, dep.to_task_id):
                if ref not in task_ids:
                    missing(task.id, ref, "task")
        for constraint in task.constraints:
            if (constraint.source_standard_id is not None
                    and constraint.source_standard_id not in standard_ids):
                missing(task.id, constraint.source_standard_id, "standard")
            if (constraint.source_institution_id is not None
                    and constraint.source_institution_id not in institution_ids):
                missing(task.id, constraint.source_institution_id, "institution")
    for standard in portfolio.standards:
        for iid in standard.institution_ids:
            if iid not in institution_ids:
                missing(standard.id, iid, "institution")
    for task_id, institution_id in portfolio.links.task_to_institution:
        if task_id not in task_ids:
            missing(task_id, task_id, "task")
        if institution_id not in institution_ids:
            missing(task_id, institution_id, "institution")
    for standard_id, process_id in portfolio.links.standard_to_process:
        if standard_id not in standard_ids:
            missing(standard_id, standard_id, "standard")
        if process_id not in process_ids:
            missing(standard_id, process_id, "process")
    return out


# ---------------------------------------------------------------------------
# lints
# ---------------------------------------------------------------------------

def lint_decomposition(
    portfolio: Portfolio,
    verb_lexicon: tuple[str, ...] = DEFAULT_VERB_LEXICON,
) -> list[Diagnostic]:
    """Advisory findings: R2 (step spread), R4 (dangling output), NAME."""
    out: list[Diagnostic] = []
    lexicon = {verb.casefold() for verb in verb_lexicon}

    consumers: dict[str, set[str]] = {}
    for task in portfolio.iter_tasks():
        for artifact in task.inputs:
            consumers.setdefault(artifact.id, set()).add(task.id)

    for task in portfolio.iter_tasks():
        blooms = [step.bloom_level for step in task.logic.steps]
        if max(blooms) - min(blooms) > 1:
            out.append(_diag(
                "R2", task.id,
                f"task {task.id} mixes step bloom levels {min(blooms)}"
                f"..{max(blooms)}; consider splitting"))

        for artifact in task.outputs:
            used_elsewhere = consumers.get(artifact.id, set()) - {task.id}
            if artifact.deliverable or used_elsewhere:
                continue
            out.append(_diag(
                "R4", task.id,
                f"output artifact {artifact.id} of task {task.id} is never "
                "consumed and is not marked deliverable"))

        tokens = task.name.split()
        if len(tokens) < 2:
            out.append(_diag(
                "NAME", task.id,
                f"task name {task.name!r} should be a verb plus an object"))
        elif tokens[0].casefold() not in lexicon:
            out.append(_diag(
                "NAME", task.id,
                f"task name {task.name!r} does not start with a known "
                "process verb"))

    return _sorted(out)


# ---------------------------------------------------------------------------
# impact analysis
# ---------------------------------------------------------------------------

def impact_analysis(portfolio: Portfolio, institution_id: str) -> ImpactReport:
    """Everything governed by one institution.

    Tasks are reported when directly linked to the institution; standards
    when issued under it; processes when targeted by one of those
    standards.
    """
    portfolio.institution(institution_id)

    standard_ids = sorted(
        s.id for s in portfolio.standards if institution_id in s.institution_ids
    )
    task_ids = sorted(
        task_id for task_id, iid in portfolio.links.task_to_institution
        if iid == institution_id
    )
    affected = set(standard_ids)
    process_ids = sorted({
        process_id for standard_id, process_id in portfolio.links.standard_to_process
        if standard_id in affected
    })
    return ImpactReport(
        institution_id=institution_id,
        standard_ids=tuple(standard_ids),
        task_ids=tuple(task_ids),
        process_ids=tuple(process_ids),
    )
