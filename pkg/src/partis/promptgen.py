"""Render one task into an executable agent prompt.

The layout is frozen: a task header plus the five labeled blocks SYSTEM,
CONTEXT, INSTRUCTION, FORMAT, GUARDRAILS. Output is deterministic down
to the byte (LF line endings, no trailing whitespace) so downstream
diffs mean real changes. Generation refuses tasks that fail validation
and tasks executed by humans, for whom a machine prompt is meaningless.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PromptRefusal
from .model import Determinism, Portfolio, Role, Severity, Task, TypedConstraint
from .validation import validate_portfolio

DEFAULT_GUARDRAILS = (
    "Use only the input artifacts listed in CONTEXT; do not invent data.",
    "If an input is missing or malformed, stop and report it instead of guessing.",
    "Produce exactly the outputs listed in FORMAT, meeting every definition of done.",
)

_MODE_LINES = {
    Determinism.DETERMINISTIC:
        "Execution mode: deterministic; follow the steps exactly as written.",
    Determinism.PROBABILISTIC:
        "Execution mode: probabilistic; apply judgment within the stated constraints.",
    Determinism.HEURISTIC:
        "Execution mode: heuristic; apply judgment within the stated constraints.",
}


@dataclass(frozen=True)
class PromptDocument:
    task_id: str
    text: str


def generate_prompt(portfolio: Portfolio, task_id: str) -> PromptDocument:
    task = portfolio.task(task_id)
    errors = [d for d in validate_portfolio(portfolio)
              if d.severity is Severity.ERROR]
    if errors:
        shown = "; ".join(f"{d.code} on {d.element_id}" for d in errors[:5])
        raise PromptRefusal(
            f"portfolio has {len(errors)} validation error(s), e.g. {shown}; "
            "fix them before generating prompts")
    if task.role is Role.HUMAN:
        raise PromptRefusal(
            f"task {task.id} is executed by a human; refusing to generate "
            "an agent prompt")

    lines: list[str] = []
    lines.append(f"== TASK {task.id} ==")
    lines.append(task.name)
    lines.append("")

    lines.append("== SYSTEM ==")
    lines.append(f"You are the {task.role.value} executor assigned to the task "
                 f"\"{task.name}\".")
    lines.append("Work only within this brief; every fact you need is stated below.")
    lines.append("")

    lines.append("== CONTEXT ==")
    lines.append("Input artifacts:")
    for artifact in task.inputs:
        suffix = ""
        if artifact.encoding_tolerance:
            suffix = "; accepted encodings: " + ", ".join(artifact.encoding_tolerance)
        lines.append(f"- {artifact.name} (format: {artifact.format}{suffix})")
    if task.dependencies:
        lines.append("Prerequisites:")
        for dep in task.dependencies:
            lines.append(f"- task {dep.from_task_id} completes before task "
                         f"{dep.to_task_id} ({dep.kind.value} dependency)")
    lines.append("")

    lines.append("== INSTRUCTION ==")
    lines.append(_MODE_LINES[task.logic.determinism])
    lines.append(f"Peak cognitive demand: bloom level {task.logic.bloom_level}.")
    lines.append("Steps:")
    for number, step in enumerate(task.logic.steps, start=1):
        lines.append(f"{number}. {step.description}")
    if task.logic.tools:
        lines.append("Tools:")
        for tool in task.logic.tools:
            lines.append(f"- {tool}")
    lines.append("")

    lines.append("== FORMAT ==")
    lines.append("Produce these output artifacts:")
    for artifact in task.outputs:
        lines.append(f"- {artifact.name} (format: {artifact.format})")
        lines.append("  Definition of done:")
        for criterion in artifact.dod:
            lines.append(f"  - {criterion}")
    lines.append("")

    lines.append("== GUARDRAILS ==")
    if task.constraints:
        lines.append("Task constraints:")
        for constraint in task.constraints:
            lines.append(_constraint_line(constraint))
    lines.append("Default guardrails:")
    for guardrail in DEFAULT_GUARDRAILS:
        lines.append(f"- {guardrail}")

    return PromptDocument(task_id=task.id, text="\n".join(lines) + "\n")


def _constraint_line(constraint: TypedConstraint) -> str:
    sources = []
    if constraint.source_standard_id:
        sources.append(f"standard {constraint.source_standard_id}")
    if constraint.source_institution_id:
        sources.append(f"institution {constraint.source_institution_id}")
    citation = f" (source: {'; '.join(sources)})" if sources else ""
    return f"- [{constraint.kind.value}] {constraint.description}{citation}"
