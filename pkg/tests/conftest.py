import json
from pathlib import Path

import pytest

from partis.model import (
    Activity,
    Artifact,
    Determinism,
    Logic,
    Portfolio,
    Process,
    Role,
    Step,
    Task,
)

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def cm_dir() -> Path:
    return FIXTURES / "cm"


@pytest.fixture(scope="session")
def benchmark_dir() -> Path:
    return FIXTURES / "benchmark"


def read_json(path: Path):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def make_task(
    task_id: str = "T1",
    name: str = "Review Document",
    role: Role = Role.HUMAN,
    blooms: tuple[int, ...] = (2,),
    inputs: tuple[Artifact, ...] | None = None,
    outputs: tuple[Artifact, ...] | None = None,
    steps: tuple[Step, ...] | None = None,
    tools: tuple[str, ...] = (),
    determinism: Determinism = Determinism.HEURISTIC,
    **kwargs,
) -> Task:
    """One well-formed task; override pieces to build violations."""
    if inputs is None:
        inputs = (Artifact(id=f"ART-{task_id}-IN", name="source document",
                           format="markdown"),)
    if outputs is None:
        outputs = (Artifact(id=f"ART-{task_id}-OUT", name="review record",
                            format="markdown",
                            dod=("all findings are written down",),
                            deliverable=True),)
    if steps is None:
        steps = tuple(Step(description=f"work item {i + 1}", bloom_level=b)
                      for i, b in enumerate(blooms))
    return Task(
        id=task_id,
        name=name,
        roles=(role,) if isinstance(role, Role) else tuple(role),
        inputs=inputs,
        logic=Logic(steps=steps, tools=tools, determinism=determinism),
        outputs=outputs,
        **kwargs,
    )


def make_portfolio(*tasks: Task, **kwargs) -> Portfolio:
    """Wrap tasks into a single-process, single-activity portfolio."""
    if not tasks:
        tasks = (make_task(),)
    activity = Activity(id="A1", name="Draft Handling", tasks=tuple(tasks),
                        domain="Docs")
    process = Process(id="P1", name="Document Review", activity_ids=("A1",))
    return Portfolio(processes=(process,), activities=(activity,), **kwargs)
