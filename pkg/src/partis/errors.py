"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: SchemaError -> 2,
CouplingError -> 3, every other DomainError -> 1.
"""

from __future__ import annotations


class PartisError(Exception):
    """Base class for all errors raised by this package."""


class SchemaError(PartisError):
    """Input file is malformed: bad shape, unknown keys, out-of-range values."""


class DomainError(PartisError):
    """Input parsed fine but violates a semantic precondition."""


class CouplingError(DomainError):
    """Weights changed after thresholds were estimated under different weights."""


class ConsensusError(DomainError):
    """Raters disagree under the require_exact consensus rule."""

    def __init__(self, dimensions: tuple[str, ...]):
        self.dimensions = dimensions
        super().__init__(
            "raters disagree on dimension(s): " + ", ".join(dimensions)
        )


class DegenerateInputError(DomainError):
    """A statistic is undefined for this input (e.g. chance agreement is 1)."""


class PromptRefusal(DomainError):
    """Prompt generation refused; the reason is the message."""
