"""Process decomposition, agent-readiness scoring, and recalibration tools."""

from .errors import (
    ConsensusError,
    CouplingError,
    DegenerateInputError,
    DomainError,
    PartisError,
    PromptRefusal,
    SchemaError,
)
from .model import (
    Activity,
    Artifact,
    ConstraintKind,
    Dependency,
    DependencyKind,
    Determinism,
    Diagnostic,
    GovernanceLinks,
    Institution,
    Logic,
    Portfolio,
    Process,
    Role,
    Severity,
    Standard,
    Step,
    Task,
    TypedConstraint,
)
from .scoring import (
    DEPLOYMENT_MODES,
    BoundaryInfo,
    BoundaryPolicy,
    ConsensusRule,
    DimensionScores,
    LaraResult,
    Level,
    PortfolioSummary,
    ScoringPolicy,
    SummaryEntry,
    Thresholds,
    WeightVector,
    assign_level,
    bloom_to_d1,
    classify,
    consensus_scores,
    portfolio_summary,
    score_task,
    sensitivity_analysis,
    weight_fingerprint,
    weighted_mean,
)
from .validation import (
    check_dag,
    impact_analysis,
    lint_decomposition,
    validate_portfolio,
)

__version__ = "0.1.0"

__all__ = [
    "Activity",
    "Artifact",
    "BoundaryInfo",
    "BoundaryPolicy",
    "ConsensusError",
    "ConsensusRule",
    "ConstraintKind",
    "CouplingError",
    "DEPLOYMENT_MODES",
    "DegenerateInputError",
    "Dependency",
    "DependencyKind",
    "Determinism",
    "Diagnostic",
    "DimensionScores",
    "DomainError",
    "GovernanceLinks",
    "Institution",
    "LaraResult",
    "Level",
    "Logic",
    "PartisError",
    "Portfolio",
    "PortfolioSummary",
    "Process",
    "PromptRefusal",
    "Role",
    "SchemaError",
    "ScoringPolicy",
    "Severity",
    "Standard",
    "Step",
    "SummaryEntry",
    "Task",
    "Thresholds",
    "TypedConstraint",
    "WeightVector",
    "assign_level",
    "bloom_to_d1",
    "check_dag",
    "classify",
    "consensus_scores",
    "impact_analysis",
    "lint_decomposition",
    "portfolio_summary",
    "score_task",
    "sensitivity_analysis",
    "validate_portfolio",
    "weight_fingerprint",
    "weighted_mean",
    "__version__",
]
