"""Uncertainty quantification for aggregated benchmark metrics.

Turns per-task evaluation counts into leaderboards with quantified
uncertainty: bootstrap confidence intervals, Bayesian hierarchical credible
intervals, rank-aggregation summaries, task-weighting variance analysis,
score normalization, and ternary weight-space maps.
"""

from .core import (
    AccuracyMatrix,
    EvalTable,
    TaskSpec,
    accuracy_of,
    load_eval_table,
    synthesize_counts,
    validate_consistency,
)
from .errors import (
    BenchuqError,
    CapacityError,
    ConvergenceWarning,
    DegenerateBoundsError,
    SliceSamplerError,
    ValidationError,
)
from .fixtures import load_vtab, vtab_published_means

__version__ = "0.1.0"

__all__ = [
    "AccuracyMatrix",
    "EvalTable",
    "TaskSpec",
    "accuracy_of",
    "load_eval_table",
    "load_vtab",
    "synthesize_counts",
    "validate_consistency",
    "vtab_published_means",
    "BenchuqError",
    "CapacityError",
    "ConvergenceWarning",
    "DegenerateBoundsError",
    "SliceSamplerError",
    "ValidationError",
    "__version__",
]
