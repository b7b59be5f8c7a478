"""Rank-aggregation schemes over bootstrap or posterior-predictive samples.

Five schemes: rank models by their across-task mean (ByAverage) or
geometric mean (GeometricMean), or rank per task first and average the
ranks (AverageRank), optionally adding standard normal noise to the
percentages before ranking (AverageRankNoise) or bucketing percentages
into 1%-wide bins so near-ties rank equally (AverageRankBinned).  Rank 1
is best everywhere; exact ties receive fractional (mean-of-positions)
ranks, which preserves the per-task rank sum.

Noise and binning operate on the 0-100 percentage scale: standard normal
noise on the fraction scale would drown the signal entirely.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from . import rng as _rng
from .bootstrap import DISPLAY_LEVEL, IntervalEstimate, ReplicateStore, percentile_interval
from .errors import ValidationError

__all__ = [
    "RankScheme",
    "RankSummary",
    "ranks_by_average",
    "ranks_by_geometric_mean",
    "average_rank",
    "rank_intervals",
]


class RankScheme(str, enum.Enum):
    BY_AVERAGE = "by-average"
    GEOMETRIC_MEAN = "geometric-mean"
    AVERAGE_RANK = "average-rank"
    AVERAGE_RANK_NOISE = "average-rank-noise"
    AVERAGE_RANK_BINNED = "average-rank-binned"


@dataclass(frozen=True)
class RankSummary:
    """One model's aggregated rank: mean over samples plus an interval."""

    model: str
    scheme: RankScheme
    point: float
    interval: IntervalEstimate


def _descending_ranks(values: np.ndarray, axis: int = 0) -> np.ndarray:
    # Fractional ranks with 1 = largest value.
    return rankdata(-values, method="average", axis=axis)


def ranks_by_average(acc: np.ndarray) -> np.ndarray:
    """Ranks of across-task mean accuracy; 1 = highest mean."""
    acc = np.atleast_2d(np.asarray(acc, dtype=float))
    return _descending_ranks(acc.mean(axis=1))


def ranks_by_geometric_mean(acc: np.ndarray) -> np.ndarray:
    """Ranks of the across-task geometric mean; 1 = highest.

    A model with any zero accuracy has geometric mean exactly 0 and ranks
    behind every strictly positive model; such rows are flagged with a
    warning.
    """
    acc = np.atleast_2d(np.asarray(acc, dtype=float))
    has_zero = (acc == 0.0).any(axis=1)
    gm = np.zeros(acc.shape[0])
    if np.any(~has_zero):
        gm[~has_zero] = np.exp(np.log(acc[~has_zero]).mean(axis=1))
    if np.any(has_zero):
        warnings.warn(
            f"{int(has_zero.sum())} model(s) have a zero accuracy; their "
            "geometric mean is 0 and they rank last",
            stacklevel=2,
        )
    return _descending_ranks(gm)


def average_rank(
    acc: np.ndarray,
    variant: str = "plain",
    noise_sd: float = 1.0,
    bin_width: float = 1.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Across-task mean of per-task ranks; lower is better.

    ``plain`` ranks raw accuracies per task.  ``noise`` adds independent
    Normal(0, noise_sd) percentage points to each cell first.  ``binned``
    buckets each percentage by floor(percent / bin_width) — anchored at
    integer multiples of the width — and ranks the buckets, so models in
    the same bucket tie.
    """
    acc = np.atleast_2d(np.asarray(acc, dtype=float))
    if variant not in ("plain", "noise", "binned"):
        raise ValidationError(f"unknown average-rank variant {variant!r}")
    percent = acc * 100.0
    if variant == "noise":
        if noise_sd < 0:
            raise ValidationError(f"noise sd must be >= 0, got {noise_sd}")
        if rng is None:
            raise ValidationError("the noise variant needs a random stream")
        percent = percent + rng.normal(0.0, noise_sd, size=percent.shape)
    elif variant == "binned":
        if bin_width <= 0:
            raise ValidationError(f"bin width must be > 0, got {bin_width}")
        percent = np.floor(percent / bin_width)
    return _descending_ranks(percent, axis=0).mean(axis=1)


_VARIANTS = {
    RankScheme.AVERAGE_RANK: "plain",
    RankScheme.AVERAGE_RANK_NOISE: "noise",
    RankScheme.AVERAGE_RANK_BINNED: "binned",
}


def _scheme_ranks(acc, scheme, noise_sd, bin_width, rng):
    if scheme == RankScheme.BY_AVERAGE:
        return ranks_by_average(acc)
    if scheme == RankScheme.GEOMETRIC_MEAN:
        return ranks_by_geometric_mean(acc)
    return average_rank(
        acc, _VARIANTS[scheme], noise_sd=noise_sd, bin_width=bin_width, rng=rng
    )


def rank_intervals(
    samples,
    scheme: RankScheme | str,
    level: float = DISPLAY_LEVEL,
    noise_sd: float = 1.0,
    bin_width: float = 1.0,
    seed: int | None = None,
    models=None,
    method: str | None = None,
) -> list[RankSummary]:
    """Apply a rank scheme to every sample and summarize per model.

    ``samples`` is a bootstrap ReplicateStore or a samples x models x tasks
    array (e.g. posterior-predictive accuracies — tagged accordingly).  The
    noise variant draws fresh noise per sample from the RANK_NOISE substream
    of ``seed`` (default: the store's seed, else 0), keyed by sample index,
    so results do not depend on evaluation order.
    """
    scheme = RankScheme(scheme)
    if isinstance(samples, ReplicateStore):
        values = samples.replicates
        if models is None:
            models = samples.source.models
        if seed is None:
            seed = samples.seed
        if method is None:
            method = "bootstrap-percentile"
    else:
        values = np.asarray(samples, dtype=float)
        if values.ndim != 3:
            raise ValidationError("expected a samples x models x tasks array")
        if models is None:
            models = tuple(f"model_{i}" for i in range(values.shape[1]))
        if seed is None:
            seed = 0
        if method is None:
            method = "bhm-posterior-predictive"
    n_samples, n_models = values.shape[:2]
    if n_samples < 2:
        raise ValidationError("need at least 2 samples for rank intervals")
    if len(models) != n_models:
        raise ValidationError(f"{len(models)} names for {n_models} models")

    ranks = np.empty((n_samples, n_models))
    for s in range(n_samples):
        rng = (
            _rng.substream(seed, _rng.RANK_NOISE, s)
            if scheme == RankScheme.AVERAGE_RANK_NOISE
            else None
        )
        ranks[s] = _scheme_ranks(values[s], scheme, noise_sd, bin_width, rng)

    out = []
    for i, model in enumerate(models):
        lower, upper = percentile_interval(ranks[:, i], level)
        interval = IntervalEstimate(
            point=float(ranks[:, i].mean()),
            lower=lower,
            upper=upper,
            level=level,
            method=method,
        )
        out.append(
            RankSummary(
                model=model, scheme=scheme, point=interval.point, interval=interval
            )
        )
    return out
