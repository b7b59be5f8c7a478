"""Reproducible random substreams for parallel Monte Carlo work.

Every stochastic component derives its generator from a master seed plus a
small integer key, via numpy's ``SeedSequence`` spawn-key mechanism.  The
derivation is frozen: stream ``(seed, purpose, *indices)`` always yields the
same PCG64 state, independent of the order streams are created in or of how
work is distributed across workers.  This is what makes bootstrap replicates,
MCMC chains, and rank-noise draws bit-reproducible at any parallelism level.

Purpose constants (first key component):

====================  ===  ========================================
BOOTSTRAP              0   one stream per bootstrap replicate
CHAIN                  1   one stream per MCMC chain
RANK_NOISE             2   one stream per sample for noisy ranking
JITTER                 3   binomial jitter in count synthesis
PREDICTIVE             4   posterior predictive draws
COVERAGE               5   synthetic benchmark generation in tests
====================  ===  ========================================
"""

from __future__ import annotations

import numpy as np

BOOTSTRAP = 0
CHAIN = 1
RANK_NOISE = 2
JITTER = 3
PREDICTIVE = 4
COVERAGE = 5

_MASK64 = (1 << 64) - 1


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for substream ``key`` of master ``seed``.

    ``seed`` must be a nonnegative integer and is reduced modulo 2**64; key
    components must be nonnegative integers.  Identical arguments always
    produce an identical generator.
    """
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    ss = np.random.SeedSequence(entropy=seed & _MASK64, spawn_key=tuple(key))
    return np.random.Generator(np.random.PCG64(ss))
