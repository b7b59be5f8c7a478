"""Regenerate the frozen high-precision oracle constants used in tests.

Run from the repository root:

    python3 tools/oracles.py

The printed values are copied verbatim into the test suite; tests compare
the production code (double precision, scipy) against these independently
derived numbers rather than against itself.
"""

import mpmath as mp

mp.mp.dps = 50


def log_conditional_alpha(alpha, beta, thetas, rate):
    """Arbitrary-precision log full conditional of alpha (exponential prior)."""
    alpha, beta, rate = mp.mpf(alpha), mp.mpf(beta), mp.mpf(rate)
    logprior = mp.log(rate) - rate * alpha
    log_sum = sum(mp.log(mp.mpf(t)) for t in thetas)
    log_beta_fn = mp.loggamma(alpha) + mp.loggamma(beta) - mp.loggamma(alpha + beta)
    return logprior + (alpha - 1) * log_sum - len(thetas) * log_beta_fn


def quantile_type7(values, p):
    """Inclusive linear-interpolation quantile, 1-based Hyndman-Fan type 7."""
    s = sorted(mp.mpf(v) for v in values)
    h = (len(s) - 1) * mp.mpf(p)
    lo = int(mp.floor(h))
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (h - lo) * (s[hi] - s[lo])


if __name__ == "__main__":
    print("# log conditional of alpha: J=3, theta=(.5,.5,.5), beta=2, Exp(1/10000)")
    for a in (1, 10, 100):
        v = log_conditional_alpha(a, 2, ["0.5", "0.5", "0.5"], mp.mpf(1) / 10000)
        print(f"alpha={a:>3}: {mp.nstr(v, 18)}")

    print("# percentile interval of {1..100} at level 0.834")
    lo = quantile_type7(range(1, 101), (1 - mp.mpf("0.834")) / 2)
    hi = quantile_type7(range(1, 101), 1 - (1 - mp.mpf("0.834")) / 2)
    print(f"({mp.nstr(lo, 12)}, {mp.nstr(hi, 12)})")
