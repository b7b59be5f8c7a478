#!/usr/bin/env python3
"""Calibrate the bundled 16-model / 19-task fixture.

Published sources give only category-level mean accuracies for the 16
models, so the bundled per-task accuracies are synthetic.  This tool
anneals zero-sum within-category offsets (category means stay exactly at
the published values by construction) until the full benchuq pipeline
reproduces the published leaderboard, rank-aggregation, and normalized
tables within the documented tolerances.

Usage (from the repository root; takes a few minutes):

    python3 tools/make_vtab_fixture.py --out src/benchuq/data

Writes vtab_tasks.csv, vtab_accuracy.csv, and vtab_published_means.csv,
then verifies the emitted files through the real loading + bootstrap
pipeline and prints a PASS/FAIL report.  Exits 1 on any FAIL.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from benchuq.bootstrap import run_bootstrap, aggregate_interval, pairwise_difference_intervals
from benchuq.core import load_eval_table, validate_consistency
from benchuq.normalize import estimate_bounds, normalize_scores
from benchuq.ranking import RankScheme, rank_intervals
from benchuq.weighting import WeightVector, decide_winner, weighted_variance, binomial_variances

# --------------------------------------------------------------- fixed facts

TASKS = [
    # (task, category, test size)
    ("Caltech101", "natural", 6084),
    ("CIFAR-100", "natural", 10000),
    ("DTD", "natural", 1880),
    ("Flowers102", "natural", 6149),
    ("Pets", "natural", 3669),
    ("Sun397", "natural", 21750),
    ("SVHN", "natural", 26032),
    ("Camelyon", "specialized", 32768),
    ("EuroSAT", "specialized", 5400),
    ("Resisc45", "specialized", 6300),
    ("Retinopathy", "specialized", 42670),
    ("Clevr-Count", "structured", 15000),
    ("Clevr-Dist", "structured", 15000),
    ("DMLab", "structured", 22735),
    ("dSpr-Loc", "structured", 73728),
    ("dSpr-Ori", "structured", 73728),
    ("KITTI-Dist", "structured", 711),
    ("sNORB-Azim", "structured", 12150),
    ("sNORB-Elev", "structured", 12150),
]

MODELS = [
    "Sup-Rotation-100%",
    "Sup-Exemplar-100%",
    "Sup-100%",
    "Semi-Exemplar-10%",
    "Semi-Rotation-10%",
    "Rotation",
    "Exemplar",
    "Rel.Pat.Loc",
    "Jigsaw",
    "Uncond-BigGAN",
    "From-Scratch",
    "Cond-BigGAN",
    "WAE-MMD",
    "VAE",
    "WAE-UKL",
    "WAE-GAN",
]

# Published per-category mean accuracy (percent): natural, specialized,
# structured; plus the published (rounded) overall mean.
CAT_MEANS = np.array([
    [73.6, 83.1, 55.5],
    [73.6, 83.1, 54.7],
    [73.4, 82.5, 52.1],
    [70.2, 81.8, 52.7],
    [69.5, 82.4, 52.5],
    [53.7, 78.6, 57.3],
    [48.9, 78.4, 55.8],
    [46.0, 76.5, 48.3],
    [44.0, 76.5, 47.9],
    [35.9, 63.0, 45.7],
    [27.9, 68.9, 43.6],
    [39.5, 57.4, 35.1],
    [20.8, 60.6, 43.4],
    [19.4, 59.2, 44.2],
    [15.0, 55.2, 39.0],
    [15.6, 54.0, 38.5],
])
PUBLISHED_OVERALL = [68.0, 67.6, 66.4, 65.3, 65.1, 60.4, 58.0, 53.4, 52.5,
                     45.8, 43.1, 41.4, 38.7, 38.2, 33.6, 33.3]

N = np.array([t[2] for t in TASKS], dtype=float)
CATS = np.array([{"natural": 0, "specialized": 1, "structured": 2}[t[1]] for t in TASKS])
BLOCKS = [np.where(CATS == c)[0] for c in range(3)]  # task indices per category
N_MODELS, N_TASKS = 16, 19
TOP6 = slice(0, 6)

# ------------------------------------------------------- calibration targets
# Published rank-aggregation values (full 16-model tables).

PLAIN_T = np.array([3.8, 3.9, 5.0, 5.5, 5.4, 4.9, 6.1, 8.5, 9.2, 10.3,
                    10.9, 10.6, 11.8, 11.7, 14.0, 14.4])
NOISE_T = np.array([3.8, 4.0, 5.0, 5.4, 5.3, 5.0, 6.0, 8.4, 9.1, 10.3,
                    10.9, 10.8, 11.8, 11.8, 14.0, 14.3])
BINS_T = np.array([4.2, 4.5, 5.5, 5.9, 5.9, 5.2, 6.4, 8.7, 9.5, 10.5,
                   11.3, 10.9, 12.1, 11.9, 14.4, 14.7])
GM_T = np.array([1.4, 1.6, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0,
                 12.0, 11.0, 13.6, 13.4, 15.0, 16.0])
# Half-widths of the published 95% AvR (plain) intervals.
PLAIN_HW_T = np.array([0.2, 0.3, 0.3, 0.2, 0.3, 0.25, 0.3, 0.15, 0.25, 0.2,
                       0.35, 0.15, 0.2, 0.2, 0.3, 0.25])

NORM_OVERALL_T = np.array([88.4, 89.5, 85.1, 83.3, 83.7, 77.6, 71.9, 59.3,
                           57.9, 44.7, 42.0, 36.8, 33.9, 31.8, 22.4, 21.4])
NORM_CAT_T = np.array([
    [95.6, 89.2, 81.5], [96.3, 92.7, 81.8], [96.0, 90.2, 73.0],
    [90.0, 88.7, 74.7], [88.1, 90.6, 76.4], [62.2, 78.6, 90.6],
    [54.3, 80.8, 82.9], [48.7, 71.6, 62.4], [45.8, 74.0, 60.5],
    [34.8, 39.0, 56.1], [22.3, 63.2, 48.5], [40.2, 50.7, 27.0],
    [12.0, 50.6, 44.8], [9.3, 33.1, 50.9], [2.0, 39.0, 32.0],
    [3.1, 35.7, 30.3],
])
NORM_NOISE_T = np.array([3.9, 3.9, 5.0, 5.5, 5.3, 5.0, 6.1, 8.5, 9.2, 10.3,
                         10.9, 10.7, 11.8, 11.7, 14.0, 14.4])
NORM_BINS_T = np.array([3.9, 4.1, 5.2, 5.6, 5.6, 5.0, 6.2, 8.6, 9.3, 10.3,
                        11.0, 10.7, 11.9, 11.8, 14.1, 14.5])

# The published bins column uses a tie rule that inflates rank sums; with
# fractional ties the per-task rank sum is fixed at 136, so only the top-6
# published bins values are taken literally and the remainder are shifted
# down uniformly to restore the invariant.
def _shift_tail(targets):
    t = targets.copy()
    excess = t.sum() - 136.0
    t[6:] -= excess / 10.0
    return t


BINS_T = _shift_tail(BINS_T)
NORM_BINS_T = _shift_tail(NORM_BINS_T)

# Published 95% interval endpoints (lower, upper) for the top-6 rows of the
# average-rank columns; the normalized plain column equals the raw one
# because per-task affine rescaling cannot change within-task ranks.
PLAIN_INT = np.array(
    [(3.6, 4.0), (3.6, 4.2), (4.7, 5.3), (5.3, 5.7), (5.1, 5.7), (4.7, 5.2)]
)
NOISE_INT = np.array(
    [(3.2, 4.4), (3.5, 4.6), (4.5, 5.7), (4.8, 5.9), (4.7, 5.9), (4.4, 5.4)]
)
BINS_INT = np.array(
    [(3.9, 4.4), (4.1, 4.8), (5.1, 5.9), (5.6, 6.2), (5.5, 6.2), (5.0, 5.4)]
)
NNOISE_INT = np.array(
    [(3.5, 4.2), (3.6, 4.3), (4.5, 5.4), (5.1, 5.8), (5.0, 5.7), (4.7, 5.2)]
)
NBINS_INT = np.array(
    [(3.7, 4.2), (3.8, 4.4), (4.8, 5.6), (5.4, 5.8), (5.3, 5.9), (4.8, 5.3)]
)


# ------------------------------------------------------------------ helpers


def project(A):
    """Force each (model, category) block mean to the published value."""
    out = A.copy()
    for c, idx in enumerate(BLOCKS):
        out[:, idx] += (CAT_MEANS[:, c] - out[:, idx].mean(axis=1))[:, None]
    return out


def sigma_pct(A):
    p = np.clip(A / 100.0, 1e-4, 1 - 1e-4)
    return 100.0 * np.sqrt(p * (1 - p) / N[None, :])


def snap_to_cents(A):
    """Round to 0.01 percent while keeping block means exactly on target.

    Published means have one decimal, so each (model, category) block total
    is an integer number of cents; largest-remainder rounding preserves it.
    """
    out = np.empty_like(A)
    for i in range(N_MODELS):
        for c, idx in enumerate(BLOCKS):
            raw = A[i, idx] * 100.0
            cents = np.round(raw).astype(np.int64)
            target = int(round(CAT_MEANS[i, c] * 100.0 * len(idx)))
            deficit = target - int(cents.sum())
            if deficit:
                order = np.argsort(raw - cents)  # most rounded-up first
                step = 1 if deficit > 0 else -1
                picks = order[::-1][: abs(deficit)] if deficit > 0 else order[: abs(deficit)]
                cents[picks] += step
            out[i, idx] = cents / 100.0
    return out


def overall_mean(values_by_task):
    return values_by_task.mean(axis=-1)


class Objective:
    """Tolerance-normalized squared error over simulated replicates.

    The Monte Carlo draws are redrawn periodically during annealing so the
    optimizer cannot overfit one noise realization, and the normalization
    bounds are a surrogate that tracks the current matrix (per-task extremes
    about 3.7 sigma out, the expected extreme of ~1e4 draws) plus additive
    corrections calibrated against a real bootstrap run.
    """

    def __init__(self, seed=0, n_rep=192):
        self._rng = np.random.default_rng(seed)
        self.n_rep = n_rep
        self.low_corr = np.zeros(N_TASKS)
        self.high_corr = np.zeros(N_TASKS)
        self.redraw()

    def redraw(self):
        self.Z = self._rng.standard_normal((self.n_rep, N_MODELS, N_TASKS))
        self.W = self._rng.standard_normal((self.n_rep, N_MODELS, N_TASKS))

    def surrogate(self, A):
        s = sigma_pct(A)
        return (A - 3.7 * s).min(axis=0), (A + 3.7 * s).max(axis=0)

    def calibrate_bounds(self, A, real_low, real_high):
        lo, hi = self.surrogate(A)
        self.low_corr = np.asarray(real_low, dtype=float) - lo
        self.high_corr = np.asarray(real_high, dtype=float) - hi

    def stats(self, A):
        V = A[None, :, :] + sigma_pct(A)[None, :, :] * self.Z
        out = {}

        def avr(values, name=None):
            ranks = rankdata(-values, method="average", axis=1)
            per_rep = ranks.mean(axis=2)
            if name is not None:
                q = np.quantile(per_rep[:, :6], [0.025, 0.975], axis=0)
                out[f"{name}_lo"], out[f"{name}_hi"] = q[0], q[1]
            return per_rep.mean(axis=0), per_rep.std(axis=0)

        out["plain"], out["plain_sd"] = avr(V, "plain")
        out["bins"], _ = avr(np.floor(V), "bins")
        out["noise"], _ = avr(V + self.W, "noise")

        lm = np.log(np.clip(V, 0.5, None) / 100.0).mean(axis=2)
        out["gm"] = rankdata(-lm, method="average", axis=1).mean(axis=0)

        lo, hi = self.surrogate(A)
        low = lo + self.low_corr
        high = hi + self.high_corr
        span = high - low
        VN = (V - low[None, None, :]) / span[None, None, :] * 100.0
        out["nbins"], _ = avr(np.floor(VN), "nbins")
        out["nnoise"], _ = avr(VN + self.W, "nnoise")

        AN = (A - low[None, :]) / span[None, :] * 100.0
        out["norm_cat"] = np.stack([AN[:, idx].mean(axis=1) for idx in BLOCKS], axis=1)
        out["norm_overall"] = AN.mean(axis=1)

        # Top-3 pairwise interval half-widths (95% Bonferroni m=3 -> 98.33%
        # per pair, z = 2.394) via the normal approximation, raw and
        # normalized aggregate scales.
        agg = V.mean(axis=2)
        nagg = VN.mean(axis=2)
        pairs = [(0, 1), (0, 2), (1, 2)]
        out["pw"] = np.array([2.394 * (agg[:, a] - agg[:, b]).std()
                              for a, b in pairs])
        out["npw"] = np.array([2.394 * (nagg[:, a] - nagg[:, b]).std()
                               for a, b in pairs])
        return out

    def terms(self, A):
        s = self.stats(A)

        def tol(top, rest):
            t = np.full(N_MODELS, rest)
            t[TOP6] = top
            return t

        specs = [
            ("plain", s["plain"], PLAIN_T, tol(0.06, 0.09), 1.0),
            ("noise", s["noise"], NOISE_T, tol(0.09, 0.13), 1.0),
            ("bins", s["bins"], BINS_T, tol(0.08, 0.40), 1.8),
            ("gm", s["gm"], GM_T, tol(0.15, 0.20), 0.8),
            ("plain_hw", 1.96 * s["plain_sd"], PLAIN_HW_T, np.full(16, 0.10), 0.6),
            ("norm", s["norm_overall"], NORM_OVERALL_T, tol(0.12, 0.25), 1.0),
            ("nnoise", s["nnoise"], NORM_NOISE_T, tol(0.09, 0.15), 1.0),
            ("nbins", s["nbins"], NORM_BINS_T, tol(0.09, 0.25), 1.0),
            ("norm_cat", s["norm_cat"].ravel(), NORM_CAT_T.ravel(),
             np.full(48, 0.7), 0.3),
            ("pw", s["pw"], np.array([0.45, 0.40, 0.40]),
             np.full(3, 0.05), 0.4),
            ("npw", s["npw"], np.array([1.05, 1.00, 0.95]),
             np.full(3, 0.06), 1.2),
        ]
        for name, target, tolerance, weight in (
            ("plain", PLAIN_INT, 0.12, 0.6),
            ("noise", NOISE_INT, 0.15, 0.5),
            ("bins", BINS_INT, 0.15, 1.3),
            ("nnoise", NNOISE_INT, 0.15, 0.4),
            ("nbins", NBINS_INT, 0.15, 0.4),
        ):
            specs.append((f"{name}_lo", s[f"{name}_lo"], target[:, 0],
                          np.full(6, tolerance), weight))
            specs.append((f"{name}_hi", s[f"{name}_hi"], target[:, 1],
                          np.full(6, tolerance), weight))
        return specs

    def __call__(self, A):
        total = 0.0
        for _, value, target, tolerance, weight in self.terms(A):
            total += weight * (((value - target) / tolerance) ** 2).sum()
        return total

    def report(self, A):
        lines = []
        for name, value, target, tolerance, _ in self.terms(A):
            err = np.abs(value - target)
            worst = int(np.argmax(err / tolerance))
            lines.append(
                f"  {name:9s} max|err| {err.max():6.3f} "
                f"(worst {worst}: {value[worst]:7.3f} vs {target[worst]:7.3f})"
            )
        return "\n".join(lines)


def anneal(A, objective, n_moves, seed, t_hi=2.5, t_lo=0.02, redraw_every=1500):
    rng = np.random.default_rng(seed)
    best = A.copy()
    best_j = cur_j = objective(A)
    cur = A.copy()
    # Floor keeps every binomial cell far from zero counts even at N=711.
    lo, hi = 2.5, 98.5
    for k in range(n_moves):
        if redraw_every and k and k % redraw_every == 0:
            # Fresh Monte Carlo draws; re-score both states so the incumbent
            # cannot coast on an overfit noise realization.
            objective.redraw()
            cur_j = objective(cur)
            best_j = objective(best)
        frac = k / max(n_moves - 1, 1)
        temp = t_hi * (t_lo / t_hi) ** frac
        step = 0.25 + 1.3 * temp / t_hi
        i = rng.integers(N_MODELS)
        idx = BLOCKS[rng.integers(3)]
        cand = cur.copy()
        kind = rng.random()
        if kind < 0.05 and len(idx) > 2:
            # Blend the within-block offsets with a fresh draw, re-centered.
            fresh = rng.normal(0.0, 2.0, size=len(idx))
            mix = 0.6 * (cand[i, idx] - cand[i, idx].mean()) + 0.4 * fresh
            cand[i, idx] = cand[i, idx].mean() + (mix - mix.mean())
        elif kind < 0.25:
            # Swap two task values; big rank changes, mean untouched.
            j1, j2 = rng.choice(idx, size=2, replace=False)
            cand[i, j1], cand[i, j2] = cand[i, j2], cand[i, j1]
        elif kind < 0.45:
            # Pull one value next to another model's value on the same task
            # (same-percent bins form or dissolve), compensated in-block.
            # Prefer partners adjacent in the overall standings: only their
            # bucket collisions move the binned-rank averages.
            j1, j2 = rng.choice(idx, size=2, replace=False)
            if rng.random() < 0.7:
                means = cur.mean(axis=1)
                order = np.argsort(np.abs(means - means[i]))
                i2 = int(order[1 + rng.integers(4)])
            else:
                i2 = int(rng.integers(N_MODELS - 1))
                i2 += i2 >= i
            delta = cand[i2, j1] + rng.uniform(-0.15, 0.15) - cand[i, j1]
            cand[i, j1] += delta
            cand[i, j2] -= delta
        else:
            j1, j2 = rng.choice(idx, size=2, replace=False)
            delta = rng.normal(0.0, step)
            cand[i, j1] += delta
            cand[i, j2] -= delta
        if cand[i, idx].min() < lo or cand[i, idx].max() > hi:
            continue
        cand_j = objective(cand)
        if cand_j < cur_j or rng.random() < np.exp(-(cand_j - cur_j) / max(temp, 1e-9)):
            cur, cur_j = cand, cand_j
            if cur_j < best_j:
                best, best_j = cur.copy(), cur_j
    return best, best_j


# ------------------------------------------------------------ verification


def write_fixture(A, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    note = (
        "# Synthetic per-task accuracies. Only category-level means were\n"
        "# published for these 16 models; per-task values are calibrated so\n"
        "# that category means match the published table exactly and the\n"
        "# derived leaderboard/rank statistics reproduce the published\n"
        "# values within documented tolerances. Regenerate with\n"
        "# tools/make_vtab_fixture.py.\n"
    )
    tasks_path = out_dir / "vtab_tasks.csv"
    with tasks_path.open("w") as fh:
        fh.write("# 19 tasks in three categories with test-set sizes.\n")
        fh.write("task,category,test_size\n")
        for task, cat, size in TASKS:
            fh.write(f"{task},{cat},{size}\n")

    acc_path = out_dir / "vtab_accuracy.csv"
    with acc_path.open("w") as fh:
        fh.write(note)
        fh.write("model,task,accuracy_percent\n")
        for i, model in enumerate(MODELS):
            for j, (task, _, _) in enumerate(TASKS):
                fh.write(f"{model},{task},{A[i, j]:.2f}\n")

    pub_path = out_dir / "vtab_published_means.csv"
    with pub_path.open("w") as fh:
        fh.write("# Published category and overall mean accuracies (percent).\n")
        fh.write("model,natural,specialized,structured,overall\n")
        for i, model in enumerate(MODELS):
            nat, sp, st = CAT_MEANS[i]
            fh.write(f"{model},{nat},{sp},{st},{PUBLISHED_OVERALL[i]}\n")
    return tasks_path, acc_path, pub_path


class Check:
    def __init__(self):
        self.failures = []

    def __call__(self, label, ok, detail=""):
        print(f"  [{'PASS' if ok else 'FAIL'}] {label}" + (f" ({detail})" if detail else ""))
        if not ok:
            self.failures.append(label)


def close(value, target, tol):
    return abs(value - target) <= tol


def verify(tasks_path, acc_path):
    check = Check()
    table = load_eval_table(acc_path, tasks_path, format="accuracies+sizes")

    published = {
        m: {
            "natural": CAT_MEANS[i, 0],
            "specialized": CAT_MEANS[i, 1],
            "structured": CAT_MEANS[i, 2],
            "overall": PUBLISHED_OVERALL[i],
        }
        for i, m in enumerate(MODELS)
    }
    report = validate_consistency(table, published, tolerance=0.1)
    check("consistency vs published means (tol 0.1pp)", report.passed,
          f"max gap {report.max_gap():.3f}")

    print("  bootstrapping B=10000 ...")
    store = run_bootstrap(table, B=10_000, seed=0)
    bounds = estimate_bounds(store)

    # Leaderboard: top-6 83.4% bootstrap intervals, +-0.15 per endpoint.
    t3 = {
        "Sup-Rotation-100%": (68.0, 67.8, 68.1),
        "Sup-Exemplar-100%": (67.6, 67.4, 67.9),
        "Sup-100%": (66.4, 66.2, 66.5),
        "Semi-Exemplar-10%": (65.3, 65.1, 65.5),
        "Semi-Rotation-10%": (65.1, 64.9, 65.3),
        "Rotation": (60.4, 60.3, 60.6),
    }
    for model, (pt, lo, hi) in t3.items():
        est = aggregate_interval(store, model)
        # The SR-100% row is pinned at +-0.1 per endpoint, the rest +-0.15.
        tol = 0.1 if model == "Sup-Rotation-100%" else 0.15
        ok = (close(est.point * 100, pt, tol) and close(est.lower * 100, lo, tol)
              and close(est.upper * 100, hi, tol))
        check(f"leaderboard {model}", ok,
              f"{est.point*100:.2f} ({est.lower*100:.2f}, {est.upper*100:.2f})")

    # Normalized leaderboard top-6, +-0.4 per endpoint.
    t3n = {
        "Sup-Rotation-100%": (88.4, 87.9, 88.7),
        "Sup-Exemplar-100%": (89.5, 89.0, 90.0),
        "Sup-100%": (85.1, 84.6, 85.6),
        "Semi-Exemplar-10%": (83.3, 82.9, 83.6),
        "Semi-Rotation-10%": (83.7, 83.3, 84.1),
        "Rotation": (77.6, 77.3, 78.0),
    }
    norm_pts = {}
    for model, (pt, lo, hi) in t3n.items():
        est = aggregate_interval(store, model, normalizer=bounds)
        norm_pts[model] = est.point * 100
        ok = (close(est.point * 100, pt, 0.4) and close(est.lower * 100, lo, 0.4)
              and close(est.upper * 100, hi, 0.4))
        check(f"normalized {model}", ok,
              f"{est.point*100:.2f} ({est.lower*100:.2f}, {est.upper*100:.2f})")
    check("normalization reverses top two",
          norm_pts["Sup-Exemplar-100%"] > norm_pts["Sup-Rotation-100%"])

    # Pairwise top-3 (95%, Bonferroni m=3): raw +-0.2, normalized +-0.4.
    top3 = ["Sup-Rotation-100%", "Sup-Exemplar-100%", "Sup-100%"]
    t4 = {(0, 1): (0.3, -0.1, 0.8), (0, 2): (1.6, 1.2, 2.0), (1, 2): (1.3, 0.9, 1.7)}
    t4n = {(0, 1): (-1.1, -2.1, 0.0), (0, 2): (3.3, 2.3, 4.3), (1, 2): (4.4, 3.4, 5.3)}
    raw_pairs = pairwise_difference_intervals(store, top3)
    norm_pairs = pairwise_difference_intervals(store, top3, normalizer=bounds)
    for (pair, est), (_, nest) in zip(raw_pairs, norm_pairs):
        key = (top3.index(pair[0]), top3.index(pair[1]))
        # The SR-SE pair is pinned tighter (+-0.15) than the rest of Table 4.
        tol = 0.15 if key == (0, 1) else 0.2
        pt, lo, hi = t4[key]
        ok = (close(est.point * 100, pt, tol) and close(est.lower * 100, lo, tol)
              and close(est.upper * 100, hi, tol))
        check(f"pairwise {pair[0]} - {pair[1]}", ok,
              f"{est.point*100:.2f} ({est.lower*100:.2f}, {est.upper*100:.2f})")
        pt, lo, hi = t4n[key]
        ok = (close(nest.point * 100, pt, 0.2) and close(nest.lower * 100, lo, 0.2)
              and close(nest.upper * 100, hi, 0.2))
        check(f"norm pairwise {pair[0]} - {pair[1]}", ok,
              f"{nest.point*100:.2f} ({nest.lower*100:.2f}, {nest.upper*100:.2f})")

    # Rank tables at 95%.
    def rank_table(samples, **kw):
        return {
            scheme: rank_intervals(samples, scheme, level=0.95, **kw)
            for scheme in (RankScheme.BY_AVERAGE, RankScheme.GEOMETRIC_MEAN,
                           RankScheme.AVERAGE_RANK, RankScheme.AVERAGE_RANK_NOISE,
                           RankScheme.AVERAGE_RANK_BINNED)
        }

    raw_ranks = rank_table(store)
    norm_samples = normalize_scores(store.replicates, bounds)
    norm_ranks = rank_table(norm_samples, models=MODELS, seed=0,
                            method="bootstrap-percentile")

    def row(table, scheme, i):
        s = table[scheme][i]
        return s.point, s.interval.lower, s.interval.upper

    for i, target in [(2, 3.0), (5, 6.0)]:
        pt, lo, hi = row(raw_ranks, RankScheme.BY_AVERAGE, i)
        check(f"by-avg point-identified {MODELS[i]}",
              round(pt, 1) == target and lo == target and hi == target,
              f"{pt:.3f} ({lo}, {hi})")
    for i, target in [(0, 2.0), (1, 1.0), (2, 3.0), (5, 6.0)]:
        pt, lo, hi = row(norm_ranks, RankScheme.BY_AVERAGE, i)
        check(f"norm by-avg point-identified {MODELS[i]}",
              round(pt, 1) == target and lo == target and hi == target,
              f"{pt:.3f} ({lo}, {hi})")

    for scheme, targets, label in [
        (RankScheme.AVERAGE_RANK, PLAIN_T, "AvR"),
        (RankScheme.AVERAGE_RANK_NOISE, NOISE_T, "AvR-noise"),
        (RankScheme.AVERAGE_RANK_BINNED, BINS_T, "AvR-bins"),
    ]:
        for i in range(6):
            pt, _, _ = row(raw_ranks, scheme, i)
            tol = 0.15 if (i == 0 and scheme == RankScheme.AVERAGE_RANK) else 0.3
            check(f"{label} {MODELS[i]}", close(pt, targets[i], tol),
                  f"{pt:.2f} vs {targets[i]}")
    for scheme, targets, label in [
        (RankScheme.AVERAGE_RANK, PLAIN_T, "norm AvR"),
        (RankScheme.AVERAGE_RANK_NOISE, NORM_NOISE_T, "norm AvR-noise"),
        (RankScheme.AVERAGE_RANK_BINNED, NORM_BINS_T, "norm AvR-bins"),
    ]:
        for i in range(6):
            pt, _, _ = row(norm_ranks, scheme, i)
            check(f"{label} {MODELS[i]}", close(pt, targets[i], 0.3),
                  f"{pt:.2f} vs {targets[i]}")

    pt, lo, hi = row(raw_ranks, RankScheme.AVERAGE_RANK, 0)
    check("SR-100% AvR interval vs (3.6, 4.0) +-0.25",
          close(lo, 3.6, 0.25) and close(hi, 4.0, 0.25),
          f"({lo:.2f}, {hi:.2f})")

    # Interval endpoints for every AvR column, both tables, at the release
    # gate of +-0.3 per endpoint.
    for section, ranks, tables in [
        ("", raw_ranks, [(RankScheme.AVERAGE_RANK, PLAIN_INT),
                         (RankScheme.AVERAGE_RANK_NOISE, NOISE_INT),
                         (RankScheme.AVERAGE_RANK_BINNED, BINS_INT)]),
        ("norm ", norm_ranks, [(RankScheme.AVERAGE_RANK, PLAIN_INT),
                               (RankScheme.AVERAGE_RANK_NOISE, NNOISE_INT),
                               (RankScheme.AVERAGE_RANK_BINNED, NBINS_INT)]),
    ]:
        for scheme, targets in tables:
            for i in range(6):
                _, lo, hi = row(ranks, scheme, i)
                t_lo, t_hi = targets[i]
                check(
                    f"{section}{scheme.value} {MODELS[i]} endpoints",
                    close(lo, t_lo, 0.3) and close(hi, t_hi, 0.3),
                    f"({lo:.2f}, {hi:.2f}) vs ({t_lo}, {t_hi})",
                )

    gm_pts = [row(raw_ranks, RankScheme.GEOMETRIC_MEAN, i)[0] for i in range(16)]
    print("  geom-mean points:", " ".join(f"{v:.1f}" for v in gm_pts))

    # Analytic vs empirical variance (criterion texture, uniform + skewed).
    acc = table.counts / table.sizes[None, :]
    skewed = WeightVector.per_category(
        {"natural": 0.025, "specialized": 0.025, "structured": 0.95}
    )
    for wname, wv in [("uniform", None), ("0.95-structured", skewed)]:
        i = 0
        w = (np.full(N_TASKS, 1 / N_TASKS) if wv is None
             else wv.as_task_weights(table.tasks))
        analytic = weighted_variance(acc[i], table.sizes, wv, tasks=table.tasks)
        series = store.replicates[:, i, :] @ w
        empirical = float(series.var())
        rel = abs(analytic - empirical) / empirical
        check(f"Var[S] analytic vs empirical ({wname})", rel <= 0.15,
              f"rel err {rel:.3f}")

    # Structured-vertex winner.
    cat_cols = [np.where(CATS == c)[0] for c in range(3)]
    scores = acc[:, cat_cols[2]].mean(axis=1)
    variances = np.array([
        (binomial_variances(acc[i, cat_cols[2]], table.sizes[cat_cols[2]])
         / len(cat_cols[2]) ** 2).sum()
        for i in range(N_MODELS)
    ])
    widx, margin = decide_winner(scores, variances, z=2.0, rho=0.0)
    check("structured-vertex winner is Rotation",
          widx is not None and MODELS[widx] == "Rotation",
          f"winner {MODELS[widx] if widx is not None else 'INDETERMINATE'}, "
          f"margin {margin:.2f}")

    return check.failures


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="src/benchuq/data")
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--rounds", type=int, default=4)
    ap.add_argument("--moves", type=int, default=9000)
    ap.add_argument("--verify-only", action="store_true",
                    help="skip calibration; verify existing CSVs")
    ap.add_argument("--warm-start", action="store_true",
                    help="resume annealing from the CSVs already in --out")
    ap.add_argument("--t-hi", type=float, default=2.5,
                    help="initial annealing temperature")
    args = ap.parse_args(argv)

    out = Path(args.out)
    if args.verify_only:
        failures = verify(out / "vtab_tasks.csv", out / "vtab_accuracy.csv")
        print(f"{len(failures)} failure(s)")
        return 1 if failures else 0

    if args.warm_start:
        vals = {}
        with (out / "vtab_accuracy.csv").open() as fh:
            for line in fh:
                if line.startswith("#") or line.startswith("model,"):
                    continue
                m, t, v = line.strip().split(",")
                vals[(m, t)] = float(v)
        A = np.array([[vals[(m, t)] for t, _, _ in TASKS] for m in MODELS])
    else:
        rng = np.random.default_rng(args.seed)
        spread = np.array([4.0, 2.0, 3.5])  # initial within-category sd by category
        weak = np.array([1.0] * 7 + [1.8] * 9)  # weaker models spread more
        A = np.empty((N_MODELS, N_TASKS))
        for c, idx in enumerate(BLOCKS):
            noise = rng.normal(0.0, 1.0, size=(N_MODELS, len(idx)))
            A[:, idx] = CAT_MEANS[:, [c]] + spread[c] * weak[:, None] * noise
        # Alternate box clipping with mean projection until both hold.
        for _ in range(200):
            nxt = project(np.clip(A, 2.8, 98.2))
            if np.abs(nxt - A).max() < 1e-9:
                A = nxt
                break
            A = nxt

    objective = Objective(seed=args.seed)
    t0 = time.time()
    for r in range(args.rounds):
        if r > 0 or args.warm_start:
            # Measure how far the tracking surrogate sits from the real
            # bootstrap extremes at the current matrix, then keep annealing
            # with the corrected surrogate so bounds never go stale.
            print(f"round {r}: calibrating bounds against a real bootstrap ...")
            snapped = snap_to_cents(A)
            write_fixture(snapped, out)
            table = load_eval_table(out / "vtab_accuracy.csv",
                                    out / "vtab_tasks.csv",
                                    format="accuracies+sizes")
            store = run_bootstrap(table, B=10_000, seed=0)
            b = estimate_bounds(store)
            objective.calibrate_bounds(snapped, b.low * 100.0, b.high * 100.0)
        A, j = anneal(A, objective, args.moves, seed=args.seed + 100 + r,
                      t_hi=args.t_hi)
        print(f"round {r}: objective {j:.1f}  [{time.time()-t0:.0f}s]")
        print(objective.report(A))

    A = snap_to_cents(A)
    tasks_path, acc_path, _ = write_fixture(A, out)
    print("verifying emitted fixture through the real pipeline ...")
    failures = verify(tasks_path, acc_path)
    if failures:
        print(f"{len(failures)} check(s) FAILED")
        return 1
    print("all checks passed")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
