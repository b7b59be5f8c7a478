import gzip
import math

import numpy as np
import pytest

from benchuq.bootstrap import (
    IntervalEstimate,
    ReplicateStore,
    aggregate_interval,
    draw_replicate,
    pairwise_difference_intervals,
    percentile_interval,
    run_bootstrap,
)
from benchuq.core import EvalTable, TaskSpec
from benchuq.errors import CapacityError, ValidationError
from benchuq.normalize import estimate_bounds
from benchuq.weighting import UNWEIGHTED, WeightVector, weighted_variance


def table_of(counts, sizes, categories=None):
    counts = np.atleast_2d(np.asarray(counts))
    categories = categories or ["c"] * len(sizes)
    tasks = tuple(
        TaskSpec(f"t{j}", categories[j], n) for j, n in enumerate(sizes)
    )
    models = tuple(chr(ord("A") + i) for i in range(counts.shape[0]))
    return EvalTable(models=models, tasks=tasks, counts=counts)


def sim_study_table():
    # Two models on three tasks: (100 vs 115 of 200), then two huge ties.
    return table_of(
        [[100, 5000, 10000], [115, 5000, 10000]], [200, 10000, 20000]
    )


def quantile_type7(values, p):
    # Independent re-implementation of inclusive linear interpolation.
    s = sorted(values)
    h = (len(s) - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (h - lo) * (s[hi] - s[lo])


class TestIntervalEstimate:
    def test_bounds_order_enforced(self):
        with pytest.raises(ValidationError, match="out of order"):
            IntervalEstimate(0.5, 0.6, 0.4, 0.95, "bootstrap-percentile")

    def test_level_range_enforced(self):
        with pytest.raises(ValidationError, match="level"):
            IntervalEstimate(0.5, 0.4, 0.6, 1.0, "bootstrap-percentile")

    def test_method_tag_enforced(self):
        with pytest.raises(ValidationError, match="method"):
            IntervalEstimate(0.5, 0.4, 0.6, 0.95, "jackknife")


class TestDrawReplicate:
    def test_zero_count_stays_zero(self):
        table = table_of([[0, 50]], [100, 100])
        for r in range(20):
            assert draw_replicate(table, r, seed=1)[0, 0] == 0.0

    def test_full_count_stays_one(self):
        table = table_of([[100, 50]], [100, 100])
        for r in range(20):
            assert draw_replicate(table, r, seed=1)[0, 0] == 1.0

    def test_replicate_is_pure_function_of_inputs(self):
        table = sim_study_table()
        a = draw_replicate(table, 7, seed=42)
        b = draw_replicate(table, 7, seed=42)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, draw_replicate(table, 8, seed=42))
        assert not np.array_equal(a, draw_replicate(table, 7, seed=43))

    def test_moments_match_binomial_oracle(self):
        # Y=100 of N=200: mean 0.5, variance 0.5*0.5/200 = 0.00125.
        table = table_of([[100]], [200])
        store = run_bootstrap(table, B=100_000, seed=5)
        accs = store.replicates[:, 0, 0]
        assert abs(accs.mean() - 0.5) < 0.002
        assert abs(accs.var() - 0.00125) < 0.1 * 0.00125


class TestRunBootstrap:
    def test_single_replicate_equals_draw_replicate(self):
        table = sim_study_table()
        store = run_bootstrap(table, B=1, seed=9)
        assert np.array_equal(store.replicates[0], draw_replicate(table, 0, seed=9))

    def test_worker_count_does_not_change_content(self):
        table = sim_study_table()
        serial = run_bootstrap(table, B=1000, seed=11, workers=1)
        threaded = run_bootstrap(table, B=1000, seed=11, workers=8)
        assert np.array_equal(serial.replicates, threaded.replicates)

    def test_replicate_means_track_observed_accuracies(self):
        table = sim_study_table()
        store = run_bootstrap(table, B=10_000, seed=2)
        observed = table.counts / table.sizes[None, :]
        assert np.all(np.abs(store.replicates.mean(axis=0) - observed) < 0.003)

    def test_capacity_error_reports_sizes(self):
        table = sim_study_table()
        with pytest.raises(CapacityError) as err:
            run_bootstrap(table, B=10_000, seed=0, max_bytes=1024)
        assert err.value.requested_bytes == 10_000 * 2 * 3 * 8
        assert err.value.available_bytes == 1024

    def test_invalid_b_rejected(self):
        with pytest.raises(ValidationError, match=">= 1"):
            run_bootstrap(sim_study_table(), B=0)

    def test_store_rejects_out_of_range_accuracies(self):
        with pytest.raises(ValidationError, match=r"\[0, 1\]"):
            ReplicateStore(
                replicates=np.full((1, 1, 1), 1.5), seed=0, source=sim_study_table()
            )

    def test_csv_dump_roundtrips_values(self, tmp_path):
        table = sim_study_table()
        store = run_bootstrap(table, B=3, seed=4)
        plain = tmp_path / "reps.csv"
        store.to_csv(plain)
        lines = plain.read_text().splitlines()
        assert lines[0] == "replicate,model,task,accuracy"
        assert len(lines) == 1 + 3 * 2 * 3
        r, model, task, acc = lines[1].split(",")
        i = table.models.index(model)
        j = [t.task_id for t in table.tasks].index(task)
        assert float(acc) == store.replicates[int(r), i, j]

        zipped = tmp_path / "reps.csv.gz"
        store.to_csv(zipped)
        with gzip.open(zipped, "rt") as fh:
            assert fh.read() == plain.read_text()


class TestPercentileInterval:
    def test_constant_samples(self):
        assert percentile_interval(np.full(50, 3.25), 0.834) == (3.25, 3.25)

    def test_one_to_hundred_at_display_level(self):
        # Inclusive linear interpolation on {1..100} at 83.4%:
        # h_low = 99*0.083 = 8.217 -> 9.217; upper mirrors to 91.783.
        lower, upper = percentile_interval(np.arange(1.0, 101.0), 0.834)
        assert lower == pytest.approx(9.217, abs=1e-9)
        assert upper == pytest.approx(91.783, abs=1e-9)

    def test_matches_independent_type7_oracle(self):
        gen = np.random.default_rng(17)
        for n in (2, 5, 37, 1000):
            samples = gen.standard_normal(n)
            for level in (0.5, 0.834, 0.95, 0.99):
                lower, upper = percentile_interval(samples, level)
                assert lower == pytest.approx(
                    quantile_type7(samples, (1 - level) / 2), abs=1e-12
                )
                assert upper == pytest.approx(
                    quantile_type7(samples, 1 - (1 - level) / 2), abs=1e-12
                )

    def test_symmetric_samples_give_symmetric_interval(self):
        samples = np.concatenate([-np.arange(1.0, 51.0), np.arange(1.0, 51.0)])
        lower, upper = percentile_interval(samples, 0.95)
        assert lower == pytest.approx(-upper, abs=1e-12)

    def test_singleton_rejected(self):
        with pytest.raises(ValidationError, match="at least 2"):
            percentile_interval(np.array([1.0]), 0.95)

    def test_bad_level_rejected(self):
        with pytest.raises(ValidationError, match="level"):
            percentile_interval(np.arange(10.0), 1.0)


class TestAggregateInterval:
    def test_zero_variance_store_degenerates(self):
        table = table_of([[0, 10]], [10, 10])
        store = run_bootstrap(table, B=200, seed=1)
        est = aggregate_interval(store, "A", level=0.834)
        assert est.lower == est.point == est.upper == 0.5
        assert est.method == "bootstrap-percentile"

    def test_huge_test_sets_collapse_width(self):
        n = 10**8
        table = table_of([[int(0.4 * n), int(0.6 * n)]], [n, n])
        store = run_bootstrap(table, B=2_000, seed=3)
        est = aggregate_interval(store, "A", level=0.95)
        assert est.point == pytest.approx(0.5, abs=1e-3)
        assert est.upper - est.lower < 1e-3

    def test_narrow_level_nested_in_wide_level(self):
        store = run_bootstrap(sim_study_table(), B=2_000, seed=8)
        narrow = aggregate_interval(store, "B", level=0.834)
        wide = aggregate_interval(store, "B", level=0.95)
        assert wide.lower <= narrow.lower <= narrow.upper <= wide.upper

    def test_vertex_weights_reduce_to_single_task(self):
        store = run_bootstrap(sim_study_table(), B=500, seed=2)
        wv = WeightVector(weights=np.array([1.0, 0.0, 0.0]))
        est = aggregate_interval(store, "A", weights=wv, level=0.9)
        task_accs = store.replicates[:, 0, 0]
        assert est.point == pytest.approx(task_accs.mean(), abs=1e-12)
        lower, upper = percentile_interval(task_accs, 0.9)
        assert (est.lower, est.upper) == (lower, upper)

    def test_unknown_model_rejected(self):
        store = run_bootstrap(sim_study_table(), B=10, seed=1)
        with pytest.raises(KeyError, match="Z"):
            aggregate_interval(store, "Z")

    def test_normalizer_and_per_replicate_flag_are_exclusive(self):
        store = run_bootstrap(sim_study_table(), B=10, seed=1)
        bounds = estimate_bounds(store)
        with pytest.raises(ValidationError, match="mutually exclusive"):
            aggregate_interval(store, "A", normalizer=bounds, per_replicate_bounds=True)

    def test_store_bound_normalization_stays_inside_unit_interval(self):
        table = table_of([[100, 5000], [115, 5500], [80, 4000]], [200, 10000])
        store = run_bootstrap(table, B=1_000, seed=6)
        bounds = estimate_bounds(store)
        for model in ("A", "B", "C"):
            est = aggregate_interval(store, model, normalizer=bounds)
            assert 0.0 <= est.lower <= est.point <= est.upper <= 1.0

    def test_per_replicate_bounds_pin_extreme_models(self):
        # With per-replicate extremes, the best model on every task of every
        # replicate normalizes to exactly 1.
        table = table_of([[190, 195], [100, 100], [10, 5]], [200, 200])
        store = run_bootstrap(table, B=200, seed=7)
        est = aggregate_interval(store, "A", per_replicate_bounds=True)
        assert est.point == pytest.approx(1.0, abs=1e-12)

    def test_empirical_variance_matches_analytic_formula(self):
        # Analytic Var[S] under independence vs replicate variance at B=10k.
        table = table_of(
            [[100, 600, 2500, 400], [150, 700, 3000, 500]],
            [200, 1000, 5000, 711],
        )
        store = run_bootstrap(table, B=10_000, seed=12)
        acc = table.counts / table.sizes[None, :]
        for i, model in enumerate(table.models):
            stats = store.replicates[:, i, :].mean(axis=1)
            analytic = weighted_variance(acc[i], table.sizes, UNWEIGHTED)
            assert stats.var() == pytest.approx(analytic, rel=0.15)


class TestPairwiseDifferences:
    def test_self_difference_is_exactly_zero(self):
        store = run_bootstrap(sim_study_table(), B=300, seed=5)
        [(pair, est)] = pairwise_difference_intervals(store, ["A", "A"], level=0.95)
        assert pair == ("A", "A")
        assert (est.point, est.lower, est.upper) == (0.0, 0.0, 0.0)

    def test_bonferroni_level_adjustment(self):
        table = table_of([[100, 600], [150, 700], [120, 650]], [200, 1000])
        store = run_bootstrap(table, B=500, seed=5)
        results = pairwise_difference_intervals(
            store, ["A", "B", "C"], level=0.95, comparisons=3
        )
        assert len(results) == 3
        for _, est in results:
            assert est.level == pytest.approx(1 - 0.05 / 3)

    def test_explicit_budget_below_pair_count_rejected(self):
        store = run_bootstrap(sim_study_table(), B=50, seed=5)
        with pytest.raises(ValidationError, match="budget"):
            pairwise_difference_intervals(store, ["A", "B"], comparisons=0)

    def test_single_model_rejected(self):
        store = run_bootstrap(sim_study_table(), B=50, seed=5)
        with pytest.raises(ValidationError, match="at least two"):
            pairwise_difference_intervals(store, ["A"])

    def test_sim_study_interval_contains_zero(self):
        # A trails B only on the small task; the difference is not
        # significant at 95%.
        store = run_bootstrap(sim_study_table(), B=4_000, seed=10)
        [(_, est)] = pairwise_difference_intervals(store, ["A", "B"], level=0.95)
        assert est.point == pytest.approx(-0.025, abs=0.002)
        assert est.lower < 0.0 < est.upper

    def test_wider_bonferroni_interval_contains_unadjusted(self):
        store = run_bootstrap(sim_study_table(), B=2_000, seed=10)
        [(_, single)] = pairwise_difference_intervals(store, ["A", "B"], level=0.95)
        [(_, adjusted)] = pairwise_difference_intervals(
            store, ["A", "B"], level=0.95, comparisons=5
        )
        assert adjusted.lower <= single.lower <= single.upper <= adjusted.upper
