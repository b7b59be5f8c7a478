"""
When the bootstrap cannot separate two models
=============================================

Two models answer three tasks; model B is genuinely better on the small
first task (115/200 vs 100/200) and identical elsewhere.  Averaging over
tasks dilutes that edge below bootstrap resolution, while the hierarchical
model pools evidence per model and resolves the difference.
"""

import numpy as np

from benchuq.bhm import McmcConfig, PriorSpec, credible_interval, fit_bhm
from benchuq.bootstrap import pairwise_difference_intervals, run_bootstrap
from benchuq.core import EvalTable, TaskSpec
from benchuq.report import format_interval

tasks = (
    TaskSpec("task-1", "synthetic", 200),
    TaskSpec("task-2", "synthetic", 10_000),
    TaskSpec("task-3", "synthetic", 20_000),
)
counts = np.array([[100, 5_000, 10_000], [115, 5_000, 10_000]])
table = EvalTable(models=("A", "B"), tasks=tasks, counts=counts)

# Bootstrap: the 95% interval for the A - B mean difference straddles 0.
store = run_bootstrap(table, B=10_000, seed=0)
((_, boot),) = pairwise_difference_intervals(store, ["A", "B"], level=0.95)
print(f"bootstrap A - B: {format_interval(boot, digits=3)}")
print("  -> cannot conclude either model is better")

# Hierarchical model: tight truncated-normal hyperpriors encode that each
# model has one underlying ability across tasks, so the 15-success edge on
# task 1 is evidence about model B everywhere.
priors = {
    "A": (PriorSpec.truncated_normal(2000.0, 10.0),
          PriorSpec.truncated_normal(2000.0, 10.0)),
    "B": (PriorSpec.truncated_normal(2100.0, 10.0),
          PriorSpec.truncated_normal(1900.0, 10.0)),
}
draws = fit_bhm(table, priors=priors, config=McmcConfig())
diff = credible_interval(draws, "A", other="B", level=0.95)
print(f"BHM A - B:       {format_interval(diff, digits=3)}")
print("  -> strictly negative: model B is better")
