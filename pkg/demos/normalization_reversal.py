"""
Score normalization can reorder a leaderboard
=============================================

Normalized accuracy maps each task onto [0, 1] between estimated per-task
score bounds, so excelling on hard tasks (where the observed floor is low)
counts for more.  On the bundled grid this reverses the top two models:
the raw leader wins on easy headroom, the runner-up on hard tasks.
"""

from benchuq import load_vtab
from benchuq.bootstrap import aggregate_interval, run_bootstrap
from benchuq.normalize import estimate_bounds, normalize_scores
from benchuq.report import format_interval

table = load_vtab()
store = run_bootstrap(table, B=2_000, seed=0)

# Bounds are the per-task extremes over every model and every replicate —
# an empirical stand-in for the best and worst achievable scores.
bounds = estimate_bounds(store)
spans = (bounds.high - bounds.low) * 100.0
print(f"task score spans: {spans.min():.1f} to {spans.max():.1f} points")

# Raw and normalized aggregate intervals for the top two models.
top_two = ("Sup-Rotation-100%", "Sup-Exemplar-100%")
print()
print(f"{'Model':20s}{'Avg Acc':>22s}{'Avg Norm Acc':>22s}")
for m in top_two:
    raw = aggregate_interval(store, m)
    norm = aggregate_interval(store, m, normalizer=bounds)
    print(f"{m:20s}{format_interval(raw, scale=100.0):>22s}"
          f"{format_interval(norm, scale=100.0):>22s}")

# Within a task nothing moves — the map is affine and increasing — but the
# across-task average weights tasks by where their floor sits.
import numpy as np
from benchuq.core import accuracy_of

acc = accuracy_of(table).values
norm_acc = normalize_scores(acc, bounds)
j = int(np.argmin(acc.max(axis=0)))  # the hardest task
task = table.tasks[j].task_id
print()
print(f"hardest task ({task}): best raw accuracy {acc[:, j].max():.1%}, "
      f"best normalized score {norm_acc[:, j].max():.2f}")
