"""Command-line front end over the library operations.

Subcommands: ``ingest``, ``bootstrap``, ``bhm``, ``ranks``, ``simplex``,
``report``, ``simstudy``.  Each statistic in an emitted artifact comes from
exactly one library call; the CLI only orchestrates and formats, so a fixed
configuration produces a byte-identical output tree at any worker count.

Exit codes: 0 success; 1 usage error (bad flags or config); 2 input-data
validation error; 3 computation failure — including reproduction checks
that miss their targets and, under ``--strict``, escalated convergence
warnings.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import report as rpt
from .bhm import (
    McmcConfig,
    PriorSpec,
    credible_interval,
    fit_bhm,
)
from .bootstrap import (
    DEFAULT_REPLICATES,
    DISPLAY_LEVEL,
    aggregate_interval,
    pairwise_difference_intervals,
    run_bootstrap,
)
from .core import EvalTable, TaskSpec, load_eval_table, validate_consistency
from .errors import BenchuqError, ConvergenceWarning, ValidationError
from .fixtures import load_vtab, published_means_from_csv, vtab_published_means
from .normalize import estimate_bounds, normalize_scores
from .ranking import RankScheme, rank_intervals
from .viz import RenderSpec, render_ternary
from .weighting import INDETERMINATE, simplex_scan

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_COMPUTE = 3

# Rank tables are reported at 95% like the published tables, while interval
# leaderboards default to the 83.4% display level.
RANK_LEVEL = 0.95
PAIRWISE_TOP = 3

# Default (z, rho) settings scanned by `simplex`: the plain two-SE rule and
# the correlation-adjusted variant whose threshold shrinks by the same
# factor the SE does at rho = 0.5 (z = 2 / sqrt(2)).
SIMPLEX_SETTINGS = ((2.0, 0.0), (2.0 / np.sqrt(2.0), 0.5))

ALL_SCHEMES = tuple(RankScheme)


class _UsageError(Exception):
    """Bad flag/config combination discovered after parsing."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage problems; our contract says 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------- configuration


def _add_common(p: _Parser, *, data: bool = True, outputs: bool = True) -> None:
    p.add_argument("--config", metavar="JSON",
                   help="JSON file of option defaults; flags override it")
    if data:
        p.add_argument("--eval", dest="eval_path", metavar="CSV",
                       help="evaluation table (default: bundled fixture)")
        p.add_argument("--tasks", dest="task_path", metavar="CSV",
                       help="task/category/size table (required with --eval)")
        p.add_argument("--input-format", choices=("counts", "accuracies+sizes"),
                       default="counts",
                       help="schema of --eval (default: %(default)s)")
    if outputs:
        p.add_argument("--out-dir", default="benchuq-out",
                       help="artifact directory (default: %(default)s)")
        p.add_argument("--formats", default="markdown,csv,json",
                       help="comma list from markdown,csv,json "
                            "(default: %(default)s)")
    p.add_argument("--seed", type=int, default=0,
                   help="root seed for all random streams (default: %(default)s)")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel workers inside the statistics modules; "
                        "results do not depend on this (default: %(default)s)")


def _add_bootstrap_args(p: _Parser) -> None:
    p.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES,
                   help="bootstrap replicates B (default: %(default)s)")
    p.add_argument("--level", type=float, default=DISPLAY_LEVEL,
                   help="interval level for leaderboards (default: %(default)s)")


def _add_mcmc_args(p: _Parser) -> None:
    p.add_argument("--iterations", type=int, default=12_000,
                   help="MCMC iterations per chain (default: %(default)s)")
    p.add_argument("--burn-in", type=int, default=2_000,
                   help="discarded initial iterations (default: %(default)s)")
    p.add_argument("--thinning", type=int, default=5,
                   help="keep every k-th draw (default: %(default)s)")
    p.add_argument("--chains", type=int, default=4,
                   help="independent chains (default: %(default)s)")
    p.add_argument("--prior-rate", type=float, default=1.0 / 10_000,
                   help="rate of the exponential hyperpriors "
                        "(default: %(default)s)")
    p.add_argument("--strict", action="store_true",
                   help="treat convergence warnings as failures (exit 3)")


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(
        prog="benchuq",
        description="Benchmark leaderboards with quantified uncertainty.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    subs: dict[str, _Parser] = {}

    def command(name: str, func, help_text: str, **kw) -> _Parser:
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        subs[name] = p
        _add_common(p, **kw)
        return p

    p = command("ingest", cmd_ingest,
                "Load and validate an evaluation table.", outputs=False)
    p.add_argument("--published", metavar="CSV",
                   help="published means to validate against (default: the "
                        "bundled table when using the bundled fixture)")
    p.add_argument("--tolerance", type=float, default=0.1,
                   help="allowed mean gap in percentage points "
                        "(default: %(default)s)")

    p = command("bootstrap", cmd_bootstrap,
                "Bootstrap interval leaderboard.")
    _add_bootstrap_args(p)
    p.add_argument("--normalized", action="store_true",
                   help="add a normalized-accuracy column")

    p = command("bhm", cmd_bhm,
                "Bayesian hierarchical-model interval leaderboard.")
    p.add_argument("--level", type=float, default=DISPLAY_LEVEL,
                   help="credible level (default: %(default)s)")
    _add_mcmc_args(p)

    p = command("ranks", cmd_ranks,
                "Rank-aggregation tables over bootstrap replicates.")
    p.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES,
                   help="bootstrap replicates B (default: %(default)s)")
    p.add_argument("--level", type=float, default=RANK_LEVEL,
                   help="rank interval level (default: %(default)s)")
    p.add_argument("--scheme", choices=[s.value for s in ALL_SCHEMES],
                   help="emit a single scheme (default: all five)")
    p.add_argument("--normalized", action="store_true",
                   help="also rank normalized accuracies")

    p = command("simplex", cmd_simplex,
                "Category-weight maps of the winning model.")
    p.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES,
                   help="bootstrap replicates for normalization bounds "
                        "(default: %(default)s)")
    p.add_argument("--z", type=float,
                   help="margin threshold in SE units (default: scan both "
                        "built-in settings)")
    p.add_argument("--rho", type=float,
                   help="between-model correlation (default: see --z)")
    p.add_argument("--grid-step", type=float, default=0.05,
                   help="weight grid resolution (default: %(default)s)")
    p.add_argument("--normalized", action="store_true",
                   help="also scan normalized accuracies")

    p = command("report", cmd_report,
                "Full leaderboard report: intervals, pairwise, ranks.")
    _add_bootstrap_args(p)
    p.add_argument("--rank-level", type=float, default=RANK_LEVEL,
                   help="rank interval level (default: %(default)s)")
    p.add_argument("--no-bhm", action="store_true",
                   help="skip the Bayesian hierarchical-model column")
    _add_mcmc_args(p)

    p = command("simstudy", cmd_simstudy,
                "Two-model simulation study with reproduction checks.",
                data=False)
    p.add_argument("--replicates", type=int, default=DEFAULT_REPLICATES,
                   help="bootstrap replicates B (default: %(default)s)")
    p.add_argument("--bootstrap-only", action="store_true",
                   help="print only the bootstrap interval; no MCMC")
    _add_mcmc_args(p)

    return parser, subs


def _apply_config(argv, parser: _Parser, subs: dict[str, _Parser]):
    """Load --config JSON (if any) as defaults for the chosen subcommand."""
    # The command must be the first token; anything else is a usage error
    # that argparse reports on its own.
    command = argv[0] if argv and argv[0] in subs else None
    path = None
    for k, arg in enumerate(argv):
        if arg == "--config":
            if k + 1 >= len(argv):
                break  # argparse reports the missing value
            path = argv[k + 1]
        elif arg.startswith("--config="):
            path = arg.split("=", 1)[1]
    if path is None or command is None:
        return
    try:
        loaded = json.loads(Path(path).read_text())
    except OSError as exc:
        raise _UsageError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(loaded, dict):
        raise _UsageError(f"config {path} must be a JSON object")
    target = subs[command]
    known = {action.dest for action in target._actions}
    defaults = {}
    for key, value in loaded.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise _UsageError(f"config {path}: unknown option {key!r}")
        defaults[dest] = value
    target.set_defaults(**defaults)


# ------------------------------------------------------------------ helpers


def _load_table(args) -> EvalTable:
    if getattr(args, "eval_path", None) or getattr(args, "task_path", None):
        if not (args.eval_path and args.task_path):
            raise _UsageError("--eval and --tasks must be given together")
        return load_eval_table(args.eval_path, args.task_path,
                               format=args.input_format)
    return load_vtab()


def _using_fixture(args) -> bool:
    return not getattr(args, "eval_path", None)


def _formats(args) -> set[str]:
    raw = args.formats
    parts = raw if isinstance(raw, (list, tuple)) else str(raw).split(",")
    formats = {part.strip() for part in parts if part.strip()}
    unknown = formats - set(rpt.REPORT_FORMATS)
    if unknown:
        raise _UsageError(
            f"unknown format(s) {sorted(unknown)}; choose from "
            f"{', '.join(rpt.REPORT_FORMATS)}"
        )
    if not formats:
        raise _UsageError("no output formats selected")
    return formats


def _category_order(table: EvalTable) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for t in table.tasks:
        seen.setdefault(t.category, None)
    return tuple(seen)


def _emit_tables(out_dir: Path, stem: str, headers, rows, csv_headers,
                 csv_rows, formats) -> list[Path]:
    written = []
    if "markdown" in formats:
        written.append(
            rpt.write_text(out_dir / f"{stem}.md", rpt.markdown_table(headers, rows))
        )
    if "csv" in formats:
        written.append(
            rpt.write_text(out_dir / f"{stem}.csv",
                           rpt.csv_table(csv_headers, csv_rows))
        )
    return written


def _finish(out_dir: Path, written: list[Path], formats, doc_name: str,
            payload: dict) -> int:
    if "json" in formats:
        written.append(
            rpt.write_text(out_dir / doc_name, rpt.json_document(payload))
        )
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _mcmc_config(args) -> McmcConfig:
    return McmcConfig(
        total_iterations=args.iterations,
        burn_in=args.burn_in,
        thinning=args.thinning,
        chains=args.chains,
        seed=args.seed,
    )


def _interval_rows(models, columns_by_label):
    """Pair each model with its {column label: estimate} mapping."""
    return [
        (m, {label: column[m] for label, column in columns_by_label.items()
             if m in column})
        for m in models
    ]


def _leaderboard_order(models, estimates) -> list[str]:
    return sorted(models, key=lambda m: (-estimates[m].point, models.index(m)))


def _rank_sections(store, bounds, schemes, level, normalized):
    """Rank tables per scheme, for raw and (optionally) normalized scores."""
    sections = {"raw": {}}
    for scheme in schemes:
        sections["raw"][scheme.value] = rank_intervals(store, scheme, level=level)
    if normalized:
        table = store.source
        samples = normalize_scores(store.replicates, bounds)
        sections["normalized"] = {}
        for scheme in schemes:
            sections["normalized"][scheme.value] = rank_intervals(
                samples, scheme, level=level, models=table.models,
                seed=store.seed, method="bootstrap-percentile",
            )
    return sections


def _rank_table_files(out_dir, sections, formats):
    written = []
    scheme_order = [s.value for s in ALL_SCHEMES]
    for section, by_scheme in sections.items():
        columns = [s for s in scheme_order if s in by_scheme]
        models = [summary.model for summary in by_scheme[columns[0]]]
        rows = []
        for i, model in enumerate(models):
            cells = {c: by_scheme[c][i].interval for c in columns}
            rows.append((model, cells))
        headers, body = rpt.interval_table(rows, columns, scale=1.0, digits=1)
        csv_headers, csv_body = rpt.interval_csv_rows(rows, columns)
        written += _emit_tables(out_dir, f"ranks_{section}", headers, body,
                                csv_headers, csv_body, formats)
    return written


def _rank_payload(sections, level):
    payload = {}
    for section, by_scheme in sections.items():
        payload[section] = {
            scheme: [
                {"model": s.model, "interval": rpt.interval_dict(s.interval)}
                for s in summaries
            ]
            for scheme, summaries in by_scheme.items()
        }
    payload["level"] = level
    return payload


# ------------------------------------------------------------- subcommands


def cmd_ingest(args) -> int:
    table = _load_table(args)
    sizes = table.sizes
    print(
        f"{len(table.models)} models x {len(table.tasks)} tasks; "
        f"test sizes {int(sizes.min())}-{int(sizes.max())}; "
        f"categories: {', '.join(_category_order(table))}"
    )
    published = None
    if args.published:
        published = published_means_from_csv(args.published)
    elif _using_fixture(args):
        published = vtab_published_means()
    if published is None:
        print("no published means supplied; consistency check skipped")
        return EXIT_OK
    report = validate_consistency(table, published, tolerance=args.tolerance)
    print(report.format())
    if not report.passed:
        raise ValidationError(
            f"published-mean check failed: max gap {report.max_gap():.3f} "
            f"exceeds {args.tolerance}"
        )
    print(f"consistency PASS (max gap {report.max_gap():.3f} "
          f"<= {args.tolerance} percentage points)")
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    formats = _formats(args)
    table = _load_table(args)
    out_dir = Path(args.out_dir)
    store = run_bootstrap(table, B=args.replicates, seed=args.seed,
                          workers=args.workers)
    raw = {m: aggregate_interval(store, m, level=args.level)
           for m in table.models}
    columns = {"Avg Acc (bootstrap)": raw}
    if args.normalized:
        bounds = estimate_bounds(store)
        columns["Avg Norm Acc (bootstrap)"] = {
            m: aggregate_interval(store, m, normalizer=bounds, level=args.level)
            for m in table.models
        }
    order = _leaderboard_order(list(table.models), raw)
    rows = _interval_rows(order, columns)
    headers, body = rpt.interval_table(rows, list(columns), scale=100.0)
    csv_headers, csv_body = rpt.interval_csv_rows(rows, list(columns))
    written = _emit_tables(out_dir, "leaderboard_bootstrap", headers, body,
                           csv_headers, csv_body, formats)
    payload = {
        "command": "bootstrap",
        "seed": args.seed,
        "replicates": args.replicates,
        "level": args.level,
        "leaderboard": {
            label: {m: rpt.interval_dict(est) for m, est in column.items()}
            for label, column in columns.items()
        },
    }
    return _finish(out_dir, written, formats, "bootstrap.json", payload)


def cmd_bhm(args) -> int:
    formats = _formats(args)
    table = _load_table(args)
    out_dir = Path(args.out_dir)
    draws = fit_bhm(table, priors=PriorSpec.exponential(args.prior_rate),
                    config=_mcmc_config(args), workers=args.workers)
    column = {m: credible_interval(draws, m, level=args.level)
              for m in table.models}
    order = _leaderboard_order(list(table.models), column)
    rows = _interval_rows(order, {"Avg Acc (BHM)": column})
    headers, body = rpt.interval_table(rows, ["Avg Acc (BHM)"], scale=100.0)
    csv_headers, csv_body = rpt.interval_csv_rows(rows, ["Avg Acc (BHM)"])
    written = _emit_tables(out_dir, "leaderboard_bhm", headers, body,
                           csv_headers, csv_body, formats)
    diag_rows = [
        (m, repr(draws.diagnostics[m]["rhat"]), repr(draws.diagnostics[m]["ess"]))
        for m in table.models
    ]
    if "csv" in formats:
        written.append(rpt.write_text(
            out_dir / "bhm_diagnostics.csv",
            rpt.csv_table(("model", "rhat", "ess"), diag_rows),
        ))
    payload = {
        "command": "bhm",
        "seed": args.seed,
        "level": args.level,
        "mcmc": {
            "iterations": args.iterations,
            "burn_in": args.burn_in,
            "thinning": args.thinning,
            "chains": args.chains,
            "prior_rate": args.prior_rate,
        },
        "leaderboard": {m: rpt.interval_dict(est) for m, est in column.items()},
        "diagnostics": draws.diagnostics,
    }
    return _finish(out_dir, written, formats, "bhm.json", payload)


def cmd_ranks(args) -> int:
    formats = _formats(args)
    table = _load_table(args)
    out_dir = Path(args.out_dir)
    store = run_bootstrap(table, B=args.replicates, seed=args.seed,
                          workers=args.workers)
    bounds = estimate_bounds(store) if args.normalized else None
    schemes = ALL_SCHEMES if args.scheme is None else (RankScheme(args.scheme),)
    sections = _rank_sections(store, bounds, schemes, args.level, args.normalized)
    written = _rank_table_files(out_dir, sections, formats)
    payload = {
        "command": "ranks",
        "seed": args.seed,
        "replicates": args.replicates,
        "ranks": _rank_payload(sections, args.level),
    }
    return _finish(out_dir, written, formats, "ranks.json", payload)


def cmd_simplex(args) -> int:
    formats = _formats(args)
    table = _load_table(args)
    out_dir = Path(args.out_dir)
    if (args.z is None) != (args.rho is None):
        raise _UsageError("--z and --rho must be given together")
    settings = SIMPLEX_SETTINGS if args.z is None else ((args.z, args.rho),)
    categories = _category_order(table)
    variants = [("simplex", None)]
    if args.normalized:
        store = run_bootstrap(table, B=args.replicates, seed=args.seed,
                              workers=args.workers)
        variants.append(("simplex_normalized", estimate_bounds(store)))
    written = []
    fields = []
    for stem, bounds in variants:
        for z, rho in settings:
            field = simplex_scan(table, categories, grid_step=args.grid_step,
                                 z=z, rho=rho, normalizer=bounds)
            fields.append((stem, field))
            name = f"{stem}_{z:g}_{rho:g}"
            if "csv" in formats:
                path = out_dir / f"{name}.csv"
                path.parent.mkdir(parents=True, exist_ok=True)
                field.to_csv(path)
                written.append(path)
            svg = render_ternary(field, RenderSpec())
            written.append(rpt.write_text(out_dir / f"{name}.svg", svg))
    payload = {
        "command": "simplex",
        "grid_step": args.grid_step,
        "settings": [{"z": z, "rho": rho} for z, rho in settings],
        "fields": [
            {
                "variant": stem,
                "z": field.z,
                "rho": field.rho,
                "categories": list(field.categories),
                "winners": list(field.winners()),
                "indeterminate_cells": sum(
                    1 for c in field.cells if c.winner == INDETERMINATE
                ),
            }
            for stem, field in fields
        ],
    }
    return _finish(out_dir, written, formats, "simplex.json", payload)


def cmd_report(args) -> int:
    formats = _formats(args)
    table = _load_table(args)
    out_dir = Path(args.out_dir)
    store = run_bootstrap(table, B=args.replicates, seed=args.seed,
                          workers=args.workers)
    bounds = estimate_bounds(store)

    boot = {m: aggregate_interval(store, m, level=args.level)
            for m in table.models}
    norm = {m: aggregate_interval(store, m, normalizer=bounds, level=args.level)
            for m in table.models}
    columns = {"Avg Acc (bootstrap)": boot}
    bhm_diag = None
    if not args.no_bhm:
        draws = fit_bhm(table, priors=PriorSpec.exponential(args.prior_rate),
                        config=_mcmc_config(args), workers=args.workers)
        columns["Avg Acc (BHM)"] = {
            m: credible_interval(draws, m, level=args.level)
            for m in table.models
        }
        bhm_diag = draws.diagnostics
    columns["Avg Norm Acc (bootstrap)"] = norm

    order = _leaderboard_order(list(table.models), boot)
    rows = _interval_rows(order, columns)
    headers, body = rpt.interval_table(rows, list(columns), scale=100.0)
    csv_headers, csv_body = rpt.interval_csv_rows(rows, list(columns))
    written = _emit_tables(out_dir, "leaderboard", headers, body,
                           csv_headers, csv_body, formats)

    top = order[:PAIRWISE_TOP]
    pair_columns = {
        "Diff (bootstrap)": dict(pairwise_difference_intervals(store, top)),
        "Diff (normalized)": dict(
            pairwise_difference_intervals(store, top, normalizer=bounds)
        ),
    }
    pair_names = list(next(iter(pair_columns.values())))
    pair_rows = [
        (f"{a} - {b}", {label: col[(a, b)] for label, col in pair_columns.items()})
        for a, b in pair_names
    ]
    headers, body = rpt.interval_table(pair_rows, list(pair_columns),
                                       scale=100.0, label="Pair")
    csv_headers, csv_body = rpt.interval_csv_rows(pair_rows, list(pair_columns))
    csv_headers[0] = "pair"
    written += _emit_tables(out_dir, "pairwise", headers, body,
                            csv_headers, csv_body, formats)

    sections = _rank_sections(store, bounds, ALL_SCHEMES, args.rank_level, True)
    written += _rank_table_files(out_dir, sections, formats)

    payload = {
        "command": "report",
        "seed": args.seed,
        "replicates": args.replicates,
        "level": args.level,
        "rank_level": args.rank_level,
        "leaderboard": {
            label: {m: rpt.interval_dict(est) for m, est in column.items()}
            for label, column in columns.items()
        },
        "pairwise": {
            label: {f"{a} - {b}": rpt.interval_dict(est)
                    for (a, b), est in column.items()}
            for label, column in pair_columns.items()
        },
        "ranks": _rank_payload(sections, args.rank_level),
    }
    if bhm_diag is not None:
        payload["bhm_diagnostics"] = bhm_diag
    return _finish(out_dir, written, formats, "report.json", payload)


def simulation_study_table() -> EvalTable:
    """Two models, three tasks; model B is better where N is informative."""
    tasks = (
        TaskSpec("task-1", "synthetic", 200),
        TaskSpec("task-2", "synthetic", 10_000),
        TaskSpec("task-3", "synthetic", 20_000),
    )
    counts = np.array([[100, 5_000, 10_000], [115, 5_000, 10_000]])
    return EvalTable(models=("A", "B"), tasks=tasks, counts=counts)


# Truncated-normal hyperpriors centered so the hierarchy believes both
# models are near 50% but B slightly better (2100 vs 2000 pseudo-successes).
SIMSTUDY_PRIORS = {
    "A": (PriorSpec.truncated_normal(2000.0, 10.0),
          PriorSpec.truncated_normal(2000.0, 10.0)),
    "B": (PriorSpec.truncated_normal(2100.0, 10.0),
          PriorSpec.truncated_normal(1900.0, 10.0)),
}

SIMSTUDY_TARGET = (-0.021, -0.003)
SIMSTUDY_TOLERANCE = 0.005


def cmd_simstudy(args) -> int:
    formats = _formats(args)
    out_dir = Path(args.out_dir)
    table = simulation_study_table()
    lines = []
    checks = []

    def say(text):
        lines.append(text)
        print(text)

    def check(label, ok):
        checks.append((label, bool(ok)))
        say(f"[{'PASS' if ok else 'FAIL'}] {label}")

    store = run_bootstrap(table, B=args.replicates, seed=args.seed,
                          workers=args.workers)
    ((_, boot),) = pairwise_difference_intervals(store, ["A", "B"], level=0.95)
    say(f"bootstrap 95% interval for the A-B accuracy difference: "
        f"{rpt.format_interval(boot, digits=3)}")
    check("bootstrap interval contains 0", boot.lower <= 0.0 <= boot.upper)

    payload = {
        "command": "simstudy",
        "seed": args.seed,
        "replicates": args.replicates,
        "bootstrap": rpt.interval_dict(boot),
    }
    if not args.bootstrap_only:
        with warnings.catch_warnings():
            if args.strict:
                warnings.simplefilter("error", ConvergenceWarning)
            draws = fit_bhm(table, priors=SIMSTUDY_PRIORS,
                            config=_mcmc_config(args), workers=args.workers)
        a_minus_b = credible_interval(draws, "A", other="B", level=0.95)
        say(f"BHM 95% credible interval for the A-B theta difference: "
            f"{rpt.format_interval(a_minus_b, digits=3)}")
        check("BHM interval is strictly negative (B better)",
              a_minus_b.upper < 0.0)
        lo, hi = SIMSTUDY_TARGET
        check(
            f"BHM endpoints within {SIMSTUDY_TOLERANCE} of ({lo}, {hi})",
            abs(a_minus_b.lower - lo) <= SIMSTUDY_TOLERANCE
            and abs(a_minus_b.upper - hi) <= SIMSTUDY_TOLERANCE,
        )
        payload["bhm"] = rpt.interval_dict(a_minus_b)
        payload["diagnostics"] = draws.diagnostics
    payload["checks"] = [{"label": label, "passed": ok} for label, ok in checks]

    written = []
    if "markdown" in formats or "csv" in formats:
        written.append(rpt.write_text(out_dir / "simstudy.txt",
                                      "\n".join(lines) + "\n"))
    code = _finish(out_dir, written, formats, "simstudy.json", payload)
    if any(not ok for _, ok in checks):
        return EXIT_COMPUTE
    return code


# ------------------------------------------------------------------- driver


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        _apply_config(argv, parser, subs)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # argparse already printed its message
            return int(exc.code or 0)
        if getattr(args, "command", None) is None:
            parser.print_usage(sys.stderr)
            print(f"{parser.prog}: error: a command is required", file=sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except _UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(f"{parser.prog}: invalid input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ConvergenceWarning as exc:
        print(f"{parser.prog}: convergence failure: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except BenchuqError as exc:
        print(f"{parser.prog}: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    raise SystemExit(main())
