"""Command-line interface and benchmark harness.

Subcommands::

    synth     write a synthetic Gaussian-blob dataset
    cluster   run one algorithm over several seeds and tabulate metrics/timings
    sweep     vary block size or alpha and tabulate the seed-averaged results
    robust    append uninformative features and tabulate ACC per algorithm
    fitdiag   emit Q-Q plot data for one cluster's fitted tail

Result tables are comma-separated with a header row. Every column except the
timing ones is a deterministic function of the flags.

Exit status: 0 success, 1 I/O or data error, 2 usage error, 3 numerical
failure (every tail fit in the final iteration fell back).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cluster_core import ALGORITHMS, ClusterOutcome, RunConfig, run_algorithm
from .data_io import (
    Dataset,
    SynthConfig,
    add_uninformative,
    gen_synthetic,
    load_dataset,
    save_csv,
    standardize,
)
from .errors import EvtKMeansError, InputError
from .metrics import MetricReport, evaluate, qq_diagnostic
from .mle_fit import FitOptions
from .tail_extract import BmmConfig, PotConfig

logger = logging.getLogger("evtkmeans")

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

METRIC_COLUMNS = ["acc", "nmi", "ari", "silhouette"]
TIMING_COLUMNS = ["total", "mle_total", "mle_avg", "cluster_total", "cluster_avg"]
RESULT_COLUMNS = ["algorithm", "dataset", "seed", *METRIC_COLUMNS, "iterations", "converged", *TIMING_COLUMNS]


class UsageError(Exception):
    pass


@dataclass
class BenchResult:
    algorithm: str
    dataset: str
    seed: int | str
    metrics: MetricReport
    timings: dict[str, float]
    iterations: float
    converged: float

    def row(self) -> dict:
        out = {"algorithm": self.algorithm, "dataset": self.dataset, "seed": self.seed}
        out.update({m: getattr(self.metrics, m) for m in METRIC_COLUMNS})
        out["iterations"] = self.iterations
        out["converged"] = self.converged
        out.update(self.timings)
        return out


def _timings(outcome: ClusterOutcome) -> dict[str, float]:
    t = outcome.timings
    it = max(outcome.iterations, 1)
    return {
        "total": t.mle_total + t.cluster_total,
        "mle_total": t.mle_total,
        "mle_avg": t.mle_total / it,
        "cluster_total": t.cluster_total,
        "cluster_avg": t.cluster_total / it,
    }


def _mean_result(results: list[BenchResult], seed="mean") -> BenchResult:
    first = results[0]

    def avg(values):
        return float(np.mean(values))

    metrics = MetricReport(*(avg([getattr(r.metrics, m) for r in results]) for m in METRIC_COLUMNS))
    timings = {c: avg([r.timings[c] for r in results]) for c in TIMING_COLUMNS}
    return BenchResult(
        first.algorithm,
        first.dataset,
        seed,
        metrics,
        timings,
        avg([r.iterations for r in results]),
        avg([r.converged for r in results]),
    )


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def _write_table(path, columns: list[str], rows: list[dict]) -> None:
    if path in (None, "-"):
        _emit_table(sys.stdout, columns, rows)
        return
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        _emit_table(fh, columns, rows)


def _emit_table(fh, columns, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])


def _write_summary(path, payload: dict) -> None:
    if path:
        with Path(path).open("w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=_fmt)
            fh.write("\n")


# ---------------------------------------------------------------------------
# Running


def _run_config(args, **override) -> RunConfig:
    values = {
        "k": args.k,
        "init": args.init,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "seed": args.seed,
        "block_size": args.block_size,
        "alpha": args.alpha,
    }
    values.update(override)
    try:
        return RunConfig(
            k=values["k"],
            init=values["init"],
            tol=values["tol"],
            max_iter=values["max_iter"],
            seed=values["seed"],
            bmm=BmmConfig(int(values["block_size"])),
            pot=PotConfig(float(values["alpha"])),
            fit=FitOptions(),
        )
    except (InputError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _repeat(algorithm: str, ds: Dataset, args, **override) -> tuple[list[BenchResult], bool]:
    """Run ``args.repeats`` seeds (base seed + repeat index)."""
    if algorithm not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}")
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    if ds.n < args.k:
        raise UsageError(f"--k {args.k} exceeds the number of samples ({ds.n})")
    results = []
    failed = False
    for r in range(args.repeats):
        cfg = _run_config(args, seed=args.seed + r, **override)
        outcome = run_algorithm(algorithm, ds, cfg)
        failed |= outcome.numerical_failure
        metrics = evaluate(ds.x, ds.y, outcome.labels)
        results.append(
            BenchResult(
                algorithm,
                ds.name,
                cfg.seed,
                metrics,
                _timings(outcome),
                outcome.iterations,
                float(outcome.converged),
            )
        )
        logger.info("%s seed=%d ari=%.4f iterations=%d", algorithm, cfg.seed, metrics.ari, outcome.iterations)
    return results, failed


def _load(args) -> Dataset:
    try:
        ds = load_dataset(args.input, args.format, has_labels=not args.no_labels, delimiter=args.delimiter)
    except (OSError, EvtKMeansError) as exc:
        raise _IoFailure(str(exc)) from None
    if args.standardize:
        logger.info("standardizing %d columns to unit variance", ds.d)
        ds = standardize(ds)
    return ds


class _IoFailure(Exception):
    pass


# ---------------------------------------------------------------------------
# Commands


def cmd_synth(args) -> int:
    cfg = SynthConfig(n=args.n, k=args.k, d=args.d, sigma=args.sigma, seed=args.seed)
    ds = gen_synthetic(cfg)
    save_csv(ds, args.output)
    logger.info("wrote %s (%d x %d)", args.output, ds.n, ds.d)
    return EXIT_OK


def cmd_cluster(args) -> int:
    ds = _load(args)
    results, failed = _repeat(args.algorithm, ds, args)
    rows = [r.row() for r in results] + [_mean_result(results).row()]
    _write_table(args.output, RESULT_COLUMNS, rows)
    _write_summary(args.summary, {"command": "cluster", "config": _config_dict(args), "mean": rows[-1]})
    return EXIT_NUMERIC if failed else EXIT_OK


SWEEP_PARAMS = {"block_size": int, "alpha": float}


def cmd_sweep(args) -> int:
    ds = _load(args)
    cast = SWEEP_PARAMS[args.param]
    try:
        values = sorted({cast(v) for v in args.values.split(",") if v.strip()})
    except ValueError:
        raise UsageError(f"--values must be a comma-separated list of {cast.__name__}") from None
    if not values:
        raise UsageError("--values is empty")
    rows = []
    failed = False
    for value in values:
        results, f = _repeat(args.algorithm, ds, args, **{args.param: value})
        failed |= f
        row = _mean_result(results, seed=args.seed).row()
        row.update({"param": args.param, "value": value, "repeats": args.repeats})
        rows.append(row)
    _write_table(args.output, ["param", "value", "repeats", *RESULT_COLUMNS], rows)
    _write_summary(args.summary, {"command": "sweep", "config": _config_dict(args), "rows": rows})
    return EXIT_NUMERIC if failed else EXIT_OK


def _int_list(text: str, flag: str) -> list[int]:
    try:
        out = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag} must be a comma-separated list of integers") from None
    if not out or min(out) < 0:
        raise UsageError(f"{flag} needs non-negative integers")
    return out


def cmd_robust(args) -> int:
    base = gen_synthetic(SynthConfig(n=args.n, k=args.k, d=args.d, sigma=args.sigma, seed=args.data_seed))
    extras = _int_list(args.extra_dims, "--extra-dims")
    algorithms = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    rows = []
    failed = False
    for extra in extras:
        ds = add_uninformative(base, extra, np.random.default_rng((args.data_seed, extra)))
        if args.standardize:
            ds = standardize(ds)
        for algo in algorithms:
            results, f = _repeat(algo, ds, args)
            failed |= f
            row = _mean_result(results, seed=args.seed).row()
            row["extra_dims"] = extra
            rows.append(row)
    _write_table(args.output, ["extra_dims", *RESULT_COLUMNS], rows)
    _write_summary(args.summary, {"command": "robust", "config": _config_dict(args), "rows": rows})
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_fitdiag(args) -> int:
    if args.algorithm not in ("gev", "gpd"):
        raise UsageError("fitdiag needs --algorithm gev or gpd")
    if not 0 <= args.cluster_index < args.k:
        raise UsageError(f"--cluster-index must lie in [0, {args.k})")
    ds = _load(args)
    if ds.n < args.k:
        raise UsageError(f"--k {args.k} exceeds the number of samples ({ds.n})")
    outcome = run_algorithm(args.algorithm, ds, _run_config(args))
    tail = outcome.model.tails[args.cluster_index]
    if tail is None or tail.sample.size < 3:
        logger.error("cluster %d has too few tail samples for a Q-Q diagnostic", args.cluster_index)
        return EXIT_NUMERIC
    diag = qq_diagnostic(tail.sample, tail)
    rows = [{"empirical": e, "theoretical": t} for e, t in diag.points]
    _write_table(args.output, ["empirical", "theoretical"], rows)
    print(f"correlation {diag.correlation!r}", file=sys.stderr if args.output in (None, "-") else sys.stdout)
    p = tail.params
    _write_summary(
        args.summary,
        {
            "command": "fitdiag",
            "config": _config_dict(args),
            "cluster_index": args.cluster_index,
            "family": tail.family,
            "params": {"mu": p.mu, "sigma": p.sigma, "xi": p.xi},
            "threshold": tail.threshold,
            "points": len(rows),
            "correlation": diag.correlation,
        },
    )
    return EXIT_NUMERIC if outcome.numerical_failure else EXIT_OK


def _config_dict(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "config", "verbose")}


# ---------------------------------------------------------------------------
# Parser


def _run_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run options")
    g.add_argument("--k", type=int, default=3, help="number of clusters")
    g.add_argument("--init", choices=["random", "kmeanspp"], default="random")
    g.add_argument("--block-size", type=int, default=16, help="BMM block size s")
    g.add_argument("--alpha", type=float, default=0.2, help="POT tail fraction")
    g.add_argument("--tol", type=float, default=1e-6, help="centroid movement tolerance")
    g.add_argument("--max-iter", type=int, default=100)
    g.add_argument("--seed", type=int, default=0, help="base seed; repeat r uses seed + r")
    g.add_argument("--repeats", type=int, default=10)
    g.add_argument("--summary", help="optional JSON summary path")
    return p


def _input_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("input options")
    g.add_argument("--input", required=True)
    g.add_argument("--format", choices=["csv", "libsvm"], default="csv")
    g.add_argument("--delimiter", default=",")
    g.add_argument("--no-labels", action="store_true", help="delimited input has no label column")
    g.add_argument("--standardize", action="store_true", help="scale features to unit variance")
    return p


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys mirror flag names")
    common.add_argument("-v", "--verbose", action="count", default=0)
    common.add_argument("--output", default="-", help="output path ('-' for stdout)")

    parser = argparse.ArgumentParser(prog="evtkmeans", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run, inp = _run_flags(), _input_flags()
    algo = argparse.ArgumentParser(add_help=False)
    algo.add_argument("--algorithm", choices=sorted(ALGORITHMS), default="gpd")

    subs = {}
    s = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--sigma", type=float, default=0.2)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_synth)
    subs["synth"] = s

    s = sub.add_parser("cluster", parents=[common, inp, run, algo], help="run an algorithm over seeds")
    s.set_defaults(func=cmd_cluster)
    subs["cluster"] = s

    s = sub.add_parser("sweep", parents=[common, inp, run, algo], help="sweep block size or alpha")
    s.add_argument("--param", choices=sorted(SWEEP_PARAMS), required=True)
    s.add_argument("--values", required=True, help="comma-separated values")
    s.set_defaults(func=cmd_sweep)
    subs["sweep"] = s

    s = sub.add_parser("robust", parents=[common, run], help="uninformative-feature robustness table")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--sigma", type=float, default=0.2)
    s.add_argument("--data-seed", type=int, default=0)
    s.add_argument("--extra-dims", default="0,20,40,60,80,100")
    s.add_argument("--algorithms", default="kmeans,gev,gpd")
    s.add_argument("--standardize", action="store_true")
    s.set_defaults(func=cmd_robust)
    subs["robust"] = s

    s = sub.add_parser("fitdiag", parents=[common, inp, run, algo], help="Q-Q data for one cluster's tail")
    s.add_argument("--cluster-index", type=int, default=0)
    s.set_defaults(func=cmd_fitdiag)
    subs["fitdiag"] = s
    return parser, subs


def _apply_config(argv: list[str], parser, subs) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config, encoding="utf-8") as fh:
            values = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _IoFailure(f"cannot read config {known.config}: {exc}") from None
    if not isinstance(values, dict):
        raise UsageError("config file must hold a JSON object")
    command = next((a for a in argv if a in subs), None)
    if command is None:
        return
    target = subs[command]
    dests = {a.dest for a in target._actions}
    defaults = {}
    for key, value in values.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest not in dests or dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r} for {command}")
        defaults[dest] = value
    target.set_defaults(**defaults)
    # a config value satisfies a required flag
    for action in target._actions:
        if action.dest in defaults:
            action.required = False


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    try:
        _apply_config(argv, parser, subs)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_OK if exc.code == 0 else EXIT_USAGE
        logging.basicConfig(
            level=logging.WARNING - 10 * min(args.verbose, 2),
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )
        return args.func(args)
    except UsageError as exc:
        print(f"evtkmeans: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _IoFailure as exc:
        print(f"evtkmeans: {exc}", file=sys.stderr)
        return EXIT_IO
    except (InputError, ValueError) as exc:
        print(f"evtkmeans: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"evtkmeans: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
