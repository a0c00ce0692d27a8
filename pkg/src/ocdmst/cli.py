"""Command-line entry point.

Subcommands
    eval           cross-validate one configuration
    grid           cross-validate every cell of a (gamma, depth, K, beta) grid
    sweep          best MCC per (gamma, depth), the data behind a sweep surface
    benchmark      best config per variant for several bundled one-class problems
    predict        fit on a target CSV and classify every row of a query CSV
    validate-data  load a dataset and report its shape, drops and classes
    logistic       shrink-factor curves for a few growth rates
    summarize      re-print the summary table of a result file

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 any other failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import report
from .boundary import ThresholdParams
from .classifier import ClassifierConfig, Variant, fit
from .datasets import BENCHMARK, PRESETS, LabeledData, load_csv, load_preset
from .evaluation import (
    DEFAULT_BETAS,
    DEFAULT_DEPTHS,
    DEFAULT_GAMMAS,
    DEFAULT_KS,
    CvProtocol,
    GridResult,
    evaluate_configs,
    grid_configs,
)
from .exceptions import ConfigurationError, DataError, InputError

logger = logging.getLogger("ocdmst")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# argument types


def _gamma(text: str):
    """``43`` is an absolute small-tree size, ``0.25`` a fraction of the training split."""
    try:
        value = int(text)
    except ValueError:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
        if not 0.0 < value <= 1.0:
            raise argparse.ArgumentTypeError("a fractional gamma must lie in (0, 1]")
        return value
    if value < 2:
        raise argparse.ArgumentTypeError("gamma must be at least 2")
    return value


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def _unit_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {v}")
    return v


def _list_of(item):
    def parse(text: str):
        out = []
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            if item is _positive_int and "-" in part:
                lo, hi = (_positive_int(p) for p in part.split("-", 1))
                if hi < lo:
                    raise argparse.ArgumentTypeError(f"empty range {part!r}")
                out.extend(range(lo, hi + 1))
            else:
                out.append(item(part))
        if not out:
            raise argparse.ArgumentTypeError("list must be nonempty")
        return out
    return parse


def _shape(text: str) -> tuple[int, int]:
    try:
        f, n = (int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected FEATURES,ROWS") from None
    return f, n


def _label_column(text: str):
    if text.lower() == "none":
        return None
    try:
        return int(text)
    except ValueError:
        return text


def _rows(text: str) -> list[tuple[str, str]]:
    out = []
    for part in text.split(","):
        name, sep, target = part.strip().partition(":")
        if not sep or not target:
            raise argparse.ArgumentTypeError(f"expected PRESET:TARGET, got {part!r}")
        out.append((name, target))
    return out


# ---------------------------------------------------------------------------
# parser


def _data_args(p, target=True):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS), help="bundled dataset")
    src.add_argument("--data", type=Path, help="headered CSV file")
    p.add_argument("--label-column", type=_label_column, default=-1,
                   help="label column position or header name (default: last)")
    p.add_argument("--expect-shape", type=_shape, metavar="FEATURES,ROWS",
                   help="fail unless the raw file has this shape")
    p.add_argument("--missing", choices=("drop", "error"), default="drop",
                   help="rows with missing values are dropped or rejected")
    if target:
        p.add_argument("--target", required=True, help="label of the one-class target")


def _threshold_args(p):
    p.add_argument("--alpha", type=_unit_float, default=0.5, help="edge-length quantile")
    p.add_argument("--n-groups", type=_positive_int, default=100,
                   help="random node groups per reference sigma")
    p.add_argument("--threshold-seed", type=int, default=0,
                   help="seed of the random node groups")


def _single_args(p, variant="ocdmst"):
    p.add_argument("--variant", choices=[v.value for v in Variant], default=variant)
    p.add_argument("--gamma", type=_gamma, help="small-tree size or training fraction")
    p.add_argument("--depth", type=_positive_int, default=1, help="BFS depth")
    p.add_argument("--K", type=_positive_float, default=5.0, help="logistic growth rate")
    p.add_argument("--beta", type=_positive_float, default=1.5, help="inflection shift")
    _threshold_args(p)


def _grid_args(p):
    p.add_argument("--gammas", type=_list_of(_gamma), default=list(DEFAULT_GAMMAS))
    p.add_argument("--depths", type=_list_of(_positive_int), default=list(DEFAULT_DEPTHS),
                   help="comma list, ranges allowed (1-7)")
    p.add_argument("--Ks", type=_list_of(_positive_float), default=list(DEFAULT_KS))
    p.add_argument("--betas", type=_list_of(_positive_float), default=list(DEFAULT_BETAS))
    _threshold_args(p)


def _protocol_args(p):
    p.add_argument("--folds", type=_positive_int, default=5)
    p.add_argument("--repeats", type=_positive_int, default=20)
    p.add_argument("--seed", type=int, default=0, help="fold shuffling seed")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")


def _output_args(p, top=False):
    p.add_argument("--out", type=Path, help="result file (JSON lines)")
    p.add_argument("--plot-dir", type=Path,
                   help="write plot data as CSV, and figures unless --no-render")
    p.add_argument("--no-render", action="store_true", help="CSV plot data only")
    if top:
        p.add_argument("--top", type=_positive_int, default=20,
                       help="rows in the printed summary")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ocdmst", description="MST one-class descriptors")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="cross-validate one configuration")
    _data_args(p)
    _single_args(p)
    _protocol_args(p)
    _output_args(p)

    p = sub.add_parser("grid", help="cross-validate a parameter grid")
    _data_args(p)
    p.add_argument("--variant", choices=[v.value for v in Variant], default="ocdmst")
    _grid_args(p)
    _protocol_args(p)
    _output_args(p, top=True)

    p = sub.add_parser("sweep", help="best MCC per (gamma, depth)")
    _data_args(p)
    _grid_args(p)
    _protocol_args(p)
    _output_args(p)

    p = sub.add_parser("benchmark", help="best config per variant over bundled problems")
    p.add_argument("--rows", type=_rows, default=list(BENCHMARK),
                   help="comma list of PRESET:TARGET (default: the full benchmark)")
    _grid_args(p)
    _protocol_args(p)
    _output_args(p)

    p = sub.add_parser("predict", help="classify query rows against a target CSV")
    p.add_argument("--train", type=Path, required=True, help="CSV of target samples")
    p.add_argument("--query", type=Path, required=True, help="CSV of samples to classify")
    p.add_argument("--label-column", type=_label_column, default=None,
                   help="label column in both files (default: none)")
    p.add_argument("--target", help="keep only training rows with this label")
    _single_args(p)
    p.add_argument("--out", type=Path, help="CSV destination (default: stdout)")

    p = sub.add_parser("validate-data", help="check a dataset file or preset")
    _data_args(p, target=False)

    p = sub.add_parser("logistic", help="shrink-factor curves")
    p.add_argument("--Ks", type=_list_of(_positive_float), default=[6.0, 7.0, 8.0, 9.0, 10.0, 20.0])
    p.add_argument("--beta", type=_positive_float, default=1.5)
    p.add_argument("--sigma-rg", type=_unit_float, default=0.2)
    p.add_argument("--points", type=_positive_int, default=101)
    p.add_argument("--out", type=Path, help="CSV destination (default: stdout)")
    p.add_argument("--plot-dir", type=Path)
    p.add_argument("--no-render", action="store_true")

    p = sub.add_parser("summarize", help="re-print the summary of a result file")
    p.add_argument("results", type=Path)
    p.add_argument("--top", type=_positive_int, default=20)
    return parser


# ---------------------------------------------------------------------------
# helpers


def _load(args) -> tuple[str, LabeledData]:
    if args.preset:
        data = load_preset(args.preset)
        if args.expect_shape and data.shape != args.expect_shape:
            raise DataError(f"{args.preset}: shape {data.shape} != {args.expect_shape}")
        return args.preset, data
    data = load_csv(args.data, args.label_column, args.expect_shape, args.missing)
    return args.data.stem, data


def _check_target(data: LabeledData, target: str) -> None:
    if target not in set(data.labels):
        raise DataError(f"target {target!r} not among labels {sorted(set(data.labels))}")


def _protocol(args, target) -> CvProtocol:
    return CvProtocol(args.folds, args.repeats, args.seed, target)


def _base_params(args) -> ThresholdParams:
    return ThresholdParams(alpha=args.alpha, n_random_groups=args.n_groups,
                           rng_seed=args.threshold_seed)


def _emit(records, out, text):
    if out:
        report.write_records(records, out)
    sys.stdout.write(text)


def _render(args, fn, *a, **kw):
    if not args.no_render:
        from . import plotting
        getattr(plotting, fn)(*a, **kw)


def _grid_records(grid: GridResult, dataset, target, protocol) -> list[dict]:
    ranked = grid.ranked
    return [
        report.summary_record(report.config_fields(rep.config, dataset, target),
                              rep, protocol, rank)
        for rank, rep in enumerate(ranked, start=1)
    ]


def _write_surface(grid: GridResult, plot_dir: Path, args, title):
    surface = grid.surface()
    report.write_csv(plot_dir / "surface.csv",
                     ["gamma", "depth", "mcc_max", "mcc_std", "K", "beta"],
                     [[r[k] for k in ("gamma", "depth", "mcc_max", "mcc_std", "K", "beta")]
                      for r in surface])
    gammas, depths, mat = report.surface_matrix(surface)
    report.write_csv(plot_dir / "surface_matrix.csv",
                     ["depth"] + [str(g) for g in gammas],
                     [[d] + [float(v) for v in row] for d, row in zip(depths, mat)])
    _render(args, "sweep_surface", gammas, depths, mat, plot_dir / "surface.png", title)
    return gammas, depths, mat


# ---------------------------------------------------------------------------
# commands


def cmd_eval(args) -> int:
    dataset, data = _load(args)
    _check_target(data, args.target)
    cfg = ClassifierConfig(Variant(args.variant), args.gamma, args.depth,
                           ThresholdParams(args.alpha, args.K, args.beta,
                                           args.n_groups, args.threshold_seed))
    protocol = _protocol(args, args.target)
    rep = evaluate_configs(data.features, data.labels, [cfg], protocol, args.jobs)[0]
    fields = report.config_fields(cfg, dataset, args.target)
    records = [report.run_record(fields, r) for r in rep.runs]
    records.append(report.summary_record(fields, rep, protocol))
    _emit(records, args.out, report.format_summary(records))
    if args.plot_dir:
        d = report.ensure_dir(args.plot_dir)
        report.write_csv(d / "confusion.csv", report.CONFUSION_HEADER,
                         report.confusion_rows(rep.runs))
        cm = rep.confusion
        report.write_csv(d / "confusion_total.csv", ["predicted", "true_target", "true_outlier"],
                         [["target", cm.tp, cm.fp], ["outlier", cm.fn, cm.tn]])
        title = f"{dataset} ({args.target})"
        _render(args, "confusion_matrix", cm, d / "confusion.png", title)
        _render(args, "mcc_runs", rep.mccs, d / "mcc_runs.png", title)
    return EXIT_OK


def cmd_grid(args) -> int:
    dataset, data = _load(args)
    _check_target(data, args.target)
    protocol = _protocol(args, args.target)
    configs = grid_configs(args.variant, args.gammas, args.depths, args.Ks, args.betas,
                           _base_params(args))
    grid = GridResult(evaluate_configs(data.features, data.labels, configs, protocol,
                                       args.jobs))
    records = _grid_records(grid, dataset, args.target, protocol)
    _emit(records, args.out, report.format_summary(records[:args.top]))
    if args.plot_dir and args.variant != Variant.MST_CD.value:
        _write_surface(grid, report.ensure_dir(args.plot_dir), args,
                       f"{dataset} ({args.target})")
    return EXIT_OK


def cmd_sweep(args) -> int:
    dataset, data = _load(args)
    _check_target(data, args.target)
    protocol = _protocol(args, args.target)
    configs = grid_configs(Variant.OCDMST, args.gammas, args.depths, args.Ks, args.betas,
                           _base_params(args))
    grid = GridResult(evaluate_configs(data.features, data.labels, configs, protocol,
                                       args.jobs))
    if args.out:
        report.write_records(_grid_records(grid, dataset, args.target, protocol), args.out)
    plot_dir = report.ensure_dir(args.plot_dir) if args.plot_dir else None
    if plot_dir:
        gammas, depths, mat = _write_surface(grid, plot_dir, args,
                                             f"{dataset} ({args.target})")
    else:
        gammas, depths, mat = report.surface_matrix(grid.surface())
    # depth rows, gamma columns, best MCC in each cell
    head = ["depth"] + [f"{g:g}" for g in gammas]
    rows = [[str(d)] + [f"{v:.3f}" for v in row] for d, row in zip(depths, mat)]
    rows.append(["max"] + [f"{v:.3f}" for v in np.nanmax(mat, axis=0)])
    rows.append(["std"] + [f"{v:.3f}" for v in np.nanstd(mat, axis=0)])
    widths = [max(len(r[i]) for r in [head, *rows]) for i in range(len(head))]
    for r in [head, *rows]:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    return EXIT_OK


def cmd_benchmark(args) -> int:
    records = []
    for preset, target in args.rows:
        data = load_preset(preset)
        _check_target(data, target)
        protocol = _protocol(args, target)
        base = _base_params(args)
        configs = []
        for variant in Variant:
            configs += grid_configs(variant, args.gammas, args.depths, args.Ks,
                                    args.betas, base)
        logger.info("%s (%s): %d configurations", preset, target, len(configs))
        reports = evaluate_configs(data.features, data.labels, configs, protocol, args.jobs)
        for variant in Variant:
            best = GridResult([r for r in reports if r.config.variant is variant]).best
            rec = report.summary_record(report.config_fields(best.config, preset, target),
                                        best, protocol)
            rec["record"] = "benchmark"
            records.append(rec)
    _emit(records, args.out, report.format_benchmark(records))
    if args.plot_dir:
        d = report.ensure_dir(args.plot_dir)
        header, rows = report.benchmark_rows(records)
        report.write_csv(d / "benchmark.csv", header, rows)
        _render(args, "benchmark_bars", header, rows, d / "benchmark.png")
    return EXIT_OK


def cmd_predict(args) -> int:
    train = load_csv(args.train, args.label_column)
    X = train.features
    if args.target is not None:
        if args.label_column is None:
            raise UsageError("--target needs --label-column")
        _check_target(train, args.target)
        X = X[train.labels == args.target]
    query = load_csv(args.query, args.label_column)
    if query.features.shape[1] != X.shape[1]:
        raise DataError(
            f"query has {query.features.shape[1]} features, training data {X.shape[1]}"
        )
    cfg = ClassifierConfig(Variant(args.variant), args.gamma, args.depth,
                           ThresholdParams(args.alpha, args.K, args.beta,
                                           args.n_groups, args.threshold_seed))
    model = fit(X, cfg)
    header = ["index", "label", "distance", "threshold", "sigma_hat", "sigma_rg",
              "median_edge", "factor", "degenerate"]
    rows = []
    for i, v in enumerate(model.predict_many(query.features, diagnostics=True)):
        d = v.diagnostics
        diag = (["", "", "", ""] if d is None else
                [d.sigma_hat, d.sigma_rg, d.median_bfs_edge, d.sigmoid_factor])
        rows.append([i, v.label, v.distance, v.threshold_used, *diag, int(v.degenerate)])
    report.write_csv(args.out or sys.stdout, header, rows)
    return EXIT_OK


def cmd_validate(args) -> int:
    name, data = _load(args)
    counts = Counter(data.labels.tolist())
    print(f"dataset   {name}")
    print(f"source    {data.source}")
    print(f"features  {data.shape[0]}")
    print(f"rows      {data.n_raw_rows} raw, {data.n_dropped} dropped, "
          f"{len(data.features)} used")
    for label in sorted(counts):
        print(f"class     {label}: {counts[label]}")
    return EXIT_OK


def cmd_logistic(args) -> int:
    header, rows = report.logistic_rows(args.Ks, args.beta, args.sigma_rg, args.points)
    report.write_csv(args.out or sys.stdout, header, rows)
    if args.plot_dir:
        d = report.ensure_dir(args.plot_dir)
        report.write_csv(d / "logistic.csv", header, rows)
        _render(args, "logistic_curves", header, rows, d / "logistic.png",
                sigma_rg=args.sigma_rg, beta=args.beta)
    return EXIT_OK


def cmd_summarize(args) -> int:
    try:
        records = report.read_records(args.results)
    except OSError as exc:
        raise DataError(f"{args.results}: {exc.strerror}") from None
    except ValueError as exc:
        raise DataError(f"{args.results}: not a result file ({exc})") from None
    if any(r.get("record") == "benchmark" for r in records):
        sys.stdout.write(report.format_benchmark(records))
        return EXIT_OK
    summaries = [r for r in records if r.get("record") == "summary"]
    if not summaries:
        raise DataError(f"{args.results}: no summary records")
    for rec in summaries:
        try:
            report.check_summary(rec)
        except (AssertionError, KeyError) as exc:
            raise DataError(f"{args.results}: inconsistent summary record {exc}") from None
    if len(summaries) == 1:
        sys.stdout.write(report.format_summary(records))
    else:
        sys.stdout.write(report.format_summary(summaries[:args.top]))
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "grid": cmd_grid,
    "sweep": cmd_sweep,
    "benchmark": cmd_benchmark,
    "predict": cmd_predict,
    "validate-data": cmd_validate,
    "logistic": cmd_logistic,
    "summarize": cmd_summarize,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigurationError) as exc:
        print(f"ocdmst {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, InputError) as exc:
        print(f"ocdmst {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        logger.debug("unhandled error", exc_info=True)
        print(f"ocdmst {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
