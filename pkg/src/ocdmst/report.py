"""Result records, text summaries and delimited plot data.

Results are JSON lines with a fixed key order. A summary table is always
rendered from summary records, whether they were just computed or read back
from disk, so re-summarizing a result file reproduces the original table.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .boundary import sigmoid_factor
from .classifier import ClassifierConfig
from .evaluation import ConfusionMatrix, EvalReport, RunResult

CONFIG_KEYS = ("dataset", "target", "variant", "gamma", "depth", "K", "beta",
               "alpha", "n_random_groups", "threshold_seed")


def config_fields(cfg: ClassifierConfig, dataset: str, target: str) -> dict:
    p = cfg.threshold_params
    return {
        "dataset": dataset,
        "target": str(target),
        "variant": cfg.variant.value,
        "gamma": cfg.gamma,
        "depth": cfg.depth,
        "K": p.K,
        "beta": p.beta,
        "alpha": p.alpha,
        "n_random_groups": p.n_random_groups,
        "threshold_seed": p.rng_seed,
    }


def run_record(cfg_fields: dict, run: RunResult) -> dict:
    rec = {"record": "run", **cfg_fields, "repeat": run.repeat, "fold": run.fold}
    rec.update(tp=run.cm.tp, fp=run.cm.fp, fn=run.cm.fn, tn=run.cm.tn,
               mcc=run.mcc, ppv=run.ppv, npv=run.npv)
    return rec


def summary_record(cfg_fields: dict, report: EvalReport, protocol, rank: int = 1) -> dict:
    cm = report.confusion
    return {
        "record": "summary",
        **cfg_fields,
        "folds": protocol.n_folds,
        "repeats": protocol.n_repeats,
        "cv_seed": protocol.rng_seed,
        "rank": rank,
        "n_runs": len(report.runs),
        "mcc_mean": report.mcc_mean,
        "mcc_variance": report.mcc_variance,
        "tp": cm.tp, "fp": cm.fp, "fn": cm.fn, "tn": cm.tn,
        "mcc_runs": [r.mcc for r in report.runs],
    }


def write_records(records: Iterable[dict], path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def read_records(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _fmt_gamma(g) -> str:
    if g is None:
        return "-"
    return f"{g:g}" if isinstance(g, float) else str(g)


def format_summary(records: Sequence[dict]) -> str:
    """Aligned table of summary records, MCC shown as ``mean (variance)``."""
    rows = [r for r in records if r.get("record") == "summary"]
    header = ["rank", "dataset", "target", "variant", "gamma", "depth", "K", "beta",
              "runs", "MCC mean (var)"]
    body = []
    for r in rows:
        local = r["variant"] != "mst-cd"
        dyn = r["variant"] == "ocdmst"
        body.append([
            str(r["rank"]), r["dataset"], r["target"], r["variant"],
            _fmt_gamma(r["gamma"]) if local else "-",
            str(r["depth"]) if dyn else "-",
            f"{r['K']:g}" if dyn else "-",
            f"{r['beta']:g}" if dyn else "-",
            str(r["n_runs"]),
            f"{r['mcc_mean']:.3f} ({r['mcc_variance']:.3f})",
        ])
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
             for row in [header, *body]]
    return "\n".join(lines) + "\n"


VARIANT_ORDER = ("mst-cd", "mst-cd-gp", "ocdmst")


def _benchmark_table(records: Sequence[dict]):
    rows: dict = {}
    for r in records:
        if r.get("record") == "benchmark":
            rows.setdefault((r["dataset"], r["target"]), {})[r["variant"]] = r
    return rows


def format_benchmark(records: Sequence[dict]) -> str:
    """One line per one-class problem: best ``mean (variance)`` for each variant."""
    table = _benchmark_table(records)
    header = ["dataset", "target", *VARIANT_ORDER, "ocdmst config"]
    body, sums = [], {v: [] for v in VARIANT_ORDER}
    for (dataset, target), by_variant in table.items():
        cells = []
        for v in VARIANT_ORDER:
            r = by_variant.get(v)
            if r is None:
                cells.append("-")
                continue
            sums[v].append(r["mcc_mean"])
            cells.append(f"{r['mcc_mean']:.3f} ({r['mcc_variance']:.3f})")
        oc = by_variant.get("ocdmst")
        conf = (f"gamma={_fmt_gamma(oc['gamma'])} d={oc['depth']} K={oc['K']:g} "
                f"beta={oc['beta']:g}" if oc else "-")
        body.append([dataset, target, *cells, conf])
    body.append(["average", "", *(f"{np.mean(sums[v]):.3f}" if sums[v] else "-"
                                  for v in VARIANT_ORDER), ""])
    widths = [max(len(x) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
             for row in [header, *body]]
    return "\n".join(lines) + "\n"


def benchmark_rows(records: Sequence[dict]) -> tuple[list[str], list[list]]:
    """Best mean MCC per problem and variant, as plot data."""
    table = _benchmark_table(records)
    header = ["problem", *VARIANT_ORDER]
    rows = [[f"{d} ({t})"] + [by[v]["mcc_mean"] if v in by else "" for v in VARIANT_ORDER]
            for (d, t), by in table.items()]
    return header, rows


def check_summary(rec: dict) -> None:
    """Assert a summary record's aggregates agree with its per-run MCCs."""
    runs = np.asarray(rec["mcc_runs"], dtype=float)
    assert len(runs) == rec["n_runs"]
    assert math.isclose(runs.mean(), rec["mcc_mean"], rel_tol=1e-12, abs_tol=1e-15)
    var = runs.var(ddof=1) if len(runs) > 1 else 0.0
    assert math.isclose(var, rec["mcc_variance"], rel_tol=1e-9, abs_tol=1e-15)


# ---------------------------------------------------------------------------
# delimited plot data


def write_csv(dest, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write to a path or an open text stream; floats keep full precision."""
    if hasattr(dest, "write"):
        _write_rows(dest, header, rows)
        return
    with open(dest, "w", newline="") as fh:
        _write_rows(fh, header, rows)


def _write_rows(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def logistic_rows(Ks: Sequence[float], beta: float, sigma_rg: float,
                  n_points: int = 101) -> tuple[list[str], list[list]]:
    """Shrink factor against normalized sigma, one column per growth rate."""
    xs = np.linspace(0.0, 1.0, n_points)
    header = ["sigma_hat"] + [f"K={k:g}" for k in Ks]
    rows = [[float(x)] + [float(sigmoid_factor(x, sigma_rg, k, beta)) for k in Ks]
            for x in xs]
    return header, rows


def surface_matrix(surface: Sequence[dict]) -> tuple[list, list, np.ndarray]:
    """Pivot surface rows into (gammas, depths, depth x gamma matrix of best MCC)."""
    gammas = sorted({r["gamma"] for r in surface})
    depths = sorted({r["depth"] for r in surface})
    mat = np.full((len(depths), len(gammas)), np.nan)
    for r in surface:
        mat[depths.index(r["depth"]), gammas.index(r["gamma"])] = r["mcc_max"]
    return gammas, depths, mat


def confusion_rows(runs: Sequence[RunResult]) -> list[list]:
    rows = []
    for r in runs:
        cm: ConfusionMatrix = r.cm
        rows.append([r.repeat, r.fold, cm.tp, cm.fp, cm.fn, cm.tn, r.mcc,
                     "" if r.ppv is None else r.ppv, "" if r.npv is None else r.npv])
    return rows


CONFUSION_HEADER = ["repeat", "fold", "tp", "fp", "fn", "tn", "mcc", "ppv", "npv"]


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
