"""Matplotlib renderings of the delimited plot data written by the CLI.

Every function takes already-computed numbers and a destination path; none
of them runs an experiment. The Agg backend is selected so figures render
without a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def _figure(width=4.5, ratio=0.7, **kwargs):
    with plt.rc_context(STYLE):
        return plt.subplots(figsize=(width, width * ratio), **kwargs)


def _save(fig, path):
    with plt.rc_context(STYLE):
        fig.savefig(path)
    plt.close(fig)


def logistic_curves(header, rows, path, sigma_rg=None, beta=None):
    data = np.asarray(rows, dtype=float)
    fig, ax = _figure()
    for j, name in enumerate(header[1:], start=1):
        ax.plot(data[:, 0], data[:, j], label=name, lw=1.2)
    if sigma_rg is not None and beta is not None:
        ax.axvline(sigma_rg * beta, color="0.6", ls="--", lw=0.8)
    ax.set_xlabel(r"normalized $\hat\sigma$")
    ax.set_ylabel("shrink factor")
    ax.set_ylim(0, 1)
    ax.legend(frameon=False)
    _save(fig, path)


def sweep_surface(gammas, depths, matrix, path, title=""):
    """Best MCC per (gamma, depth): heatmap on the left, one line per depth on the right."""
    fig, (ax0, ax1) = _figure(width=8.0, ratio=0.4, ncols=2)
    m = np.asarray(matrix, dtype=float)
    im = ax0.imshow(m, origin="lower", aspect="auto", cmap="viridis")
    ax0.set_xticks(range(len(gammas)), [f"{g:g}" for g in gammas])
    ax0.set_yticks(range(len(depths)), [str(d) for d in depths])
    ax0.set_xlabel(r"$\gamma$")
    ax0.set_ylabel("BFS depth")
    fig.colorbar(im, ax=ax0, label="MCC")
    for i, d in enumerate(depths):
        ax1.plot(range(len(gammas)), m[i], marker="o", ms=3, lw=1, label=f"d={d}")
    ax1.plot(range(len(gammas)), np.nanmax(m, axis=0), color="tab:red", lw=2, label="max")
    ax1.plot(range(len(gammas)), np.nanstd(m, axis=0), color="tab:blue", lw=2, label="std")
    ax1.set_xticks(range(len(gammas)), [f"{g:g}" for g in gammas])
    ax1.set_xlabel(r"$\gamma$")
    ax1.set_ylabel("MCC")
    ax1.legend(frameon=False, ncol=2)
    if title:
        fig.suptitle(title)
    _save(fig, path)


def confusion_matrix(cm, path, title=""):
    """Predicted on the rows, true label on the columns."""
    grid = np.array([[cm.tp, cm.fp], [cm.fn, cm.tn]])
    fig, ax = _figure(width=3.0, ratio=1.0)
    ax.imshow(grid, cmap="Blues")
    for (i, j), v in np.ndenumerate(grid):
        ax.text(j, i, str(v), ha="center", va="center",
                color="white" if v > grid.max() / 2 else "black")
    ax.set_xticks([0, 1], ["target", "outlier"])
    ax.set_yticks([0, 1], ["target", "outlier"])
    ax.set_xlabel("true label")
    ax.set_ylabel("predicted")
    if title:
        ax.set_title(title)
    _save(fig, path)


def mcc_runs(mccs, path, title=""):
    fig, ax = _figure()
    ax.plot(np.arange(len(mccs)), mccs, marker=".", lw=0.6)
    ax.axhline(float(np.mean(mccs)), color="tab:red", lw=1)
    ax.set_xlabel("run")
    ax.set_ylabel("MCC")
    if title:
        ax.set_title(title)
    _save(fig, path)


def benchmark_bars(header, rows, path):
    """Grouped bars: best mean MCC per problem, one bar per variant."""
    names = [r[0] for r in rows]
    fig, ax = _figure(width=max(5.0, 0.6 * len(rows) + 2), ratio=0.45)
    width = 0.8 / (len(header) - 1)
    x = np.arange(len(rows))
    for j, variant in enumerate(header[1:], start=1):
        vals = [np.nan if r[j] == "" else float(r[j]) for r in rows]
        ax.bar(x + (j - 1) * width, vals, width, label=variant)
    ax.set_xticks(x + width * (len(header) - 2) / 2, names, rotation=45, ha="right")
    ax.set_ylabel("MCC")
    ax.axhline(0, color="0.3", lw=0.6)
    ax.legend(frameon=False)
    _save(fig, path)
