"""Confusion-matrix metrics, target-class cross-validation and grid search.

Cross-validation splits only the target class into folds. Each fold in turn
is held out; the classifier is fitted on the remaining target folds and
tested on the held-out fold together with every outlier sample. Folds are
reshuffled on each repeat.

All configurations evaluated together share the per-query small trees, so a
grid over BFS depth, K and beta costs little more than a single run for each
gamma.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .boundary import ThresholdParams, sigmoid_factor, static_threshold
from .classifier import (
    ClassifierConfig,
    Gamma,
    Variant,
    analyze_local,
    resolve_gamma,
    tree_distance,
)
from .exceptions import ConfigurationError, InputError
from .graph import build_mst

# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @classmethod
    def from_labels(cls, truth, predicted) -> "ConfusionMatrix":
        """Counts with 1/True as the positive (target) class."""
        t = np.asarray(truth, dtype=bool)
        p = np.asarray(predicted, dtype=bool)
        if t.shape != p.shape:
            raise InputError("truth and predictions differ in length")
        return cls(int(np.sum(t & p)), int(np.sum(~t & p)),
                   int(np.sum(t & ~p)), int(np.sum(~t & ~p)))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def mcc(cm: ConfusionMatrix) -> float:
    """Matthews correlation coefficient; 0 when any marginal is empty."""
    denom = (cm.tp + cm.fp) * (cm.tp + cm.fn) * (cm.tn + cm.fp) * (cm.tn + cm.fn)
    if denom == 0:
        return 0.0
    return (cm.tp * cm.tn - cm.fp * cm.fn) / math.sqrt(denom)


def ppv(cm: ConfusionMatrix) -> float | None:
    denom = cm.tp + cm.fp
    return cm.tp / denom if denom else None


def npv(cm: ConfusionMatrix) -> float | None:
    denom = cm.tn + cm.fn
    return cm.tn / denom if denom else None


# ---------------------------------------------------------------------------
# protocol and reports


@dataclass(frozen=True)
class CvProtocol:
    n_folds: int = 5
    n_repeats: int = 20
    rng_seed: int = 0
    target_label: object = 1

    def __post_init__(self):
        if self.n_folds < 2:
            raise ConfigurationError("n_folds must be >= 2")
        if self.n_repeats < 1:
            raise ConfigurationError("n_repeats must be >= 1")


@dataclass(frozen=True)
class Split:
    repeat: int
    fold: int
    train: np.ndarray   # row indices of training targets
    test: np.ndarray    # held-out targets first, then every outlier


def make_splits(is_target, protocol: CvProtocol) -> list[Split]:
    is_target = np.asarray(is_target, dtype=bool)
    targets = np.flatnonzero(is_target)
    outliers = np.flatnonzero(~is_target)
    if len(targets) < protocol.n_folds:
        raise ConfigurationError(
            f"{len(targets)} target samples cannot fill {protocol.n_folds} folds"
        )
    if len(outliers) == 0:
        raise ConfigurationError("dataset has no outlier samples to test against")
    splits = []
    for r in range(protocol.n_repeats):
        rng = np.random.default_rng([protocol.rng_seed, r])
        folds = np.array_split(rng.permutation(targets), protocol.n_folds)
        for f, held in enumerate(folds):
            train = np.sort(np.concatenate([folds[k] for k in range(len(folds)) if k != f]))
            splits.append(Split(r, f, train, np.concatenate([np.sort(held), outliers])))
    return splits


@dataclass(frozen=True)
class RunResult:
    repeat: int
    fold: int
    cm: ConfusionMatrix

    @property
    def mcc(self) -> float:
        return mcc(self.cm)

    @property
    def ppv(self) -> float | None:
        return ppv(self.cm)

    @property
    def npv(self) -> float | None:
        return npv(self.cm)


@dataclass
class EvalReport:
    config: ClassifierConfig
    runs: list[RunResult] = field(default_factory=list)

    @property
    def mccs(self) -> np.ndarray:
        return np.array([r.mcc for r in self.runs])

    @property
    def mcc_mean(self) -> float:
        return float(self.mccs.mean())

    @property
    def mcc_variance(self) -> float:
        """Sample variance of the per-run MCCs, pooled over folds and repeats."""
        if len(self.runs) < 2:
            return 0.0
        return float(self.mccs.var(ddof=1))

    @property
    def confusion(self) -> ConfusionMatrix:
        return ConfusionMatrix(*(sum(getattr(r.cm, k) for r in self.runs)
                                 for k in ("tp", "fp", "fn", "tn")))


# ---------------------------------------------------------------------------
# engine


def _tree_key(cfg: ClassifierConfig):
    p = cfg.threshold_params
    return (cfg.gamma, p.alpha, p.n_random_groups, p.rng_seed)


def _evaluate_split(X, is_target, split: Split, configs: Sequence[ClassifierConfig]) -> np.ndarray:
    """Confusion counts ``(tp, fp, fn, tn)`` for every config on one split."""
    Xtr = X[split.train]
    Xte = X[split.test]
    truth = is_target[split.test]
    x_min, x_max = float(Xtr.min()), float(Xtr.max())
    n_train = len(Xtr)
    out = np.zeros((len(configs), 4), dtype=np.int64)

    def record(ci, pred):
        out[ci] = (np.sum(truth & pred), np.sum(~truth & pred),
                   np.sum(truth & ~pred), np.sum(~truth & ~pred))

    # global trees, one per alpha
    global_groups = defaultdict(list)
    local_groups = defaultdict(list)
    for ci, cfg in enumerate(configs):
        if cfg.variant is Variant.MST_CD:
            global_groups[cfg.threshold_params.alpha].append(ci)
        else:
            local_groups[_tree_key(cfg)].append(ci)

    if global_groups:
        tree = build_mst(Xtr)
        nearest = np.array([
            int(np.argmin(np.einsum("ij,ij->i", Xtr - q, Xtr - q))) for q in Xte
        ])
        dist = np.array([tree_distance(Xtr, tree, q, v) for q, v in zip(Xte, nearest)])
        for alpha, cis in global_groups.items():
            theta = static_threshold(tree.weights, alpha) if len(tree.weights) else 0.0
            for ci in cis:
                record(ci, dist <= theta)

    for (gamma, alpha, n_groups, seed), cis in local_groups.items():
        g = resolve_gamma(gamma, n_train)
        if not 2 <= g <= n_train:
            raise ConfigurationError(
                f"gamma={g} is not within [2, {n_train}] training samples "
                f"(repeat {split.repeat}, fold {split.fold})"
            )
        depths = sorted({configs[ci].depth for ci in cis
                         if configs[ci].variant is Variant.OCDMST})
        params = ThresholdParams(alpha=alpha, n_random_groups=n_groups, rng_seed=seed)
        T, D = len(Xte), len(depths)
        dist = np.empty(T)
        static = np.empty(T)
        med = np.zeros((T, D))
        s_hat = np.zeros((T, D))
        s_rg = np.zeros((T, D))
        has_edges = np.zeros((T, D), dtype=bool)
        for t, q in enumerate(Xte):
            key = [seed, split.repeat, split.fold, t]
            la = analyze_local(Xtr, q, g, depths, params, x_min, x_max, key)
            dist[t] = la.distance
            static[t] = la.static_theta
            for di, d in enumerate(depths):
                st = la.depths[d]
                med[t, di], s_hat[t, di], s_rg[t, di] = st.median_edge, st.sigma_hat, st.sigma_rg
                has_edges[t, di] = st.n_edges > 0
        col = {d: i for i, d in enumerate(depths)}
        for ci in cis:
            cfg = configs[ci]
            if cfg.variant is Variant.MST_CD_GP:
                record(ci, dist <= static)
                continue
            di = col[cfg.depth]
            p = cfg.threshold_params
            theta = med[:, di] * sigmoid_factor(s_hat[:, di], s_rg[:, di], p.K, p.beta)
            record(ci, has_edges[:, di] & (dist <= theta))
    return out


_WORKER: dict = {}


def _init_worker(X, is_target, configs):
    _WORKER.update(X=X, is_target=is_target, configs=configs)


def _run_split(split: Split) -> np.ndarray:
    return _evaluate_split(_WORKER["X"], _WORKER["is_target"], split, _WORKER["configs"])


def evaluate_configs(
    features,
    labels,
    configs: Sequence[ClassifierConfig],
    protocol: CvProtocol,
    jobs: int = 1,
) -> list[EvalReport]:
    """Cross-validate every config on identical folds; one report per config.

    ``jobs > 1`` spreads the (repeat, fold) splits over worker processes.
    Results are assembled in split order, so they do not depend on ``jobs``.
    """
    X = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if X.ndim != 2 or len(X) != len(labels):
        raise InputError("features must be 2-D with one label per row")
    if not np.all(np.isfinite(X)):
        raise InputError("features contain NaN or Inf")
    configs = list(configs)
    if not configs:
        raise InputError("no configurations to evaluate")
    is_target = labels == protocol.target_label
    splits = make_splits(is_target, protocol)

    # fail fast on impossible gammas before any heavy work
    min_train = min(len(s.train) for s in splits)
    for cfg in configs:
        if cfg.variant is not Variant.MST_CD:
            g = resolve_gamma(cfg.gamma, min_train)
            if g > min_train:
                raise ConfigurationError(
                    f"gamma={g} exceeds the smallest training split ({min_train})"
                )

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(X, is_target, configs)) as pool:
            counts = list(pool.map(_run_split, splits))
    else:
        counts = [_evaluate_split(X, is_target, s, configs) for s in splits]

    reports = [EvalReport(cfg) for cfg in configs]
    for split, c in zip(splits, counts):
        for ci, rep in enumerate(reports):
            rep.runs.append(RunResult(split.repeat, split.fold,
                                      ConfusionMatrix(*(int(v) for v in c[ci]))))
    return reports


def run_cv(features, labels, config: ClassifierConfig, protocol: CvProtocol,
           jobs: int = 1) -> EvalReport:
    return evaluate_configs(features, labels, [config], protocol, jobs)[0]


# ---------------------------------------------------------------------------
# grid search

DEFAULT_GAMMAS = (0.25, 0.3125, 0.375, 0.4375, 0.5)
DEFAULT_DEPTHS = tuple(range(1, 8))
DEFAULT_KS = (5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 20.0)
DEFAULT_BETAS = (1.05, 1.1, 1.5)


def grid_configs(
    variant: Variant | str,
    gammas: Iterable[Gamma] = DEFAULT_GAMMAS,
    depths: Iterable[int] = DEFAULT_DEPTHS,
    Ks: Iterable[float] = DEFAULT_KS,
    betas: Iterable[float] = DEFAULT_BETAS,
    base: ThresholdParams = ThresholdParams(),
) -> list[ClassifierConfig]:
    """Grid cells in (gamma, depth, K, beta) order.

    Axes a variant ignores collapse: ``MST_CD_GP`` varies only gamma and
    ``MST_CD`` yields a single cell.
    """
    variant = Variant(variant)
    gammas, depths, Ks, betas = (list(a) for a in (gammas, depths, Ks, betas))
    if not all((gammas, depths, Ks, betas)):
        raise InputError("grid axes must be nonempty")
    if variant is Variant.MST_CD:
        return [ClassifierConfig(variant, None, 1, base)]
    if variant is Variant.MST_CD_GP:
        return [ClassifierConfig(variant, g, 1, base) for g in gammas]
    return [
        ClassifierConfig(variant, g, d, ThresholdParams(base.alpha, float(k), float(b),
                                                        base.n_random_groups, base.rng_seed))
        for g, d, k, b in itertools.product(gammas, depths, Ks, betas)
    ]


@dataclass
class GridResult:
    reports: list[EvalReport]   # grid order

    @property
    def ranked(self) -> list[EvalReport]:
        """Reports by descending mean MCC; ties keep grid order."""
        order = sorted(range(len(self.reports)), key=lambda i: -self.reports[i].mcc_mean)
        return [self.reports[i] for i in order]

    @property
    def best(self) -> EvalReport:
        return self.ranked[0]

    def surface(self) -> list[dict]:
        """Best mean MCC per (gamma, depth) over the other axes, with its run std."""
        best: dict = {}
        for rep in self.reports:
            key = (rep.config.gamma, rep.config.depth)
            if key not in best or rep.mcc_mean > best[key].mcc_mean:
                best[key] = rep
        return [
            {"gamma": g, "depth": d, "mcc_max": rep.mcc_mean,
             "mcc_std": math.sqrt(rep.mcc_variance),
             "K": rep.config.threshold_params.K, "beta": rep.config.threshold_params.beta}
            for (g, d), rep in best.items()
        ]


def grid_search(features, labels, variant, protocol: CvProtocol, *,
                gammas=DEFAULT_GAMMAS, depths=DEFAULT_DEPTHS, Ks=DEFAULT_KS,
                betas=DEFAULT_BETAS, base: ThresholdParams = ThresholdParams(),
                jobs: int = 1) -> GridResult:
    configs = grid_configs(variant, gammas, depths, Ks, betas, base)
    return GridResult(evaluate_configs(features, labels, configs, protocol, jobs))
