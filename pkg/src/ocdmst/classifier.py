"""MST class-descriptor classifiers.

``MST_CD``
    one spanning tree over the whole target class, static threshold.
``MST_CD_GP``
    a small tree over the ``gamma`` training samples nearest to each query,
    static threshold over that small tree.
``OCDMST``
    the small tree of ``MST_CD_GP``, with the threshold taken from a BFS
    neighbourhood of the node nearest to the query and shrunk by
    :func:`~ocdmst.boundary.sigmoid_factor` where that neighbourhood is sparse.

In every variant the query's distance to the tree is the smallest
point-to-edge distance over the edges incident to its nearest tree node.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

from .boundary import (
    Seed,
    ThresholdModel,
    ThresholdParams,
    group_sigma,
    normalize_sigma,
    random_sigma_profile,
    reference_sigma,
    sigmoid_factor,
    static_threshold,
)
from .exceptions import ConfigurationError, InputError
from .geometry import distances_to_edges
from .graph import SpanningTree, bfs_from, build_mst

logger = logging.getLogger(__name__)

TARGET = 1
OUTLIER = 0


class Variant(str, enum.Enum):
    MST_CD = "mst-cd"
    MST_CD_GP = "mst-cd-gp"
    OCDMST = "ocdmst"


Gamma = Union[int, float]


def resolve_gamma(gamma: Gamma | None, n_train: int) -> int:
    """Materialize ``gamma`` against a training set of ``n_train`` samples.

    Integers are absolute sizes. Floats in ``(0, 1]`` are fractions of the
    training set, rounded half-up and floored at 2.
    """
    if gamma is None:
        return n_train
    if isinstance(gamma, (float, np.floating)):
        if not 0.0 < gamma <= 1.0:
            raise ConfigurationError(f"fractional gamma must be in (0, 1], got {gamma}")
        return max(2, int(np.floor(gamma * n_train + 0.5)))
    return int(gamma)


@dataclass(frozen=True)
class ClassifierConfig:
    variant: Variant = Variant.OCDMST
    gamma: Gamma | None = None
    depth: int = 1
    threshold_params: ThresholdParams = field(default_factory=ThresholdParams)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.variant is not Variant.MST_CD:
            if self.gamma is None:
                raise ConfigurationError(f"{self.variant.value} needs gamma")
            if isinstance(self.gamma, (int, np.integer)) and self.gamma < 2:
                raise ConfigurationError(f"gamma must be >= 2, got {self.gamma}")
        if self.variant is Variant.OCDMST and self.depth < 1:
            raise ConfigurationError(f"depth must be >= 1, got {self.depth}")

    def with_params(self, **kwargs) -> "ClassifierConfig":
        return replace(self, threshold_params=replace(self.threshold_params, **kwargs))


@dataclass(frozen=True)
class Verdict:
    label: int
    distance: float
    threshold_used: float
    diagnostics: ThresholdModel | None = None
    degenerate: bool = False

    @property
    def is_target(self) -> bool:
        return self.label == TARGET


@dataclass(frozen=True)
class DepthStats:
    median_edge: float
    sigma_hat: float
    sigma_rg: float
    bfs_size: int
    n_edges: int


@dataclass(frozen=True)
class LocalAnalysis:
    """Everything a query needs from one small tree, for several BFS depths."""

    tree: SpanningTree
    nearest: int
    distance: float
    static_theta: float
    depths: dict[int, DepthStats]


def tree_distance(points: np.ndarray, tree: SpanningTree, x: np.ndarray, node: int) -> float:
    """Distance from ``x`` to the edges incident to ``node``.

    A single-node tree has no edges; the distance to the node itself is used.
    """
    edges = tree.incident_edges(node)
    if not edges:
        diff = points[node] - x
        return float(np.sqrt(diff @ diff))
    a = points[tree.edge_a[edges]]
    b = points[tree.edge_b[edges]]
    return float(distances_to_edges(x, a, b).min())


def nearest_rows(points: np.ndarray, x: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` rows closest to ``x``, ties to the lower index, ascending."""
    diff = points - x
    d2 = np.einsum("ij,ij->i", diff, diff)
    order = np.argsort(d2, kind="stable")
    return np.sort(order[:k])


def analyze_local(
    points: np.ndarray,
    x: np.ndarray,
    gamma: int,
    depths: Sequence[int],
    params: ThresholdParams,
    x_min: float,
    x_max: float,
    rng_seed: Seed,
) -> LocalAnalysis:
    """Build the small tree for ``x`` and collect threshold inputs for each depth."""
    subset = nearest_rows(points, x, gamma)
    tree = build_mst(points, subset)
    diff = points[subset] - x
    nearest = int(subset[np.argmin(np.einsum("ij,ij->i", diff, diff))])
    distance = tree_distance(points, tree, x, nearest)
    static_theta = (
        static_threshold(tree.weights, params.alpha) if len(tree.weights) else 0.0
    )

    stats: dict[int, DepthStats] = {}
    hoods = {depth: bfs_from(tree, nearest, depth) for depth in depths}
    sizes = [len(b.nodes) for b in hoods.values() if b.edge_ids]
    profile = (
        random_sigma_profile(points, tree.node_ids, params.n_random_groups,
                             rng_seed, max(sizes))
        if sizes else None
    )
    for depth, bfs in hoods.items():
        if not bfs.edge_ids:
            stats[depth] = DepthStats(0.0, 0.0, 0.0, len(bfs.nodes), 0)
            continue
        stats[depth] = DepthStats(
            static_threshold(bfs.weights, params.alpha),
            normalize_sigma(group_sigma(points, bfs.nodes), x_min, x_max),
            reference_sigma(profile, len(bfs.nodes), x_min, x_max),
            len(bfs.nodes),
            len(bfs.edge_ids),
        )
    return LocalAnalysis(tree, nearest, distance, static_theta, stats)


def dynamic_from_stats(s: DepthStats, K: float, beta: float) -> ThresholdModel:
    factor = sigmoid_factor(s.sigma_hat, s.sigma_rg, K, beta)
    return ThresholdModel(s.median_edge, s.sigma_hat, s.sigma_rg, factor,
                          s.median_edge * factor, s.bfs_size)


class FittedModel:
    """A fitted one-class descriptor.

    ``MST_CD`` builds its tree here; the small-tree variants only keep the
    training matrix and its global value range, and build trees per query.
    """

    def __init__(self, target_samples, config: ClassifierConfig):
        X = np.asarray(target_samples, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            raise InputError("target_samples must be a nonempty 2-D matrix")
        if not np.all(np.isfinite(X)):
            raise InputError("target_samples contain NaN or Inf")
        self.config = config
        self.X = X
        self.x_min = float(X.min())
        self.x_max = float(X.max())
        self.gamma = resolve_gamma(config.gamma, len(X))
        if config.variant is not Variant.MST_CD:
            if self.gamma > len(X):
                raise ConfigurationError(
                    f"gamma={self.gamma} exceeds the {len(X)} training samples"
                )
            if self.gamma < 2:
                raise ConfigurationError("gamma must be >= 2")
        self.tree: SpanningTree | None = None
        self.theta: float | None = None
        if config.variant is Variant.MST_CD:
            self.tree = build_mst(X)
            self.theta = (
                static_threshold(self.tree.weights, config.threshold_params.alpha)
                if len(self.tree.weights) else 0.0
            )

    @property
    def n_samples(self) -> int:
        return len(self.X)

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.X.shape[1],):
            raise InputError(
                f"query has shape {x.shape}, expected ({self.X.shape[1]},)"
            )
        return x

    def predict(self, x, index: Seed = 0, diagnostics: bool = False) -> Verdict:
        """Classify one query.

        ``index`` identifies the query within a batch; together with the
        configured seed it seeds the random groups, so a query's verdict does
        not depend on the order in which a batch is processed.
        """
        x = self._check(x)
        cfg = self.config
        params = cfg.threshold_params
        if cfg.variant is Variant.MST_CD:
            diff = self.X - x
            node = int(np.argmin(np.einsum("ij,ij->i", diff, diff)))
            dist = tree_distance(self.X, self.tree, x, node)
            return _verdict(dist, self.theta)

        key = [params.rng_seed, *np.atleast_1d(index).tolist()]
        local = analyze_local(self.X, x, self.gamma, [cfg.depth], params,
                              self.x_min, self.x_max, key)
        if cfg.variant is Variant.MST_CD_GP:
            return _verdict(local.distance, local.static_theta)

        stats = local.depths[cfg.depth]
        if stats.n_edges == 0:
            logger.warning("degenerate BFS neighbourhood; rejecting query")
            return Verdict(OUTLIER, local.distance, 0.0, None, degenerate=True)
        model = dynamic_from_stats(stats, params.K, params.beta)
        return _verdict(local.distance, model.theta_dynamic,
                        model if diagnostics else None)

    def predict_many(self, queries, diagnostics: bool = False) -> list[Verdict]:
        Q = np.asarray(queries, dtype=np.float64)
        return [self.predict(q, index=i, diagnostics=diagnostics) for i, q in enumerate(Q)]


def _verdict(distance: float, threshold: float, diag=None) -> Verdict:
    label = TARGET if distance <= threshold else OUTLIER
    return Verdict(label, distance, threshold, diag)


def fit(target_samples, config: ClassifierConfig) -> FittedModel:
    return FittedModel(target_samples, config)


def predict(model: FittedModel, x, index: Seed = 0, diagnostics: bool = False) -> Verdict:
    return model.predict(x, index=index, diagnostics=diagnostics)
