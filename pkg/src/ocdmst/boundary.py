"""Static and density-adaptive acceptance thresholds.

The static threshold is a quantile of tree edge lengths. The dynamic one
scales the quantile of the BFS-neighbourhood edges by an inverse logistic of
how spread out that neighbourhood is, relative to random node groups of the
same size drawn from the same small tree. Spreads are normalized by the
largest standard deviation any variable on ``[x_min, x_max]`` can have,
which is ``(x_max - x_min) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .exceptions import DegenerateRangeError, InputError
from .graph import BfsNeighborhood, SpanningTree

Seed = Union[int, Sequence[int]]

# exp() overflows float64 just above 709
_EXP_CLAMP = 700.0


@dataclass(frozen=True)
class ThresholdParams:
    alpha: float = 0.5
    K: float = 5.0
    beta: float = 1.5
    n_random_groups: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InputError(f"alpha must be in [0, 1], got {self.alpha}")
        if not self.K > 0:
            raise InputError(f"K must be positive, got {self.K}")
        if not self.beta > 0:
            raise InputError(f"beta must be positive, got {self.beta}")
        if self.n_random_groups < 1:
            raise InputError("n_random_groups must be >= 1")


@dataclass(frozen=True)
class ThresholdModel:
    median_bfs_edge: float
    sigma_hat: float
    sigma_rg: float
    sigmoid_factor: float
    theta_dynamic: float
    bfs_size: int


def static_threshold(edge_weights, alpha: float = 0.5) -> float:
    """``alpha``-quantile of the edge lengths.

    Interpolates linearly between the order statistics around position
    ``alpha * (n - 1)``, so ``alpha = 0.5`` on an even count gives the midpoint
    of the two middle weights.
    """
    w = np.sort(np.asarray(edge_weights, dtype=np.float64).ravel())
    if w.size == 0:
        raise InputError("static threshold needs at least one edge")
    if not 0.0 <= alpha <= 1.0:
        raise InputError(f"alpha must be in [0, 1], got {alpha}")
    h = alpha * (w.size - 1)
    lo = int(np.floor(h))
    if lo + 1 >= w.size:
        return float(w[-1])
    return float(w[lo] + (h - lo) * (w[lo + 1] - w[lo]))


def group_sigma(points, group: Sequence[int]) -> float:
    """Pooled standard deviation of a node group about its centroid.

    Squared deviations are summed over every coordinate and divided by
    ``d_feat * len(group)``.
    """
    points = np.asarray(points, dtype=np.float64)
    idx = np.asarray(group, dtype=np.intp)
    if idx.size == 0:
        raise InputError("group must be nonempty")
    g = points[idx]
    dev = g - g.mean(axis=0)
    return float(np.sqrt(np.einsum("ij,ij->", dev, dev) / g.size))


def normalize_sigma(sigma: float, x_min: float, x_max: float) -> float:
    if not x_max > x_min:
        raise DegenerateRangeError(
            f"feature range is degenerate: x_min={x_min}, x_max={x_max}"
        )
    if sigma < 0:
        raise InputError("sigma must be nonnegative")
    return float(min(1.0, 2.0 * sigma / (x_max - x_min)))


def sigmoid_factor(sigma_hat, sigma_rg, K, beta):
    """``1 / (1 + exp(K * (sigma_hat - beta * sigma_rg)))``; broadcasts over arrays."""
    z = np.clip(K * (np.subtract(sigma_hat, np.multiply(sigma_rg, beta))),
                -_EXP_CLAMP, _EXP_CLAMP)
    out = 1.0 / (1.0 + np.exp(z))
    return float(out) if np.ndim(out) == 0 else out


def random_sigma_profile(points, tree_nodes, n_groups: int, rng_seed: Seed,
                         max_size: int | None = None) -> np.ndarray:
    """Raw group sigmas of random node groups of every size up to ``max_size``.

    Returns shape ``(n_groups, max_size)``. Each row comes from an
    independent uniform permutation of ``tree_nodes``; column ``s - 1`` holds
    the sigma of its first ``s`` nodes, which is a uniform random
    ``s``-subset. All sizes share the permutations, and prefix sums do not
    look past position ``s``, so the value for a size is the same whatever
    ``max_size`` is.
    """
    points = np.asarray(points, dtype=np.float64)
    nodes = np.asarray(tree_nodes, dtype=np.intp)
    m = len(nodes)
    if m == 0:
        raise InputError("tree_nodes must be nonempty")
    if n_groups < 1:
        raise InputError("n_groups must be >= 1")
    size = m if max_size is None else int(max_size)
    if not 1 <= size <= m:
        raise InputError(f"max_size {max_size} outside [1, {m}]")
    rng = np.random.default_rng(rng_seed)
    perms = rng.permuted(np.tile(np.arange(m), (n_groups, 1)), axis=1)[:, :size]

    local = points[nodes]
    local = local - local.mean(axis=0)  # centring tames the cancellation below
    g = local[perms]                                   # (N, size, d)
    sums = np.cumsum(g, axis=1)
    sq = np.cumsum(np.einsum("nmd,nmd->nm", g, g), axis=1)
    sizes = np.arange(1, size + 1)
    ss = sq - np.einsum("nmd,nmd->nm", sums, sums) / sizes
    d = points.shape[1]
    return np.sqrt(np.maximum(ss, 0.0) / (d * sizes))


def random_group_sigma(
    points,
    tree_nodes: Sequence[int],
    group_size: int,
    n_groups: int,
    rng_seed: Seed,
    x_min: float,
    x_max: float,
) -> float:
    """Median normalized sigma over ``n_groups`` random node groups of ``group_size``."""
    if not 1 <= group_size <= len(tree_nodes):
        raise InputError(
            f"group_size {group_size} outside [1, {len(tree_nodes)}]"
        )
    raw = random_sigma_profile(points, tree_nodes, n_groups, rng_seed, group_size)
    return reference_sigma(raw, group_size, x_min, x_max)


def reference_sigma(profile: np.ndarray, group_size: int, x_min: float, x_max: float) -> float:
    """Median normalized sigma for one group size out of a :func:`random_sigma_profile`."""
    med = float(np.median(profile[:, group_size - 1]))
    return normalize_sigma(med, x_min, x_max)


def dynamic_threshold(
    bfs: BfsNeighborhood,
    points,
    tree: SpanningTree,
    params: ThresholdParams,
    x_min: float,
    x_max: float,
    rng_seed: Seed | None = None,
) -> ThresholdModel:
    if len(bfs.edge_ids) == 0:
        raise InputError("BFS neighbourhood has no edges")
    seed = params.rng_seed if rng_seed is None else rng_seed
    median = static_threshold(bfs.weights, params.alpha)
    s_hat = normalize_sigma(group_sigma(points, bfs.nodes), x_min, x_max)
    s_rg = random_group_sigma(
        points, tree.node_ids, len(bfs.nodes), params.n_random_groups, seed, x_min, x_max
    )
    factor = sigmoid_factor(s_hat, s_rg, params.K, params.beta)
    return ThresholdModel(median, s_hat, s_rg, factor, median * factor, len(bfs.nodes))
