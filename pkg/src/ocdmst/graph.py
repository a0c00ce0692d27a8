"""Minimum spanning trees over sample subsets and depth-limited BFS on them.

Trees are built with Kruskal's algorithm on the complete Euclidean graph of
the chosen samples. Equal-weight edges are ordered by (lower endpoint index,
higher endpoint index), so a given subset always yields the same tree.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist

from .exceptions import InputError


@dataclass(frozen=True)
class Edge:
    a: int
    b: int
    weight: float


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path compression and union by rank."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, a: int) -> int:
        parent = self.parent
        root = a
        while parent[root] != root:
            root = parent[root]
        while parent[a] != root:
            parent[a], a = root, parent[a]
        return root

    def union(self, a: int, b: int) -> bool:
        """Merge the sets of ``a`` and ``b``; False if already joined."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        rank = self.rank
        if rank[ra] < rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if rank[ra] == rank[rb]:
            rank[ra] += 1
        return True


@dataclass(frozen=True, eq=False)
class SpanningTree:
    """A tree over a subset of the rows of a feature matrix.

    ``node_ids`` are row indices in ascending order. Edge ``k`` joins
    ``edge_a[k]`` and ``edge_b[k]`` (row indices, ``edge_a < edge_b``) with
    length ``weights[k]``. ``adjacency`` maps each node to ``(neighbour,
    edge index)`` pairs sorted by neighbour.
    """

    node_ids: np.ndarray
    edge_a: np.ndarray
    edge_b: np.ndarray
    weights: np.ndarray
    adjacency: dict = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def edges(self) -> list[Edge]:
        return [
            Edge(int(a), int(b), float(w))
            for a, b, w in zip(self.edge_a, self.edge_b, self.weights)
        ]

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def incident_edges(self, node: int) -> list[int]:
        return [e for _, e in self.adjacency[node]]


@dataclass(frozen=True)
class BfsNeighborhood:
    seed: int
    depth: int | None
    nodes: tuple[int, ...]
    edge_ids: tuple[int, ...]
    weights: np.ndarray = field(repr=False)


@lru_cache(maxsize=64)
def _pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    # row-major (i < j) order, the same order pdist uses
    return np.triu_indices(n, 1)


def _kruskal(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kruskal over the complete graph of ``points``; returns local edge arrays."""
    n = len(points)
    if n < 2:
        empty = np.empty(0, dtype=np.intp)
        return empty, empty, np.empty(0)
    w = pdist(points)
    # stable sort keeps condensed (i, j) order among equal weights,
    # which is exactly the tie-break rule
    order = np.argsort(w, kind="stable")
    rows, cols = _pair_index(n)
    uf = UnionFind(n)
    # root of every node, mirrored in numpy so whole bands of edges that
    # already sit inside one component can be discarded without a Python loop
    root = np.arange(n)
    picked: list[int] = []
    need = n - 1
    pos, band = 0, max(8, n // 2)
    while need:
        if pos >= len(order):
            raise AssertionError("complete graph exhausted before spanning")
        chunk = order[pos:pos + band]
        pos += band
        a, b = rows[chunk], cols[chunk]
        live = root[a] != root[b]
        for k, u, v in zip(chunk[live].tolist(), a[live].tolist(), b[live].tolist()):
            ru, rv = uf.find(u), uf.find(v)
            if ru == rv:
                continue
            uf.union(ru, rv)
            keep = uf.find(ru)
            root[root == (rv if keep == ru else ru)] = keep
            picked.append(k)
            need -= 1
            if not need:
                break
    picked_arr = np.asarray(picked, dtype=np.intp)
    return rows[picked_arr], cols[picked_arr], w[picked_arr]


def tree_from_edges(node_ids, edge_a, edge_b, weights) -> SpanningTree:
    node_ids = np.asarray(node_ids, dtype=np.intp)
    edge_a = np.asarray(edge_a, dtype=np.intp)
    edge_b = np.asarray(edge_b, dtype=np.intp)
    weights = np.asarray(weights, dtype=np.float64)
    adjacency: dict[int, list] = {int(v): [] for v in node_ids}
    for k, (a, b) in enumerate(zip(edge_a.tolist(), edge_b.tolist())):
        adjacency[a].append((b, k))
        adjacency[b].append((a, k))
    for nbrs in adjacency.values():
        nbrs.sort()
    return SpanningTree(node_ids, edge_a, edge_b, weights, adjacency)


def build_mst(points, subset: Sequence[int] | None = None) -> SpanningTree:
    """Minimum spanning tree of the complete Euclidean graph over ``subset``.

    ``subset`` holds row indices into ``points``; ``None`` means all rows.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise InputError("points must be a 2-D feature matrix")
    if subset is None:
        ids = np.arange(len(points))
    else:
        ids = np.asarray(subset, dtype=np.intp)
        if ids.ndim != 1:
            raise InputError("subset must be a flat list of indices")
        ids = np.sort(ids)
        if len(ids) and (ids[0] < 0 or ids[-1] >= len(points)):
            raise InputError("subset index out of range")
        if np.any(np.diff(ids) == 0):
            raise InputError("subset contains repeated indices")
    if len(ids) == 0:
        raise InputError("cannot build a tree over an empty subset")
    la, lb, w = _kruskal(points[ids])
    # ids is ascending, so local index order equals global index order
    return tree_from_edges(ids, ids[la], ids[lb], w)


def bfs_from(tree: SpanningTree, seed: int, depth: int | None) -> BfsNeighborhood:
    """Nodes within ``depth`` hops of ``seed`` and the tree edges reaching them.

    ``depth=None`` walks the whole tree. Neighbours are expanded in ascending
    node index.
    """
    seed = int(seed)
    if seed not in tree.adjacency:
        raise InputError(f"seed {seed} is not a node of the tree")
    if depth is not None and depth < 0:
        raise InputError("depth must be nonnegative")
    adjacency = tree.adjacency
    hops = {seed: 0}
    nodes = [seed]
    edge_ids: list[int] = []
    queue = deque([seed])
    while queue:
        v = queue.popleft()
        h = hops[v]
        if depth is not None and h >= depth:
            continue
        for u, e in adjacency[v]:
            if u not in hops:
                hops[u] = h + 1
                nodes.append(u)
                edge_ids.append(e)
                queue.append(u)
    return BfsNeighborhood(
        seed, depth, tuple(nodes), tuple(edge_ids), tree.weights[edge_ids]
    )


def nearest_node(points, tree: SpanningTree, x) -> int:
    """Tree node closest to ``x``; the lowest index wins ties."""
    points = np.asarray(points, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if tree.n_nodes == 0:
        raise InputError("empty tree")
    if x.shape != points.shape[1:]:
        raise InputError("dimensionality mismatch")
    diff = points[tree.node_ids] - x
    d2 = np.einsum("ij,ij->i", diff, diff)
    return int(tree.node_ids[np.argmin(d2)])
