"""Euclidean primitives and the distance from a point to a tree edge.

All inputs are coerced to float64 arrays. A point is projected onto the line
through an edge; when the foot of the projection falls inside the segment the
perpendicular distance is used, otherwise the distance to the closer endpoint.
"""

from __future__ import annotations

import numpy as np

from .exceptions import InputError


def _as_vectors(*vs):
    arrs = [np.asarray(v, dtype=np.float64) for v in vs]
    shape = arrs[0].shape
    for a in arrs:
        if a.ndim != 1 or a.shape != shape:
            raise InputError(
                f"dimensionality mismatch: {[x.shape for x in arrs]}"
            )
    if shape[0] == 0:
        raise InputError("samples must have at least one feature")
    return arrs


def euclidean(u, v) -> float:
    u, v = _as_vectors(u, v)
    diff = u - v
    return float(np.sqrt(diff @ diff))


def project_scalar(x, xi, xj) -> float:
    """Position of the foot of ``x`` along the edge ``xi -> xj``.

    0 maps to ``xi`` and 1 to ``xj``; the foot lies on the segment iff the
    result is in ``[0, 1]``.
    """
    x, xi, xj = _as_vectors(x, xi, xj)
    edge = xj - xi
    length2 = edge @ edge
    if length2 == 0.0:
        raise InputError("degenerate edge: endpoints coincide")
    return float(edge @ (x - xi) / length2)


def distance_to_edge(x, xi, xj) -> float:
    x, xi, xj = _as_vectors(x, xi, xj)
    edge = xj - xi
    length2 = edge @ edge
    if length2 == 0.0:
        # duplicate training samples: the edge is a point
        return euclidean(x, xi)
    t = edge @ (x - xi) / length2
    if 0.0 <= t <= 1.0:
        foot = xi + t * edge
        return euclidean(x, foot)
    return min(euclidean(x, xj), euclidean(x, xi))


def distances_to_edges(x, starts, ends) -> np.ndarray:
    """Vectorised :func:`distance_to_edge` for one point and many edges.

    ``starts`` and ``ends`` are ``(m, d)`` arrays of edge endpoints.
    """
    x = np.asarray(x, dtype=np.float64)
    starts = np.atleast_2d(np.asarray(starts, dtype=np.float64))
    ends = np.atleast_2d(np.asarray(ends, dtype=np.float64))
    if starts.shape != ends.shape or starts.shape[1:] != x.shape:
        raise InputError("dimensionality mismatch between point and edges")
    edge = ends - starts
    rel = x - starts
    length2 = np.einsum("ij,ij->i", edge, edge)
    dot = np.einsum("ij,ij->i", edge, rel)
    to_start = np.sqrt(np.einsum("ij,ij->i", rel, rel))
    rel_end = x - ends
    to_end = np.sqrt(np.einsum("ij,ij->i", rel_end, rel_end))
    out = np.minimum(to_end, to_start)

    inside = length2 > 0.0
    t = np.zeros_like(length2)
    t[inside] = dot[inside] / length2[inside]
    on_segment = inside & (t >= 0.0) & (t <= 1.0)
    if on_segment.any():
        foot = starts[on_segment] + t[on_segment, None] * edge[on_segment]
        perp = x - foot
        out[on_segment] = np.sqrt(np.einsum("ij,ij->i", perp, perp))
    return out
