"""Example graphs and the explicit measures used in the sharpness constructions."""

from __future__ import annotations

from itertools import product
from typing import Sequence

import numpy as np

from .errors import (
    IsolatedVertexError,
    NonIncreasingSequenceError,
    SizeMismatchError,
    SizeOverflowError,
)
from .graphs import Graph, MeasureSpace, build_graph

DEFAULT_VERTEX_CAP = 2_000_000


def lattice_ball(d: int, r: int, cap: int = DEFAULT_VERTEX_CAP
                 ) -> tuple[Graph, dict[tuple[int, ...], int]]:
    """Sup-norm ball of radius r in the d-dimensional integer lattice.

    Unit weights between Euclidean-distance-1 pairs, no killing.  Returns
    the graph and the coordinate-to-index map (lexicographic point order)
    for truncation bookkeeping.
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if r < 0:
        raise ValueError("radius must be >= 0")
    n = (2 * r + 1) ** d
    if n > cap:
        raise SizeOverflowError(f"(2r+1)^d = {n} exceeds cap {cap}")
    points = list(product(range(-r, r + 1), repeat=d))
    index = {p: i for i, p in enumerate(points)}
    edges = []
    for p, i in index.items():
        for axis in range(d):
            q = p[:axis] + (p[axis] + 1,) + p[axis + 1:]
            j = index.get(q)
            if j is not None:
                edges.append((i, j, 1.0))
    return build_graph(edges, np.zeros(n), n), index


def binary_tree(depth: int, cap: int = DEFAULT_VERTEX_CAP) -> Graph:
    """Rooted full binary tree, unit weights, vertices in breadth-first order."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    n = 2 ** (depth + 1) - 1
    if n > cap:
        raise SizeOverflowError(f"2^(depth+1)-1 = {n} exceeds cap {cap}")
    edges = [(i, child, 1.0)
             for i in range(n)
             for child in (2 * i + 1, 2 * i + 2)
             if child < n]
    return build_graph(edges, np.zeros(n), n)


def normalizing_measure(g: Graph) -> MeasureSpace:
    """m(x) = deg(x), the measure that normalizes the weighted degree."""
    if np.any(g.deg <= 0):
        bad = int(np.flatnonzero(g.deg <= 0)[0])
        raise IsolatedVertexError(f"vertex {bad} has zero degree")
    return MeasureSpace(g.deg)


def telescoping_measure(a: Sequence[float], n: int) -> MeasureSpace:
    """Probability-measure head m(x_j) = a1^2 (1/a_j^2 - 1/a_{j+1}^2), j = 1..n.

    Needs n+1 strictly increasing positive entries; the truncated tail mass
    after the first k vertices is a1^2 (1/a_{k+1}^2 - 1/a_{n+1}^2), and the
    total over all of an infinite enumeration telescopes to 1.
    """
    a = np.asarray(a, dtype=np.float64)
    if n < 1:
        raise ValueError("need n >= 1")
    if a.size < n + 1:
        raise ValueError(f"need {n + 1} sequence entries, got {a.size}")
    a = a[: n + 1]
    if np.any(a <= 0) or not np.all(np.isfinite(a)):
        raise NonIncreasingSequenceError("sequence must be strictly positive and finite")
    if np.any(a[1:] <= a[:-1]):
        raise NonIncreasingSequenceError("sequence must increase strictly (ties give m <= 0)")
    # difference-of-squares form avoids the cancellation in 1/a_j^2 - 1/a_{j+1}^2
    m = a[0] ** 2 * (a[1:] - a[:-1]) * (a[1:] + a[:-1]) / (a[:-1] ** 2 * a[1:] ** 2)
    return MeasureSpace(m)


def power_measure(n: int, eps: float) -> MeasureSpace:
    """m(x_j) = j^-(1 + eps/2) for j = 1..n (summable for every eps > 0)."""
    if n < 1:
        raise ValueError("need n >= 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    j = np.arange(1, n + 1, dtype=np.float64)
    return MeasureSpace(j ** -(1.0 + eps / 2.0))


def uniform_measure(n: int, total: float = 1.0) -> MeasureSpace:
    """Constant measure with prescribed total mass."""
    if n < 1:
        raise ValueError("need n >= 1")
    if total <= 0:
        raise ValueError("total mass must be positive")
    return MeasureSpace(np.full(n, total / n))


def mu_comparison(g: Graph, ms: MeasureSpace) -> np.ndarray:
    """Eigenvalues of multiplication by 2D/m, sorted ascending.

    D is the maximal weighted degree; for a truncation it is taken from the
    parent graph (the degree bound lives on the whole space), otherwise
    from the graph itself.  With no edges at all D = 0 and every mu is 0,
    a documented degenerate case.
    """
    if g.n != ms.n:
        raise SizeMismatchError(f"graph has {g.n} vertices, measure has {ms.n}")
    source = g.provenance.parent if g.provenance is not None else g
    big_d = float(source.deg.max()) if source.n else 0.0
    return np.sort(2.0 * big_d / ms.m)


# ---------------------------------------------------------------------------
# Named sequences for the telescoping construction
# ---------------------------------------------------------------------------

def named_sequence(kind: str, length: int, *, slope: float = 1.0,
                   ratio: float = 2.0, exponent: float = 2.0) -> np.ndarray:
    """Closed-form positive increasing sequences a_1, ..., a_length.

    kinds: "linear" (a_k = slope*k), "geometric" (a_k = ratio^k, ratio > 1),
    "polynomial" (a_k = k^exponent, exponent > 0).
    """
    k = np.arange(1, length + 1, dtype=np.float64)
    if kind == "linear":
        if slope <= 0:
            raise ValueError("slope must be positive")
        return slope * k
    if kind == "geometric":
        if ratio <= 1:
            raise ValueError("ratio must exceed 1")
        return ratio ** k
    if kind == "polynomial":
        if exponent <= 0:
            raise ValueError("exponent must be positive")
        return k ** exponent
    raise ValueError(f"unknown sequence kind {kind!r}; known: linear, geometric, polynomial")
