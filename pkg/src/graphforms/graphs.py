"""Weighted graphs (b, c), discrete measures, and finite Dirichlet/Neumann truncations.

A graph is a symmetric nonnegative edge weight b with zero diagonal plus a
nonnegative killing term c per vertex.  Vertices are dense integer indices
0..n-1; infinite graphs enter only through generators plus explicit
truncation, so everything here is finite.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import (
    BadEnumerationError,
    EmptySubsetError,
    IndexOutOfRangeError,
    NegativeWeightError,
    SelfLoopError,
    SizeMismatchError,
)


class BoundaryMode(Enum):
    """How edges leaving a truncated region are handled."""

    DIRICHLET = "dirichlet"  # fold boundary edges into the killing term
    NEUMANN = "neumann"      # discard boundary edges


@dataclass(frozen=True)
class Truncation:
    """Provenance of a graph obtained by restricting a parent graph.

    Attributes
    ----------
    parent : Graph
        The graph the restriction was taken from.
    inside : tuple[int, ...]
        Parent vertex indices kept, in the order they appear in the result.
    mode : BoundaryMode
        DIRICHLET folds every cut edge into the killing term of its inside
        endpoint; NEUMANN drops cut edges.
    """

    parent: "Graph"
    inside: tuple[int, ...]
    mode: BoundaryMode


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Graph:
    """Finite weighted graph with killing term.

    Edge storage is an adjacency list of (neighbor, weight) sorted by
    neighbor index; both orientations of an edge read the same stored
    float, so b(x, y) == b(y, x) bit-identically.  Instances are immutable
    after construction and safe to share across workers.

    Parameters
    ----------
    neighbors, weights : list of ndarray
        Per-vertex sorted neighbor indices and matching weights.
    killing : ndarray
        Nonnegative killing term c per vertex.
    provenance : Truncation, optional
        Set when the graph came out of :func:`truncate`.
    """

    __slots__ = ("n", "neighbors", "weights", "killing", "deg", "provenance",
                 "_edge_arrays")

    def __init__(self, neighbors: list[np.ndarray], weights: list[np.ndarray],
                 killing: np.ndarray, provenance: Truncation | None = None):
        self.n = len(killing)
        self.neighbors = [_readonly(np.asarray(v, dtype=np.int64)) for v in neighbors]
        self.weights = [_readonly(np.asarray(w, dtype=np.float64)) for w in weights]
        self.killing = _readonly(np.asarray(killing, dtype=np.float64))
        self.deg = _readonly(np.array([w.sum() for w in self.weights]))
        self.provenance = provenance
        self._edge_arrays = None

    @property
    def edge_count(self) -> int:
        return sum(len(v) for v in self.neighbors) // 2

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Each undirected edge once as arrays (u, v, w) with u < v."""
        if self._edge_arrays is None:
            us, vs, ws = [], [], []
            for x in range(self.n):
                nbr, wt = self.neighbors[x], self.weights[x]
                keep = nbr > x
                us.append(np.full(int(keep.sum()), x, dtype=np.int64))
                vs.append(nbr[keep])
                ws.append(wt[keep])
            self._edge_arrays = (
                _readonly(np.concatenate(us) if us else np.empty(0, np.int64)),
                _readonly(np.concatenate(vs) if vs else np.empty(0, np.int64)),
                _readonly(np.concatenate(ws) if ws else np.empty(0, np.float64)),
            )
        return self._edge_arrays

    def weight(self, x: int, y: int) -> float:
        """b(x, y); zero when not adjacent."""
        i = np.searchsorted(self.neighbors[x], y)
        if i < len(self.neighbors[x]) and self.neighbors[x][i] == y:
            return float(self.weights[x][i])
        return 0.0

    def with_killing(self, killing: Sequence[float]) -> "Graph":
        """Same edges, replaced killing term (used for Neumann reinterpretation)."""
        killing = np.asarray(killing, dtype=np.float64)
        if len(killing) != self.n:
            raise SizeMismatchError(f"killing has length {len(killing)}, graph has {self.n} vertices")
        if np.any(killing < 0):
            raise NegativeWeightError("killing term must be nonnegative")
        return Graph(list(self.neighbors), list(self.weights), killing)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count}, killed={int(np.count_nonzero(self.killing))})"


class MeasureSpace:
    """Strictly positive vertex measure m with cached total mass m(X).

    The total is accumulated with math.fsum so it agrees with the entry sum
    to well within the 1e-12*n tolerance the rest of the package assumes.
    """

    __slots__ = ("m", "total")

    def __init__(self, m: Sequence[float], total: float | None = None):
        import math

        arr = _readonly(np.asarray(m, dtype=np.float64))
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("measure must be a nonempty 1-d array")
        if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
            raise ValueError("measure must be strictly positive and finite")
        exact = math.fsum(arr.tolist())
        if total is not None and abs(total - exact) > 1e-12 * arr.size * max(1.0, abs(exact)):
            raise ValueError(f"declared total {total!r} disagrees with entry sum {exact!r}")
        self.m = arr
        self.total = exact

    @property
    def n(self) -> int:
        return self.m.size

    def __repr__(self) -> str:
        return f"MeasureSpace(n={self.n}, total={self.total:.6g})"


def build_graph(edges: Iterable[tuple[int, int, float]], killing: Sequence[float],
                n: int) -> Graph:
    """Assemble a graph from an unordered edge list.

    Each listed edge populates both orientations; duplicate listings are
    summed in canonical (min, max) order, so assembly is deterministic.

    Raises
    ------
    NegativeWeightError, SelfLoopError, IndexOutOfRangeError
    """
    killing = np.asarray(killing, dtype=np.float64)
    if len(killing) != n:
        raise SizeMismatchError(f"killing has length {len(killing)}, expected {n}")
    if np.any(killing < 0):
        raise NegativeWeightError("killing term must be nonnegative")

    edges = list(edges)
    if edges:
        e = np.asarray([(x, y, w) for x, y, w in edges], dtype=np.float64)
        xs = e[:, 0].astype(np.int64)
        ys = e[:, 1].astype(np.int64)
        ws = e[:, 2]
        if np.any(e[:, 0] != xs) or np.any(e[:, 1] != ys):
            raise IndexOutOfRangeError("edge endpoints must be integers")
        if np.any((xs < 0) | (xs >= n) | (ys < 0) | (ys >= n)):
            raise IndexOutOfRangeError("edge endpoint outside 0..n-1")
        if np.any(xs == ys):
            raise SelfLoopError("self-loops are not allowed (b vanishes on the diagonal)")
        if np.any(ws <= 0) or not np.all(np.isfinite(ws)):
            raise NegativeWeightError("edge weights must be positive and finite")
        u = np.minimum(xs, ys)
        v = np.maximum(xs, ys)
        order = np.lexsort((v, u))
        u, v, ws = u[order], v[order], ws[order]
        # sum duplicate listings of the same canonical edge, left to right
        key_change = np.empty(len(u), dtype=bool)
        key_change[0] = True
        key_change[1:] = (u[1:] != u[:-1]) | (v[1:] != v[:-1])
        starts = np.flatnonzero(key_change)
        u, v = u[starts], v[starts]
        ws = np.add.reduceat(ws, starts)
    else:
        u = v = np.empty(0, dtype=np.int64)
        ws = np.empty(0, dtype=np.float64)

    return _from_canonical_edges(u, v, ws, killing)


def _from_canonical_edges(u: np.ndarray, v: np.ndarray, w: np.ndarray,
                          killing: np.ndarray,
                          provenance: Truncation | None = None) -> Graph:
    """Build adjacency from unique canonical edges (u < v), already sorted."""
    n = len(killing)
    half_x = np.concatenate([u, v])
    half_y = np.concatenate([v, u])
    half_w = np.concatenate([w, w])
    order = np.lexsort((half_y, half_x))
    half_x, half_y, half_w = half_x[order], half_y[order], half_w[order]
    counts = np.bincount(half_x, minlength=n)
    splits = np.cumsum(counts)[:-1]
    neighbors = np.split(half_y, splits)
    weights = np.split(half_w, splits)
    return Graph(list(neighbors), list(weights), killing, provenance)


def truncate(g: Graph, inside: Sequence[int], mode: BoundaryMode) -> Graph:
    """Restrict a graph to an ordered vertex subset.

    DIRICHLET folds every edge from an inside vertex to an outside vertex
    into extra killing on the inside endpoint; NEUMANN discards those
    edges.  The result's vertex order follows ``inside``.
    """
    inside = np.asarray(inside, dtype=np.int64)
    if inside.size == 0:
        raise EmptySubsetError("truncation subset must be nonempty")
    if np.any((inside < 0) | (inside >= g.n)):
        raise IndexOutOfRangeError("truncation subset contains an invalid vertex")
    if len(np.unique(inside)) != inside.size:
        raise BadEnumerationError("truncation subset contains repeated vertices")

    new_index = np.full(g.n, -1, dtype=np.int64)
    new_index[inside] = np.arange(inside.size)

    us, vs, ws = [], [], []
    killing = g.killing[inside].copy()
    for new_x, old_x in enumerate(inside):
        nbr, wt = g.neighbors[old_x], g.weights[old_x]
        mapped = new_index[nbr]
        cut = mapped < 0
        if mode is BoundaryMode.DIRICHLET and cut.any():
            killing[new_x] += wt[cut].sum()
        keep = (~cut) & (mapped > new_x)  # each inside edge once, canonical
        us.append(np.full(int(keep.sum()), new_x, dtype=np.int64))
        vs.append(mapped[keep])
        ws.append(wt[keep])

    u = np.concatenate(us) if us else np.empty(0, np.int64)
    v = np.concatenate(vs) if vs else np.empty(0, np.int64)
    w = np.concatenate(ws) if ws else np.empty(0, np.float64)
    order = np.lexsort((v, u))
    prov = Truncation(parent=g, inside=tuple(int(i) for i in inside), mode=mode)
    return _from_canonical_edges(u[order], v[order], w[order], killing, prov)


# ---------------------------------------------------------------------------
# Normal contractions (C(0) = 0, |C(s) - C(t)| <= |s - t|)
# ---------------------------------------------------------------------------

def identity_contraction(s: np.ndarray) -> np.ndarray:
    return np.asarray(s, dtype=np.float64)


def absolute_contraction(s: np.ndarray) -> np.ndarray:
    return np.abs(s)


def clamp_unit_contraction(s: np.ndarray) -> np.ndarray:
    """Clamp to [0, 1], the unit-interval contraction of Markovian forms."""
    return np.clip(s, 0.0, 1.0)


def truncation_contraction(level: float) -> Callable[[np.ndarray], np.ndarray]:
    """Contraction cutting off at +-level (level > 0)."""
    if level <= 0:
        raise ValueError("truncation level must be positive")

    def cut(s: np.ndarray) -> np.ndarray:
        return np.clip(s, -level, level)

    return cut


NORMAL_CONTRACTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "identity": identity_contraction,
    "abs": absolute_contraction,
    "clamp01": clamp_unit_contraction,
    "truncate1": truncation_contraction(1.0),
}


def markov_contract(f: Sequence[float],
                    contraction: str | Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a normal contraction pointwise to a vertex function."""
    f = np.asarray(f, dtype=np.float64)
    if isinstance(contraction, str):
        try:
            contraction = NORMAL_CONTRACTIONS[contraction]
        except KeyError:
            raise KeyError(f"unknown contraction {contraction!r}; "
                           f"known: {sorted(NORMAL_CONTRACTIONS)}") from None
    return np.asarray(contraction(f), dtype=np.float64)


def bfs_enumeration(g: Graph, root: int = 0) -> np.ndarray:
    """Deterministic breadth-first vertex order from ``root``.

    Neighbors are visited in ascending index order; remaining components
    are appended from their lowest-index vertex.
    """
    if root < 0 or root >= g.n:
        raise IndexOutOfRangeError(f"root {root} outside 0..{g.n - 1}")
    order = np.empty(g.n, dtype=np.int64)
    seen = np.zeros(g.n, dtype=bool)
    pos = 0
    start = root
    while pos < g.n:
        queue = deque([start])
        seen[start] = True
        while queue:
            x = queue.popleft()
            order[pos] = x
            pos += 1
            for y in g.neighbors[x]:  # already sorted ascending
                if not seen[y]:
                    seen[y] = True
                    queue.append(int(y))
        if pos < g.n:
            start = int(np.flatnonzero(~seen)[0])
    return order


def validate_enumeration(enumeration: Sequence[int], n: int,
                         start: int | None = None) -> np.ndarray:
    """Check a vertex enumeration is a permutation of 0..n-1 (optionally anchored)."""
    e = np.asarray(enumeration, dtype=np.int64)
    if e.size != n or not np.array_equal(np.sort(e), np.arange(n)):
        raise BadEnumerationError("enumeration is not a permutation of the vertex set")
    if start is not None and e[0] != start:
        raise BadEnumerationError(f"enumeration must start at the anchor vertex {start}")
    return e


def connected_components(g: Graph) -> list[np.ndarray]:
    """Vertex sets of the connected components (by positive edge weight)."""
    comps = []
    seen = np.zeros(g.n, dtype=bool)
    for s in range(g.n):
        if seen[s]:
            continue
        queue = deque([s])
        seen[s] = True
        comp = [s]
        while queue:
            x = queue.popleft()
            for y in g.neighbors[x]:
                if not seen[y]:
                    seen[y] = True
                    comp.append(int(y))
                    queue.append(int(y))
        comps.append(np.asarray(sorted(comp), dtype=np.int64))
    return comps
