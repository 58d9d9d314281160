"""Form matrices, spectra, and heat kernels of graph Dirichlet forms.

The energy Q(f) = 1/2 sum b(x,y)|f(x)-f(y)|^2 + sum c(x)|f(x)|^2 is carried
by the symmetric matrix K with K(x,x) = deg(x) + c(x) and K(x,y) = -b(x,y);
the generator is the pencil (K, M) with M = diag(m).  The pencil is reduced
to a standard symmetric problem by the similarity M^{-1/2} K M^{-1/2},
formed with per-entry scaling because the sharpness measures span many
orders of magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .errors import (
    ConvergenceError,
    IncompleteSpectrumError,
    SizeMismatchError,
)
from .graphs import Graph, MeasureSpace


@dataclass(frozen=True)
class FormMatrix:
    """Matrix pair (K, M) of a graph Dirichlet form on l2(X, m).

    K is kept sparse (CSR); M is the measure diagonal.  The graph is
    retained so energies can be evaluated through the edge sum rather than
    the matrix product.
    """

    graph: Graph
    measure: MeasureSpace
    K: scipy.sparse.csr_matrix

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> np.ndarray:
        return self.measure.m

    @cached_property
    def k_norm(self) -> float:
        """Infinity norm of K (upper bound on the spectral norm)."""
        return float(abs(self.K).sum(axis=1).max()) if self.n else 0.0

    def dense(self) -> np.ndarray:
        return self.K.toarray()


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues of the pencil (K, M) with m-orthonormal vectors.

    ``vectors`` has one column per eigenpair; ``complete`` is true when
    every eigenpair of the pencil is present.
    """

    lambdas: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        self.lambdas.setflags(write=False)
        self.vectors.setflags(write=False)

    @property
    def k(self) -> int:
        return self.lambdas.size

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def complete(self) -> bool:
        return self.k == self.n

    def mean_prefix(self) -> np.ndarray:
        """Running means (lambda_1 + ... + lambda_k) / k."""
        return np.cumsum(self.lambdas) / np.arange(1, self.k + 1)


@dataclass(frozen=True)
class HeatKernel:
    """Heat kernel p_t(x, y) at a single time, stored as a symmetric matrix."""

    t: float
    values: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)


@dataclass
class EigensolveOptions:
    """Solver knobs; defaults target desk-scale reproducibility."""

    dense_threshold: int = 3000
    krylov_block: int = 32
    maxiter: int | None = None
    residual_tol: float = 1e-8


def assemble(g: Graph, ms: MeasureSpace) -> FormMatrix:
    """K(x,x) = deg(x) + c(x), K(x,y) = -b(x,y), M = diag(m)."""
    if g.n != ms.n:
        raise SizeMismatchError(f"graph has {g.n} vertices, measure has {ms.n}")
    u, v, w = g.edge_arrays()
    diag = g.deg + g.killing
    rows = np.concatenate([u, v, np.arange(g.n)])
    cols = np.concatenate([v, u, np.arange(g.n)])
    vals = np.concatenate([-w, -w, diag])
    K = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
    K.sum_duplicates()
    return FormMatrix(graph=g, measure=ms, K=K)


def eval_form(fm: FormMatrix, f: np.ndarray) -> float:
    """Energy Q(f) through the edge sum (not the matrix product)."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (fm.n,):
        raise SizeMismatchError(f"function has shape {f.shape}, expected ({fm.n},)")
    u, v, w = fm.graph.edge_arrays()
    edge_part = float(w @ (f[u] - f[v]) ** 2)
    kill_part = float(fm.graph.killing @ f ** 2)
    return edge_part + kill_part


def anchored_energy(fm: FormMatrix, f: np.ndarray, alpha: float = 0.0,
                    o: int | None = None) -> float:
    """Q(f) + alpha |f(o)|^2, the denominator of the anchored Sobolev ratio."""
    e = eval_form(fm, f)
    if alpha:
        if o is None:
            raise ValueError("anchored energy with alpha > 0 needs an anchor vertex")
        e += alpha * float(f[o]) ** 2
    return e


def _scaled_matrix(fm: FormMatrix) -> tuple[scipy.sparse.csr_matrix, np.ndarray]:
    d = 1.0 / np.sqrt(fm.m)
    A = fm.K.copy().tocoo()
    A.data = A.data * d[A.row] * d[A.col]
    return A.tocsr(), d


def _finish(fm: FormMatrix, vals: np.ndarray, psi: np.ndarray, d: np.ndarray,
            a_norm: float, options: EigensolveOptions) -> Spectrum:
    order = np.argsort(vals, kind="stable")
    vals = np.array(vals[order])
    phi = psi[:, order] * d[:, None]
    # PSD pencil: clip the roundoff negatives, reject anything worse
    scale = max(a_norm, 1.0)
    floor = -1e-10 * scale
    if vals.size and vals[0] < floor:
        raise ConvergenceError(
            f"negative eigenvalue {vals[0]:.3e} below the PSD roundoff floor {floor:.3e}",
            achieved_residual=float(-vals[0]))
    np.clip(vals, 0.0, None, out=vals)

    # residual guard in the measure-scaled metric, where backward stability lives
    resid = _scaled_residuals(fm, vals, phi)
    worst = float(resid.max()) if resid.size else 0.0
    if worst > options.residual_tol * scale:
        raise ConvergenceError(
            f"eigenpair residual {worst:.3e} exceeds {options.residual_tol:.1e} * |A| = "
            f"{options.residual_tol * scale:.3e}", achieved_residual=worst)
    return Spectrum(lambdas=vals, vectors=phi)


def _scaled_residuals(fm: FormMatrix, vals: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Column norms of M^{-1/2}(K phi - M phi Lambda); phi m-orthonormal."""
    if vals.size == 0:
        return np.zeros(0)
    r = fm.K @ phi - (fm.m[:, None] * phi) * vals[None, :]
    r = r / np.sqrt(fm.m)[:, None]
    return np.linalg.norm(r, axis=0)


def eigensolve(fm: FormMatrix, k: int | None = None,
               options: EigensolveOptions | None = None) -> Spectrum:
    """Lowest k eigenpairs of the pencil (K, M); k = None means all.

    Dense symmetric reduction below ``dense_threshold`` vertices, a
    shift-inverted Krylov iteration above (full spectra always take the
    dense path).  Raises ConvergenceError with the achieved residual when
    the eigenpair residual guard fails.
    """
    options = options or EigensolveOptions()
    n = fm.n
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")

    A, d = _scaled_matrix(fm)
    a_norm = float(abs(A).sum(axis=1).max()) if n else 0.0
    if n <= options.dense_threshold or k >= n - 1:
        w, psi = scipy.linalg.eigh(A.toarray())
        return _finish(fm, w[:k], psi[:, :k], d, a_norm, options)

    # smallest eigenvalues via shift-invert just below the PSD spectrum
    sigma = -max(1e-8 * a_norm, np.finfo(np.float64).tiny)
    ncv = min(n, max(2 * k + 1, options.krylov_block))
    try:
        w, psi = scipy.sparse.linalg.eigsh(
            A, k=k, sigma=sigma, which="LM", ncv=ncv,
            maxiter=options.maxiter)
    except scipy.sparse.linalg.ArpackNoConvergence as exc:
        got = len(exc.eigenvalues)
        raise ConvergenceError(
            f"Krylov iteration converged only {got}/{k} eigenpairs") from exc
    return _finish(fm, w, psi, d, a_norm, options)


def heat_kernel(spec: Spectrum, ms: MeasureSpace, t: float) -> HeatKernel:
    """p_t(x, y) = sum_j e^{-lambda_j t} phi_j(x) phi_j(y), t > 0."""
    if not spec.complete:
        raise IncompleteSpectrumError(
            f"heat kernel needs all {spec.n} eigenpairs, have {spec.k}")
    if spec.n != ms.n:
        raise SizeMismatchError("spectrum and measure sizes differ")
    if t <= 0:
        raise ValueError("time must be positive")
    weighted = spec.vectors * np.exp(-spec.lambdas * t)[None, :]
    values = weighted @ spec.vectors.T
    values = (values + values.T) / 2.0
    return HeatKernel(t=float(t), values=values)


def heat_trace(spec: Spectrum, t: float) -> float:
    """sum_i e^{-lambda_i t}; equals sum_x p_t(x,x) m(x) for complete spectra."""
    if not spec.complete:
        raise IncompleteSpectrumError(
            f"heat trace needs all {spec.n} eigenvalues, have {spec.k}")
    if t <= 0:
        raise ValueError("time must be positive")
    return float(np.sum(np.exp(-spec.lambdas * t)))


def semigroup_apply(spec: Spectrum, ms: MeasureSpace, t: float,
                    f: np.ndarray) -> np.ndarray:
    """e^{-tL} f through the eigenfunction expansion; t = 0 returns f."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (ms.n,):
        raise SizeMismatchError(f"function has shape {f.shape}, expected ({ms.n},)")
    if t < 0:
        raise ValueError("time must be nonnegative")
    if t == 0:
        return f.copy()
    if not spec.complete:
        raise IncompleteSpectrumError("semigroup application needs the full spectrum")
    coeff = spec.vectors.T @ (ms.m * f)
    return spec.vectors @ (np.exp(-spec.lambdas * t) * coeff)
