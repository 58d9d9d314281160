"""Exact sup-norm Sobolev constants and certified p-norm estimates.

The anchored inequality is  ||u||_p^2 <= S (Q(u) + alpha |u(o)|^2).  At
p = infinity the minimal S is exact: for fixed x the extremal ratio
|u(x)|^2 / (Q(u) + alpha|u(o)|^2) is the x-th diagonal entry of the
inverse of the augmented matrix A = K + alpha e_o e_o^T (maximizer: the
Green column A^{-1} e_x), so S is the largest diagonal of A^{-1} and never
reads the measure.  For p in (2, inf) the maximization is nonconvex, so
the package reports certified LOWER bounds (evaluated ratios) and an UPPER
bound S_inf * m(X)^{2/p}, never exactness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from .errors import SingularFormError, WrongKindError
from .graphs import MeasureSpace, connected_components
from .spectral import FormMatrix, anchored_energy

_SPARSE_GREEN_THRESHOLD = 4000


class EstimateKind(Enum):
    EXACT = "exact"
    LOWER = "lower"
    UPPER = "upper"


@dataclass(frozen=True)
class SobolevEstimate:
    """A Sobolev constant value with its certificate.

    ``witness`` is the maximizing vertex function for EXACT/LOWER; UPPER
    estimates carry a derivation ``note`` instead.  For LOWER estimates
    ``stationarity_residual`` is the normalized residual of the first-order
    condition at the witness.
    """

    p: float                       # exponent in (2, inf]; math.inf allowed
    alpha: float
    o: int | None
    value: float
    kind: EstimateKind
    witness: np.ndarray | None = None
    note: str | None = None
    stationarity_residual: float | None = None
    seed: int | None = None

    def to_record(self) -> dict:
        return {
            "p": "inf" if math.isinf(self.p) else self.p,
            "alpha": self.alpha,
            "o": self.o,
            "value": self.value,
            "kind": self.kind.value,
            "residual": self.stationarity_residual,
            "seed": self.seed,
        }


def _require_definite(fm: FormMatrix, alpha: float, o: int | None) -> None:
    """Structural positive-definiteness check of K + alpha e_o e_o^T.

    The form is singular exactly when some connected component carries no
    killing and no anchor: the indicator of that component has zero
    augmented energy.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if alpha > 0 and o is None:
        raise ValueError("alpha > 0 needs an anchor vertex o")
    for comp in connected_components(fm.graph):
        if np.any(fm.graph.killing[comp] > 0):
            continue
        if alpha > 0 and o in comp:
            continue
        raise SingularFormError(
            f"component containing vertex {int(comp[0])} has zero killing and no "
            "anchor; constant functions have zero energy")


def _augmented_dense(fm: FormMatrix, alpha: float, o: int | None) -> np.ndarray:
    A = fm.dense()
    if alpha:
        A[o, o] += alpha
    return A


def _green_columns(fm: FormMatrix, alpha: float, o: int | None):
    """Factor A = K + alpha e_o e_o^T and return (diag of A^{-1}, solve)."""
    n = fm.n
    if n <= _SPARSE_GREEN_THRESHOLD:
        A = _augmented_dense(fm, alpha, o)
        try:
            factor = scipy.linalg.cho_factor(A, lower=True)
        except scipy.linalg.LinAlgError as exc:
            raise SingularFormError(f"augmented form matrix is not positive definite: {exc}") from None
        inv = scipy.linalg.cho_solve(factor, np.eye(n))
        return np.diag(inv).copy(), (lambda b: scipy.linalg.cho_solve(factor, b))
    import scipy.sparse
    import scipy.sparse.linalg
    A = fm.K.tocsc(copy=True)
    if alpha:
        A = A + scipy.sparse.csc_matrix(([alpha], ([o], [o])), shape=(n, n))
    try:
        lu = scipy.sparse.linalg.splu(A.tocsc())
    except RuntimeError as exc:
        raise SingularFormError(f"augmented form matrix is not factorizable: {exc}") from None
    diag = np.empty(n)
    block = 256
    for start in range(0, n, block):
        cols = np.eye(n, min(block, n - start), k=-start)
        sol = lu.solve(cols)
        diag[start:start + sol.shape[1]] = np.diag(sol, k=-start)
    return diag, lu.solve


def sobolev_infty(fm: FormMatrix, alpha: float = 0.0,
                  o: int | None = None) -> SobolevEstimate:
    """Exact sup-norm Sobolev constant of the (anchored) form.

    The value is the largest diagonal entry of the inverse augmented
    matrix, computed through a positive-definite factorization and n
    solves; the witness is the Green column at the maximizing vertex.
    The measure is never read, so the value is measure-independent.
    """
    _require_definite(fm, alpha, o)
    diag, solve = _green_columns(fm, alpha, o)
    x_star = int(np.argmax(diag))
    e = np.zeros(fm.n)
    e[x_star] = 1.0
    witness = np.asarray(solve(e), dtype=np.float64)
    return SobolevEstimate(p=math.inf, alpha=float(alpha), o=o,
                           value=float(diag[x_star]), kind=EstimateKind.EXACT,
                           witness=witness,
                           note=f"maximizing vertex {x_star}")


def measure_norm(u: np.ndarray, m: np.ndarray, p: float) -> float:
    """||u||_p on l^p(X, m); p = inf gives the sup norm."""
    if math.isinf(p):
        return float(np.abs(u).max())
    return float(np.power(m @ np.abs(u) ** p, 1.0 / p))


def sobolev_ratio(fm: FormMatrix, u: np.ndarray, p: float, alpha: float = 0.0,
                  o: int | None = None) -> float:
    """The Rayleigh-type ratio ||u||_p^2 / (Q(u) + alpha |u(o)|^2)."""
    denom = anchored_energy(fm, u, alpha, o)
    if denom <= 0:
        return math.inf
    return measure_norm(u, fm.m, p) ** 2 / denom


def sobolev_p(fm: FormMatrix, p: float, alpha: float = 0.0, o: int | None = None,
              restarts: int = 4, seed: int = 0, max_iter: int = 10_000,
              improve_tol: float = 1e-12) -> SobolevEstimate:
    """Certified lower bound on the p-norm Sobolev constant, p in (2, inf).

    Runs the fixed-point iteration  u <- A^{-1}(m sign(u)|u|^{p-1}) from
    ``restarts`` seeded random starts plus the sup-norm witness and the
    best one-hot vertex, and returns the best evaluated ratio with the
    stationarity residual of its witness.  A stalled iteration still
    yields a valid LOWER bound, so no convergence error is raised.
    """
    if not (2.0 < p < math.inf):
        raise ValueError("p must lie in (2, inf); use sobolev_infty for p = inf")
    if restarts < 1:
        raise ValueError("need at least one restart")
    _require_definite(fm, alpha, o)
    diag, solve = _green_columns(fm, alpha, o)
    m = fm.m
    n = fm.n

    # augmented matrix diagonal for the one-hot floor start
    a_diag = fm.graph.deg + fm.graph.killing
    if alpha:
        a_diag = a_diag.copy()
        a_diag[o] += alpha
    one_hot_ratios = m ** (2.0 / p) / a_diag
    hot = np.zeros(n)
    hot[int(np.argmax(one_hot_ratios))] = 1.0

    green = np.zeros(n)
    green[int(np.argmax(diag))] = 1.0
    starts = [np.asarray(solve(green), dtype=np.float64), hot]
    rng = np.random.default_rng(seed)
    starts += [rng.standard_normal(n) for _ in range(restarts)]

    best_ratio = -math.inf
    best_u: np.ndarray | None = None
    for u0 in starts:
        u = u0 / measure_norm(u0, m, p)
        ratio = sobolev_ratio(fm, u, p, alpha, o)
        for _ in range(max_iter):
            w = m * np.sign(u) * np.abs(u) ** (p - 1.0)  # ||u||_p == 1
            v = np.asarray(solve(w), dtype=np.float64)
            v /= measure_norm(v, m, p)
            new_ratio = sobolev_ratio(fm, v, p, alpha, o)
            improvement = new_ratio - ratio
            if new_ratio >= ratio:  # ascent up to roundoff; keep the best
                u, ratio = v, new_ratio
            if improvement < improve_tol:
                break
        if ratio > best_ratio:
            best_ratio, best_u = ratio, u

    residual = _stationarity_residual(fm, best_u, p, alpha, o)
    return SobolevEstimate(p=float(p), alpha=float(alpha), o=o,
                           value=float(best_ratio), kind=EstimateKind.LOWER,
                           witness=best_u, stationarity_residual=residual,
                           seed=seed)


def _stationarity_residual(fm: FormMatrix, u: np.ndarray, p: float,
                           alpha: float, o: int | None) -> float:
    """|| A u - Q_a(u) m sign(u)|u|^{p-1} ||_2 / ||A u||_2 at ||u||_p = 1."""
    u = u / measure_norm(u, fm.m, p)
    au = fm.K @ u
    if alpha:
        au = au.copy()
        au[o] += alpha * u[o]
    target = anchored_energy(fm, u, alpha, o) * fm.m * np.sign(u) * np.abs(u) ** (p - 1.0)
    denom = float(np.linalg.norm(au))
    if denom == 0.0:
        return math.inf
    return float(np.linalg.norm(au - target) / denom)


def sobolev_upper(s_inf: SobolevEstimate, ms: MeasureSpace, p: float) -> SobolevEstimate:
    """Upper bound S_p <= S_inf * m(X)^{2/p} from the finite total mass.

    Requires the exact unanchored sup-norm constant; valid for every
    p in (2, inf], with the exponent vanishing as p -> inf.
    """
    if s_inf.kind is not EstimateKind.EXACT or not math.isinf(s_inf.p) or s_inf.alpha != 0:
        raise WrongKindError("upper bound needs the EXACT sup-norm constant at alpha = 0")
    if not p > 2:
        raise WrongKindError("p must exceed 2")
    exponent = 0.0 if math.isinf(p) else 2.0 / p
    value = s_inf.value * ms.total ** exponent
    return SobolevEstimate(p=float(p), alpha=0.0, o=None, value=float(value),
                           kind=EstimateKind.UPPER,
                           note="sup-norm constant times m(X)^(2/p)")
