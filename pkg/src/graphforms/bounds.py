"""Eigenvalue lower bounds, heat-kernel decay, and their verification reports.

Five checks are supported, named by what they compare:

  ENUMERATION  lambda_k >= 1 / (S * m(X minus first k-1 enumerated vertices))
  LINEAR       lambda_k >= k / (S * m(X)) - alpha / m(o)
  HEAT_TRACE   mean of the first k eigenvalues >= (1/(e S_p)) (k/m(X))^{1-2/p}
  HEAT_DECAY   p_{2t}(x,x) <= C1 * t^{-p/(p-2)}
  MU_UPPER     lambda_k <= k-th smallest value of 2D/m

Inequality directions dictate which Sobolev certificate each check may
consume: the lower bounds need an over-estimate of S in the denominator to
stay sound, so ENUMERATION/LINEAR take EXACT sup-norm constants while
HEAT_TRACE/HEAT_DECAY take UPPER p-norm bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constructions import mu_comparison
from .errors import BadEnumerationError, MissingEstimateError, WrongKindError
from .graphs import Graph, MeasureSpace, validate_enumeration
from .sobolev import EstimateKind, SobolevEstimate
from .spectral import Spectrum, heat_kernel

ENUMERATION = "ENUMERATION"
LINEAR = "LINEAR"
HEAT_TRACE = "HEAT_TRACE"
MU_UPPER = "MU_UPPER"
HEAT_DECAY = "HEAT_DECAY"

DEFAULT_MARGIN_TOL = 1e-9
DEFAULT_DECAY_TOL = 1e-10
DEFAULT_DECAY_TIMES = (0.1, 0.5, 1.0, 2.0, 5.0)


@dataclass(frozen=True)
class BoundRecord:
    """One compared pair; ``k`` is the eigenvalue index, or the time for decay checks."""

    k: float
    bound: float
    observed: float
    margin: float


@dataclass(frozen=True)
class BoundReport:
    """Outcome of one bound check over all indices.

    margin = observed - bound for lower bounds and bound - observed for
    upper bounds, so passing is always margin >= -tolerance; ``passed`` is
    exactly the conjunction of the per-record checks.
    """

    name: str
    records: tuple[BoundRecord, ...]
    passed: bool
    tolerance: float
    inputs: dict = field(default_factory=dict)

    @property
    def worst_margin(self) -> float:
        return min((r.margin for r in self.records), default=math.inf)

    def failures(self) -> list[BoundRecord]:
        return [r for r in self.records if r.margin < -self.tolerance]

    def to_dict(self) -> dict:
        return {
            "bound": self.name,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "worst_margin": None if not self.records else self.worst_margin,
            "inputs": self.inputs,
            "records": [
                {"k": r.k, "bound": r.bound, "observed": r.observed, "margin": r.margin}
                for r in self.records
            ],
        }

    def csv_rows(self) -> list[tuple[float, float, float, float]]:
        return [(r.k, r.bound, r.observed, r.margin) for r in self.records]


def _finalize(name: str, records: list[BoundRecord], tol: float,
              inputs: dict) -> BoundReport:
    passed = all(r.margin >= -tol for r in records)
    return BoundReport(name=name, records=tuple(records), passed=passed,
                       tolerance=tol, inputs=inputs)


# ---------------------------------------------------------------------------
# Individual bound values
# ---------------------------------------------------------------------------

def tail_masses(ms: MeasureSpace, enumeration: Sequence[int]) -> np.ndarray:
    """tail[k-1] = mass left after removing the first k-1 enumerated vertices.

    Computed by a reverse cumulative sum, which stays accurate when the
    tail is many orders below the total.
    """
    e = validate_enumeration(enumeration, ms.n)
    ordered = ms.m[e]
    return np.cumsum(ordered[::-1])[::-1].copy()


def bound_enumeration(s_value: float, ms: MeasureSpace,
                      enumeration: Sequence[int], k: int,
                      o: int | None = None) -> float:
    """Right side of the enumerated lower bound at index k (k = 1 uses full mass)."""
    e = validate_enumeration(enumeration, ms.n, start=o)
    if not 1 <= k <= ms.n:
        raise ValueError(f"k must be in 1..{ms.n}")
    tail = float(np.sum(ms.m[e[k - 1:]]))
    return 1.0 / (s_value * tail)


def bound_linear(s_value: float, ms: MeasureSpace, alpha: float,
                 o: int | None, k: int) -> float:
    """Right side of the enumeration-free lower bound at index k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    value = k / (s_value * ms.total)
    if alpha:
        if o is None:
            raise ValueError("alpha > 0 needs the anchor vertex")
        value -= alpha / float(ms.m[o])
    return value


def bound_heat_trace(s_p_value: float, ms: MeasureSpace, p: float, k: int) -> float:
    """(1/(e S_p)) (k / m(X))^{1 - 2/p}; exponent 1 at p = inf."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not p > 2:
        raise ValueError("p must exceed 2")
    exponent = 1.0 if math.isinf(p) else 1.0 - 2.0 / p
    return (k / ms.total) ** exponent / (math.e * s_p_value)


def c1_constant(s_p_value: float, p: float) -> float:
    """Decay prefactor (S_p / (2 (1 - 2/p)))^{p/(p-2)}, p in (2, inf)."""
    if not (2.0 < p < math.inf):
        raise ValueError("p must lie in (2, inf)")
    return (s_p_value / (2.0 * (1.0 - 2.0 / p))) ** (p / (p - 2.0))


# ---------------------------------------------------------------------------
# Report builders
# ---------------------------------------------------------------------------

def check_enumeration(spec: Spectrum, s_inf: SobolevEstimate, ms: MeasureSpace,
                      enumeration: Sequence[int],
                      tol: float = DEFAULT_MARGIN_TOL) -> BoundReport:
    if s_inf.kind is not EstimateKind.EXACT:
        raise WrongKindError("enumerated bound must consume an EXACT constant")
    anchor = s_inf.o if s_inf.alpha > 0 else None
    e = validate_enumeration(enumeration, ms.n, start=anchor)
    tails = tail_masses(ms, e)
    records = []
    for i, lam in enumerate(spec.lambdas):
        bound = 1.0 / (s_inf.value * tails[i])
        records.append(BoundRecord(k=i + 1, bound=bound, observed=float(lam),
                                   margin=float(lam) - bound))
    inputs = {"sobolev": s_inf.to_record(),
              "measure": {"n": ms.n, "total": ms.total},
              "enumeration": [int(x) for x in e],
              "anchor_constrained": s_inf.alpha > 0}
    return _finalize(ENUMERATION, records, tol, inputs)


def check_linear(spec: Spectrum, s_inf: SobolevEstimate, ms: MeasureSpace,
                 tol: float = DEFAULT_MARGIN_TOL) -> BoundReport:
    if s_inf.kind is not EstimateKind.EXACT:
        raise WrongKindError("linear bound must consume an EXACT constant")
    records = []
    for i, lam in enumerate(spec.lambdas):
        bound = bound_linear(s_inf.value, ms, s_inf.alpha, s_inf.o, i + 1)
        records.append(BoundRecord(k=i + 1, bound=bound, observed=float(lam),
                                   margin=float(lam) - bound))
    inputs = {"sobolev": s_inf.to_record(),
              "measure": {"n": ms.n, "total": ms.total}}
    return _finalize(LINEAR, records, tol, inputs)


def check_heat_trace(spec: Spectrum, s_p: SobolevEstimate, ms: MeasureSpace,
                     tol: float = DEFAULT_MARGIN_TOL) -> BoundReport:
    """Mean-eigenvalue version: the running mean dominates the trace bound."""
    if s_p.kind not in (EstimateKind.UPPER, EstimateKind.EXACT):
        raise WrongKindError("heat-trace bound needs an UPPER (or EXACT) S_p")
    means = spec.mean_prefix()
    records = []
    for i, bar in enumerate(means):
        bound = bound_heat_trace(s_p.value, ms, s_p.p, i + 1)
        records.append(BoundRecord(k=i + 1, bound=bound, observed=float(bar),
                                   margin=float(bar) - bound))
    inputs = {"sobolev": s_p.to_record(),
              "measure": {"n": ms.n, "total": ms.total}}
    return _finalize(HEAT_TRACE, records, tol, inputs)


def verify_heat_decay(kernels: Sequence, x: int | None, s_p: SobolevEstimate,
                      p: float | None = None,
                      tol: float = DEFAULT_DECAY_TOL) -> BoundReport:
    """Check p_{2t}(x, x) <= C1 t^{-p/(p-2)} over a kernel series.

    Each kernel must be computed at time 2t; the check reads t as half the
    kernel time.  ``x = None`` checks every vertex and records the worst
    diagonal entry per time.  The tightest time (smallest margin) is named
    in the report inputs.
    """
    if s_p.kind is not EstimateKind.UPPER:
        raise WrongKindError("decay check needs an UPPER S_p for a valid direction")
    p = s_p.p if p is None else p
    if p != s_p.p:
        raise WrongKindError(f"estimate is for p = {s_p.p}, check requested p = {p}")
    c1 = c1_constant(s_p.value, p)
    records = []
    for hk in kernels:
        t = hk.t / 2.0
        diag = np.diag(hk.values)
        observed = float(diag[x]) if x is not None else float(diag.max())
        bound = c1 * t ** (-p / (p - 2.0))
        records.append(BoundRecord(k=t, bound=bound, observed=observed,
                                   margin=bound - observed))
    inputs = {"sobolev": s_p.to_record(), "c1": c1,
              "vertex": "all" if x is None else x}
    if records:
        inputs["tightest_t"] = min(records, key=lambda r: r.margin).k
    return _finalize(HEAT_DECAY, records, tol, inputs)


def mu_upper_applicable(g: Graph) -> bool:
    """True when 2 deg(x) + c(x) <= 2 D holds everywhere, D the degree bound.

    That is exactly the pointwise inequality making the multiplication
    operator by 2D/m dominate the form, hence the comparison sound.  It
    holds for killing-free graphs and for Dirichlet truncations of them.
    """
    source = g.provenance.parent if g.provenance is not None else g
    big_d = float(source.deg.max()) if source.n else 0.0
    return bool(np.all(2.0 * g.deg + g.killing <= 2.0 * big_d + 1e-12))


def check_mu_upper(spec: Spectrum, g: Graph, ms: MeasureSpace,
                   tol: float = DEFAULT_MARGIN_TOL) -> BoundReport:
    mu = mu_comparison(g, ms)
    records = []
    for i, lam in enumerate(spec.lambdas):
        records.append(BoundRecord(k=i + 1, bound=float(mu[i]), observed=float(lam),
                                   margin=float(mu[i]) - float(lam)))
    source = g.provenance.parent if g.provenance is not None else g
    inputs = {"degree_bound": float(source.deg.max()) if source.n else 0.0,
              "degree_source": "parent" if g.provenance is not None else "self",
              "measure": {"n": ms.n, "total": ms.total}}
    return _finalize(MU_UPPER, records, tol, inputs)


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimateSet:
    """The Sobolev certificates one verification run consumes.

    ``s_infty`` is the EXACT (possibly anchored) constant feeding the
    ENUMERATION and LINEAR checks; ``uppers``/``lowers`` map p to the
    Prop-style UPPER bounds and the iteratively certified LOWER bounds.
    """

    s_infty: SobolevEstimate
    uppers: dict[float, SobolevEstimate] = field(default_factory=dict)
    lowers: dict[float, SobolevEstimate] = field(default_factory=dict)


def verify_all(spec: Spectrum, estimates: EstimateSet, ms: MeasureSpace,
               enumeration: Sequence[int], graph: Graph | None = None,
               times: Sequence[float] = DEFAULT_DECAY_TIMES,
               decay_vertex: int | None = None,
               tol: float = DEFAULT_MARGIN_TOL,
               decay_tol: float = DEFAULT_DECAY_TOL) -> list[BoundReport]:
    """Run every applicable bound check and return the reports.

    ENUMERATION and LINEAR consume the EXACT constant; HEAT_TRACE and
    HEAT_DECAY consume the UPPER p-norm bounds (one report per p, decay
    only for finite p); MU_UPPER runs when the degree comparison is sound
    for the graph at hand.
    """
    if estimates.s_infty is None or estimates.s_infty.kind is not EstimateKind.EXACT:
        raise MissingEstimateError("verification needs the EXACT sup-norm constant")
    reports = [
        check_enumeration(spec, estimates.s_infty, ms, enumeration, tol),
        check_linear(spec, estimates.s_infty, ms, tol),
    ]
    for p in sorted(estimates.uppers, key=lambda q: (math.isinf(q), q)):
        reports.append(check_heat_trace(spec, estimates.uppers[p], ms, tol))

    finite_ps = sorted(q for q in estimates.uppers if not math.isinf(q))
    if finite_ps and times:
        kernels = [heat_kernel(spec, ms, 2.0 * t) for t in times]
        for p in finite_ps:
            reports.append(verify_heat_decay(kernels, decay_vertex,
                                             estimates.uppers[p], tol=decay_tol))

    if graph is not None and mu_upper_applicable(graph):
        reports.append(check_mu_upper(spec, graph, ms, tol))
    return reports
