"""Plane-wave metrics in Brinkmann, Rosen, and Alekseevsky form.

All three live on U x R x X with coordinates (u, v, x), ordered (u, v, x1..xn)
in component matrices. The Alekseevsky rotation one-form enters the line
element as +2 xT w(u) dx du (the convention under which the constant-coefficient
conversion formulas are exact; see the conversions module).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._linalg import maxabs
from .errors import DomainError, SingularityError
from .profiles import Interval, MatrixProfile, trace_free_part

DEFAULT_TOL = 1e-10
PRED_GRID = 1001


@dataclass(frozen=True, eq=False)
class SpacetimePoint:
    u: float
    v: float
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).ravel())

    @classmethod
    def of(cls, u, v, x):
        return cls(float(u), float(v), np.asarray(x, dtype=float))

    def as_array(self):
        return np.concatenate([[self.u, self.v], self.x])


def _as_point(point, n):
    if isinstance(point, SpacetimePoint):
        p = point
    else:
        arr = np.asarray(point, dtype=float).ravel()
        p = SpacetimePoint(arr[0], arr[1], arr[2:])
    if p.x.size != n:
        raise DomainError(f"point has {p.x.size} transverse coordinates, metric has {n}")
    return p


@dataclass(frozen=True, eq=False)
class BrinkmannMetric:
    """2 du dv + xT p(u) x du^2 - dxT dx."""

    n: int
    domain: Interval
    p: MatrixProfile

    def __post_init__(self):
        if self.p.n != self.n:
            raise DomainError("profile dimension does not match the metric")
        if self.p.symmetry != "symmetric":
            raise DomainError("the tidal profile must be symmetric")

    def sample_grid(self, num=PRED_GRID):
        return _metric_grid(self, num)

    @property
    def form(self):
        return "brinkmann"


@dataclass(frozen=True, eq=False)
class RosenMetric:
    """2 du dv - dxT h(u) dx; h positive definite away from declared singular points."""

    n: int
    domain: Interval
    h: MatrixProfile
    singular_set: tuple = field(default=())

    def __post_init__(self):
        if self.h.n != self.n:
            raise DomainError("profile dimension does not match the metric")
        if self.h.symmetry != "symmetric":
            raise DomainError("the Rosen profile must be symmetric")
        object.__setattr__(self, "singular_set", tuple(sorted(float(s) for s in self.singular_set)))
        us = _metric_grid(self, 257)
        us = us[_regular_mask(us, self.singular_set)]
        if us.size:
            eigs = np.linalg.eigvalsh(self.h.eval_array(us, 0))
            if float(eigs.min()) <= -1e-10:
                raise SingularityError(
                    "h(u) is not positive semidefinite on the sampled regular set")

    def regular_grid(self, num=PRED_GRID, exclusion=1e-3):
        us = _metric_grid(self, num)
        return us[_regular_mask(us, self.singular_set, exclusion)]

    @property
    def form(self):
        return "rosen"


@dataclass(frozen=True, eq=False)
class AlekseevskyMetric:
    """du a - dxT dx with a = 2 dv + xT p(u) x du + 2 xT w(u) dx."""

    n: int
    domain: Interval
    p: MatrixProfile
    omega: MatrixProfile

    def __post_init__(self):
        if self.p.n != self.n or self.omega.n != self.n:
            raise DomainError("profile dimensions do not match the metric")
        if self.p.symmetry != "symmetric":
            raise DomainError("p must be symmetric")
        if self.omega.symmetry != "skew":
            raise DomainError("omega must be skew")

    def sample_grid(self, num=PRED_GRID):
        return _metric_grid(self, num)

    @property
    def form(self):
        return "alekseevsky"


PlaneWaveMetric = (BrinkmannMetric, RosenMetric, AlekseevskyMetric)


def _regular_mask(us, singular_set, exclusion=1e-3):
    mask = np.ones(us.shape, dtype=bool)
    for s in singular_set:
        mask &= np.abs(us - s) > exclusion
    return mask


def _metric_grid(metric, num=PRED_GRID):
    profile = metric.p if hasattr(metric, "p") else metric.h
    lo, hi = profile.window()
    lo = max(lo, metric.domain.lo)
    hi = min(hi, metric.domain.hi)
    if not lo < hi:
        lo, hi = metric.domain.bounded_window()
    pad = (hi - lo) * 1e-9
    us = np.linspace(lo + pad, hi - pad, num)
    ks = profile.knots()
    if ks.size:
        ks = ks[(ks > lo) & (ks < hi)]
        us = np.unique(np.concatenate([us, ks]))
    return us


def metric_components(metric, point) -> np.ndarray:
    """The (n+2)x(n+2) symmetric component matrix at a point, order (u, v, x)."""
    pt = _as_point(point, metric.n)
    if not metric.domain.contains(pt.u):
        raise DomainError(f"u = {pt.u} outside the metric domain")
    n = metric.n
    g = np.zeros((n + 2, n + 2))
    g[0, 1] = g[1, 0] = 1.0
    if isinstance(metric, BrinkmannMetric):
        g[0, 0] = float(pt.x @ metric.p.eval(pt.u) @ pt.x)
        g[2:, 2:] = -np.eye(n)
    elif isinstance(metric, RosenMetric):
        g[2:, 2:] = -metric.h.eval(pt.u)
    elif isinstance(metric, AlekseevskyMetric):
        g[0, 0] = float(pt.x @ metric.p.eval(pt.u) @ pt.x)
        row = pt.x @ metric.omega.eval(pt.u)
        g[0, 2:] = row
        g[2:, 0] = row
        g[2:, 2:] = -np.eye(n)
    else:
        raise DomainError(f"unsupported metric type {type(metric).__name__}")
    return g


def is_vacuum(metric: BrinkmannMetric, tol: float = DEFAULT_TOL) -> bool:
    """True iff sup |tr p(u)| <= tol on the sample grid."""
    us = metric.sample_grid()
    traces = np.trace(metric.p.eval_array(us, 0), axis1=1, axis2=2)
    return bool(np.max(np.abs(traces)) <= tol)


def is_flat(metric: BrinkmannMetric, tol: float = DEFAULT_TOL) -> bool:
    """True iff sup ||p(u)|| <= tol on the sample grid."""
    us = metric.sample_grid()
    return bool(np.max(np.linalg.norm(metric.p.eval_array(us, 0), axis=(1, 2))) <= tol)


def is_conformally_curved(metric: BrinkmannMetric, tol: float = DEFAULT_TOL) -> bool:
    """True iff n > 1 and the trace-free part of p is not identically zero.

    Three-dimensional plane waves (n = 1) are always conformally trivial.
    """
    if metric.n == 1:
        return False
    us = metric.sample_grid()
    tf = trace_free_part(metric.p).eval_array(us, 0)
    return bool(np.max(np.linalg.norm(tf, axis=(1, 2))) > tol)
