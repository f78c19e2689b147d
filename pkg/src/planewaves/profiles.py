"""Smooth matrix-valued functions of the wave coordinate u with derivative access.

Profiles are immutable after construction and evaluation is pure, so concurrent
reads are safe. Every variant guarantees:

* evaluations return matrices of the declared symmetry type (symmetric/skew)
  up to round-off,
* derivatives of order <= 3 are available everywhere on the declared interval
  (analytic for closed-form variants, spline/finite-difference for sampled and
  derived ones).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from ._linalg import check_skew, check_symmetric, maxabs
from .errors import DomainError, SymmetryError
from .sequences import ShiftSequence, p_alpha

_INF = math.inf
_DEFAULT_HALF_WINDOW = 8.0

SYMMETRIC = "symmetric"
SKEW = "skew"
GENERAL = "general"


@dataclass(frozen=True)
class Interval:
    """Open, non-empty, connected subset of the reals; either end may be infinite."""

    lo: float = -_INF
    hi: float = _INF

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"interval requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def bounded(self):
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def contains(self, u, margin=0.0):
        return self.lo + margin < u < self.hi - margin

    def contains_all(self, us):
        us = np.asarray(us)
        return bool(np.all((us > self.lo) & (us < self.hi)))

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def bounded_window(self, half=_DEFAULT_HALF_WINDOW, center=0.0):
        """Finite (lo, hi) for sampling: clips infinite ends around a finite anchor."""
        lo, hi = self.lo, self.hi
        if not math.isfinite(lo) and not math.isfinite(hi):
            return center - half, center + half
        if not math.isfinite(lo):
            return hi - 2 * half, hi
        if not math.isfinite(hi):
            return lo, lo + 2 * half
        return lo, hi

    def grid(self, num=1001, margin_rel=1e-6, half=_DEFAULT_HALF_WINDOW):
        lo, hi = self.bounded_window(half)
        pad = (hi - lo) * margin_rel
        return np.linspace(lo + pad, hi - pad, num)

    def to_json(self):
        def enc(x):
            return x if math.isfinite(x) else ("-inf" if x < 0 else "inf")

        return [enc(self.lo), enc(self.hi)]

    @classmethod
    def from_json(cls, data):
        def dec(x):
            if isinstance(x, str):
                return -_INF if x.strip() in ("-inf", "-Infinity") else _INF
            return float(x)

        return cls(dec(data[0]), dec(data[1]))


REAL_LINE = Interval()


def _detect_symmetry(m, tol=1e-9):
    if maxabs(m - m.T) <= tol * (1.0 + maxabs(m)):
        return SYMMETRIC
    if maxabs(m + m.T) <= tol * (1.0 + maxabs(m)):
        return SKEW
    raise SymmetryError("matrix is neither symmetric nor skew within tolerance")


class MatrixProfile:
    """Base class. Subclasses implement _eval_array(us, order) for order 0..3."""

    n: int
    interval: Interval
    symmetry: str

    max_order = 3

    def eval(self, u, order=0):
        """Value or u-derivative (order <= 3) at a single point of the interval."""
        self._check(np.asarray([u], dtype=float), order)
        return self._eval_array(np.asarray([u], dtype=float), order)[0]

    def eval_array(self, us, order=0):
        us = np.asarray(us, dtype=float)
        self._check(us, order)
        return self._eval_array(us, order)

    __call__ = eval

    def _check(self, us, order):
        if not 0 <= order <= self.max_order:
            raise DomainError(f"derivative order {order} not in 0..{self.max_order}")
        if us.size and not self.interval.contains_all(us):
            raise DomainError("evaluation point outside the profile's interval")

    def knots(self):
        """Distinguished u-values (grid knots, integer bump joints); may be empty."""
        return np.empty(0)

    def window(self):
        """Finite (lo, hi) window representative of the profile for sampling."""
        return self.interval.bounded_window()

    def sample_grid(self, num=1001):
        lo, hi = self.window()
        pad = (hi - lo) * 1e-9
        us = np.linspace(lo + pad, hi - pad, num)
        ks = self.knots()
        if ks.size:
            ks = ks[(ks > lo) & (ks < hi)]
            us = np.unique(np.concatenate([us, ks]))
        return us

    def _fd(self, us, order, base_order, h=None):
        """Central finite difference of the base_order evaluation, nested as needed."""
        lo, hi = self.interval.lo, self.interval.hi
        span = min(hi, us.max() + 1.0) - max(lo, us.min() - 1.0)
        h = h or max(1e-6, 1e-4 * min(span, 20.0))

        def ev(x, k):
            if k <= base_order:
                return self._eval_array(x, k)
            xp = np.minimum(x + h, hi - h * 1e-3) if math.isfinite(hi) else x + h
            xm = np.maximum(x - h, lo + h * 1e-3) if math.isfinite(lo) else x - h
            return (ev(xp, k - 1) - ev(xm, k - 1)) / (xp - xm)[:, None, None]

        return ev(us, order)

    def deriv_any(self, us, order):
        """Derivative of any order; orders above the analytic limit use nested
        central differences of the top analytic order (accuracy degrades)."""
        us = np.asarray(us, dtype=float)
        if order <= self.max_order:
            return self.eval_array(us, order)
        return self._fd(us, order, self.max_order, h=5e-3)

    def to_json(self):  # pragma: no cover - overridden where serialization is exact
        return sampled_from(self).to_json()


@dataclass(frozen=True, eq=False)
class ConstantProfile(MatrixProfile):
    matrix: np.ndarray
    interval: Interval = REAL_LINE
    symmetry: str = field(default="")

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "n", m.shape[0])
        if not self.symmetry:
            object.__setattr__(self, "symmetry", _detect_symmetry(m))
        elif self.symmetry == SYMMETRIC:
            check_symmetric(m)
        elif self.symmetry == SKEW:
            check_skew(m)

    def _eval_array(self, us, order):
        if order == 0:
            return np.broadcast_to(self.matrix, (us.size, self.n, self.n)).copy()
        return np.zeros((us.size, self.n, self.n))

    def window(self):
        return self.interval.bounded_window(half=4.0)

    def to_json(self):
        return {"type": "constant", "matrix": self.matrix.tolist(),
                "domain": self.interval.to_json()}


class RotatingConstantProfile(MatrixProfile):
    """u -> e^{u w} B e^{-u w} for a constant skew generator w and constant base B."""

    def __init__(self, omega, base, interval=REAL_LINE):
        self.omega = check_skew(np.asarray(omega, dtype=float), what="generator")
        self.base = np.atleast_2d(np.asarray(base, dtype=float))
        if self.base.shape != self.omega.shape:
            raise DomainError("generator and base must have matching shapes")
        self.symmetry = _detect_symmetry(self.base)
        self.n = self.base.shape[0]
        self.interval = interval
        # batched exponentials via the (complex) eigendecomposition of the generator
        w, v = np.linalg.eig(self.omega)
        self._eig = (w, v, np.linalg.inv(v))

    def _rot(self, us):
        w, v, vinv = self._eig
        return np.einsum("ij,tj,jk->tik", v, np.exp(np.outer(us, w)), vinv).real

    def _eval_array(self, us, order):
        p = np.einsum("tij,jk,tlk->til", self._rot(us), self.base, self._rot(us))
        for _ in range(order):
            p = np.einsum("ij,tjk->tik", self.omega, p) - np.einsum(
                "tij,jk->tik", p, self.omega
            )
        return p

    def window(self):
        return self.interval.bounded_window(half=6.0)

    def to_json(self):
        return {"type": "rotating_constant", "omega": self.omega.tolist(),
                "base": self.base.tolist(), "domain": self.interval.to_json()}


class PowerLawProfile(MatrixProfile):
    """u -> (a - b u)^{-2} B on a component of a - b u != 0."""

    def __init__(self, a, b, base, interval=None):
        self.a, self.b = float(a), float(b)
        self.base = check_symmetric(np.atleast_2d(np.asarray(base, dtype=float)))
        self.symmetry = SYMMETRIC
        self.n = self.base.shape[0]
        if interval is None:
            interval = Interval(-_INF, self.a / self.b) if self.b > 0 else (
                Interval(self.a / self.b, _INF) if self.b < 0 else REAL_LINE)
        if self.b != 0.0 and interval.contains(self.a / self.b):
            raise DomainError("interval must exclude the pole u = a/b")
        self.interval = interval

    def _eval_array(self, us, order):
        t = self.a - self.b * us
        s = math.factorial(order + 1) * self.b**order * t ** (-(2 + order))
        return s[:, None, None] * self.base

    def window(self):
        lo, hi = self.interval.lo, self.interval.hi
        if self.b != 0.0:
            pole = self.a / self.b
            # stay a fixed distance from the pole when the interval touches it
            if math.isclose(hi, pole):
                hi = pole - 0.05
            if math.isclose(lo, pole):
                lo = pole + 0.05
        return Interval(lo, min(hi, lo + 16) if math.isfinite(lo) else hi).bounded_window()

    def to_json(self):
        return {"type": "power_law", "a": self.a, "b": self.b,
                "base": self.base.tolist(), "domain": self.interval.to_json()}


class ScalarTimesFixedProfile(MatrixProfile):
    """s(u) * M for a scalar profile s (a 1x1 profile) and a fixed matrix M."""

    def __init__(self, scalar: MatrixProfile, matrix):
        if scalar.n != 1:
            raise DomainError("scalar factor must be a 1x1 profile")
        self.scalar = scalar
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.symmetry = _detect_symmetry(self.matrix)
        self.n = self.matrix.shape[0]
        self.interval = scalar.interval

    def _eval_array(self, us, order):
        s = self.scalar._eval_array(us, order)[:, 0, 0]
        return s[:, None, None] * self.matrix

    def knots(self):
        return self.scalar.knots()

    def window(self):
        return self.scalar.window()

    def to_json(self):
        return {"type": "scalar_times_fixed", "scalar": self.scalar.to_json(),
                "matrix": self.matrix.tolist()}


class ShiftBumpProfile(MatrixProfile):
    """Scalar (1x1) bump train p_alpha(u) driven by a shift sequence."""

    def __init__(self, sequence: ShiftSequence, interval=REAL_LINE):
        self.sequence = sequence
        self.n = 1
        self.symmetry = SYMMETRIC
        self.interval = interval

    def _eval_array(self, us, order):
        return p_alpha(self.sequence, us, order).reshape(-1, 1, 1)

    def knots(self):
        lo, hi = self.sequence.lo, self.sequence.hi
        return np.arange(lo - 1, hi + 3, dtype=float)

    def window(self):
        return float(self.sequence.lo - 1), float(self.sequence.hi + 2)

    def to_json(self):
        return {"type": "shift_bump",
                "window": [self.sequence.lo, self.sequence.hi],
                "values": list(self.sequence.values)}


def bernoulli_family_profile(sequence: ShiftSequence) -> ScalarTimesFixedProfile:
    """The trace-free 2x2 embedding p_alpha(u) * diag(1, -1)."""
    return ScalarTimesFixedProfile(ShiftBumpProfile(sequence), np.diag([1.0, -1.0]))


class SampledProfile(MatrixProfile):
    """Natural cubic spline through matrix samples on a strictly increasing grid.

    Third derivatives use a central difference of the spline's second derivative.
    """

    def __init__(self, grid, values, symmetry=None):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.ndim != 1 or grid.size < 4:
            raise DomainError("sampled profiles need at least 4 grid points")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing")
        if values.shape[0] != grid.size:
            raise DomainError("one matrix per grid point required")
        self.grid = grid
        self.values = values
        self.symmetry = symmetry or _detect_symmetry(values[0])
        check = check_symmetric if self.symmetry == SYMMETRIC else check_skew
        for v in values[:: max(1, len(values) // 16)]:
            check(v, tol=1e-8, what="sampled value")
        self.n = values.shape[1]
        self.interval = Interval(grid[0], grid[-1])
        self._spline = CubicSpline(grid, values, axis=0, bc_type="natural")

    def _eval_array(self, us, order):
        if order <= 2:
            return self._spline(us, nu=order)
        h = max(1e-6, 1e-4 * (self.grid[-1] - self.grid[0]))
        up = np.minimum(us + h, self.grid[-1])
        um = np.maximum(us - h, self.grid[0])
        return (self._spline(up, nu=2) - self._spline(um, nu=2)) / (up - um)[:, None, None]

    def _check(self, us, order):
        # closed interval: the spline is defined at its endpoints
        if not 0 <= order <= self.max_order:
            raise DomainError(f"derivative order {order} not in 0..{self.max_order}")
        if us.size and (us.min() < self.grid[0] - 1e-12 or us.max() > self.grid[-1] + 1e-12):
            raise DomainError("evaluation point outside the sampled grid")

    def knots(self):
        return self.grid

    def window(self):
        return float(self.grid[0]), float(self.grid[-1])

    def to_json(self):
        return {"type": "sampled", "grid": self.grid.tolist(),
                "values": self.values.tolist(), "symmetry": self.symmetry}


class SumProfile(MatrixProfile):
    def __init__(self, terms):
        terms = list(terms)
        if not terms:
            raise DomainError("sum of zero profiles")
        n = terms[0].n
        symmetry = terms[0].symmetry
        if any(t.n != n or t.symmetry != symmetry for t in terms):
            raise DomainError("summands must share dimension and symmetry type")
        self.terms = terms
        self.n = n
        self.symmetry = symmetry
        iv = terms[0].interval
        for t in terms[1:]:
            iv = iv.intersect(t.interval)
        self.interval = iv

    def _eval_array(self, us, order):
        return sum(t._eval_array(us, order) for t in self.terms)

    def knots(self):
        ks = [t.knots() for t in self.terms]
        return np.unique(np.concatenate(ks)) if ks else np.empty(0)

    def window(self):
        los, his = zip(*(t.window() for t in self.terms))
        lo, hi = max(los), min(his)
        return (lo, hi) if lo < hi else self.interval.bounded_window()

    def to_json(self):
        return {"type": "sum", "terms": [t.to_json() for t in self.terms]}


class CallableProfile(MatrixProfile):
    """Profile backed by a vectorized function fn(us, order) -> (len(us), n, n).

    Orders above max_analytic_order fall back to nested central differences.
    Serialization goes through sampling.
    """

    def __init__(self, fn, n, interval, symmetry=SYMMETRIC, max_analytic_order=3,
                 knots=(), window=None, name="derived"):
        self.fn = fn
        self.n = n
        self.interval = interval
        self.symmetry = symmetry
        self.max_analytic = max_analytic_order
        self._knots = np.asarray(knots, dtype=float)
        self._window = window
        self.name = name

    def _eval_array(self, us, order):
        if order <= self.max_analytic:
            return np.asarray(self.fn(us, order), dtype=float).reshape(us.size, self.n, self.n)
        return self._fd(us, order, self.max_analytic)

    def knots(self):
        return self._knots

    def window(self):
        return self._window if self._window is not None else self.interval.bounded_window()

    def to_json(self):
        return sampled_from(self).to_json()


def sampled_from(profile: MatrixProfile, num=801) -> SampledProfile:
    """Resample any profile to a SampledProfile on its window (lossy for sharp profiles)."""
    us = profile.sample_grid(num)
    return SampledProfile(us, profile.eval_array(us, 0), symmetry=profile.symmetry)


def scalar_constant(c, interval=REAL_LINE):
    return ConstantProfile(np.array([[float(c)]]), interval)


def scalar_callable(fn, interval, **kw):
    """1x1 CallableProfile from a scalar fn(us, order) -> array."""
    return CallableProfile(lambda us, k: np.asarray(fn(us, k)).reshape(-1, 1, 1),
                           1, interval, **kw)


# -- trace decomposition -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TraceDecomposition:
    """M = tilde + scalar * I with tr(tilde) = 0."""

    tilde: np.ndarray
    scalar: float

    def reconstruct(self):
        return self.tilde + self.scalar * np.eye(self.tilde.shape[0])


def trace_decompose(m, tol=1e-9) -> TraceDecomposition:
    m = check_symmetric(np.asarray(m, dtype=float), tol=tol, what="trace_decompose input")
    n = m.shape[0]
    scalar = float(np.trace(m)) / n
    return TraceDecomposition(m - scalar * np.eye(n), scalar)


def trace_free_part(profile: MatrixProfile) -> CallableProfile:
    """The trace-free part of a symmetric profile, preserving derivative access."""

    def fn(us, order):
        p = profile.eval_array(us, order)
        tr = np.trace(p, axis1=1, axis2=2) / profile.n
        return p - tr[:, None, None] * np.eye(profile.n)

    return CallableProfile(fn, profile.n, profile.interval, SYMMETRIC,
                           knots=profile.knots(), window=profile.window(),
                           name="trace_free")


def trace_scalar(profile: MatrixProfile) -> CallableProfile:
    """The scalar trace part tr(p)/n as a 1x1 profile."""

    def fn(us, order):
        p = profile.eval_array(us, order)
        return (np.trace(p, axis1=1, axis2=2) / profile.n).reshape(-1, 1, 1)

    return CallableProfile(fn, 1, profile.interval, SYMMETRIC,
                           knots=profile.knots(), window=profile.window(),
                           name="trace_scalar")


# -- seminorms ------------------------------------------------------------------


def seminorm(profile: MatrixProfile, k: int, step: float = 1e-3) -> float:
    """sup over [-k, k] of |p| + |p'| + ... + |p^(k)| in the Frobenius norm.

    The sup is approximated on a uniform grid (plus knots); derivative orders
    above 3 use repeated finite differences, so high-k values are approximate.
    """
    if k < 1:
        raise DomainError("seminorm order k must be a positive integer")
    if not (profile.interval.lo <= -k and profile.interval.hi >= k):
        raise DomainError(f"profile interval does not contain [-{k}, {k}]")
    us = np.arange(-k, k + step / 2, step)
    ks = profile.knots()
    if ks.size:
        us = np.unique(np.concatenate([us, ks[(ks >= -k) & (ks <= k)]]))
    total = np.zeros(us.size)
    for order in range(k + 1):
        vals = profile.deriv_any(us, order)
        total += np.linalg.norm(vals, axis=(1, 2))
    return float(np.max(total))
