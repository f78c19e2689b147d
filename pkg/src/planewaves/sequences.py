"""Finite-window shift sequences and the bump-train scalar function built from them.

A sequence lives in the Hilbert cube [0, 1/2]^Z, represented by a finite window
of values with the zero-outside extension (index n outside the window reads 0,
which still contributes a nontrivial unit bump g_0 - 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

# exp(4 - f) underflows to an exact 0.0 well before this threshold; guarding here
# avoids inf*0 in derivative products for u astronomically close to an integer
_EXP_FLOOR = -700.0


@dataclass(frozen=True)
class ShiftSequence:
    """Values in [0, 1/2] on an integer window [lo, hi], zero outside."""

    lo: int
    hi: int
    values: tuple[float, ...]

    def __post_init__(self):
        if self.hi < self.lo:
            raise DomainError(f"empty window [{self.lo}, {self.hi}]")
        if len(self.values) != self.hi - self.lo + 1:
            raise DomainError("window length does not match number of values")
        vals = np.asarray(self.values, dtype=float)
        if vals.size and (vals.min() < 0.0 or vals.max() > 0.5):
            raise DomainError("sequence values must lie in [0, 1/2]")
        object.__setattr__(self, "values", tuple(float(v) for v in vals))

    @classmethod
    def from_values(cls, values, lo=None):
        values = list(values)
        if lo is None:
            lo = -(len(values) // 2)
        return cls(lo, lo + len(values) - 1, tuple(values))

    @property
    def half_width(self):
        return max(abs(self.lo), abs(self.hi), 1)

    def value(self, n: int) -> float:
        if self.lo <= n <= self.hi:
            return self.values[n - self.lo]
        return 0.0

    def values_at(self, ns: np.ndarray) -> np.ndarray:
        ns = np.asarray(ns, dtype=int)
        out = np.zeros(ns.shape, dtype=float)
        inside = (ns >= self.lo) & (ns <= self.hi)
        if np.any(inside):
            out[inside] = np.asarray(self.values)[ns[inside] - self.lo]
        return out

    def support_window(self):
        """(lo, hi) of the declared window; the profile itself is never compactly supported."""
        return self.lo, self.hi


def bernoulli_shift(seq: ShiftSequence, m: int) -> ShiftSequence:
    """Index translation: the new sequence reads old index n+m at index n."""
    if abs(m) > 2 * seq.half_width:
        raise DomainError(f"shift {m} exceeds the window policy |m| <= {2 * seq.half_width}")
    return ShiftSequence(seq.lo - m, seq.hi - m, seq.values)


def hilbert_distance(a: ShiftSequence, b: ShiftSequence, k_max: int = 30):
    """Truncated cube metric sum_k 2^{-k} d_k/(1+d_k), d_k = max_{|i|<=k}|a(i)-b(i)|.

    Returns (value, tail_bound) with tail_bound = 2^{-k_max}.
    """
    if k_max < 1:
        raise DomainError("k_max must be >= 1")
    total = 0.0
    for k in range(k_max + 1):
        idx = np.arange(-k, k + 1)
        dk = float(np.max(np.abs(a.values_at(idx) - b.values_at(idx))))
        total += 2.0 ** (-k) * dk / (1.0 + dk)
    return total, 2.0 ** (-k_max)


def shift_equivalent(a: ShiftSequence, b: ShiftSequence, tol: float = 1e-12):
    """Smallest |m| with b(n) = a(n+m) for all n (zero extension), or None."""
    bound = 2 * max(a.half_width, b.half_width)
    for m in sorted(range(-bound, bound + 1), key=lambda t: (abs(t), t < 0)):
        ns = np.arange(min(b.lo, a.lo - m) - 1, max(b.hi, a.hi - m) + 2)
        if np.max(np.abs(b.values_at(ns) - a.values_at(ns + m)), initial=0.0) <= tol:
            return m
    return None


# -- the scalar bump machinery ------------------------------------------------


def f_a(a: float, u):
    """a/(u(1-u)) + (1-a)/(u²(1-u)) on 0<u<1; positive, blows up at both ends."""
    if not 0.0 <= a < 1.0:
        raise DomainError("parameter a must lie in [0, 1)")
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
        raise DomainError("f_a is defined for 0 < u < 1 only")
    val = a / (u_arr * (1.0 - u_arr)) + (1.0 - a) / (u_arr**2 * (1.0 - u_arr))
    return float(val) if np.isscalar(u) else val


def _f_derivs(a, t):
    """f_a and derivatives 1..3 on arrays strictly inside (0,1)."""
    d1 = t - t * t
    d2 = t * t - t**3
    d1p, d1pp, d1ppp = 1.0 - 2.0 * t, -2.0, 0.0
    d2p, d2pp, d2ppp = 2.0 * t - 3.0 * t * t, 2.0 - 6.0 * t, -6.0

    def r(d, dp, dpp, dppp):
        r0 = 1.0 / d
        r1 = -dp / d**2
        r2 = -dpp / d**2 + 2.0 * dp**2 / d**3
        r3 = -dppp / d**2 + 6.0 * dp * dpp / d**3 - 6.0 * dp**3 / d**4
        return r0, r1, r2, r3

    ra = r(d1, d1p, d1pp, d1ppp)
    rb = r(d2, d2p, d2pp, d2ppp)
    return tuple(a * x + (1.0 - a) * y for x, y in zip(ra, rb))


def g_a(a: float, u, order: int = 0):
    """Unit bump: 1 outside (0,1); 1 + e^{4-f_a(u)} inside. Values in [1, 2].

    Derivatives (orders 1..3) vanish identically outside (0,1) and flatten to 0
    at both endpoints.
    """
    if not 0.0 <= a < 1.0:
        raise DomainError("parameter a must lie in [0, 1)")
    if not 0 <= order <= 3:
        raise DomainError("derivative order must be in 0..3")
    scalar = np.isscalar(u)
    t = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.ones_like(t) if order == 0 else np.zeros_like(t)
    inside = (t > 0.0) & (t < 1.0)
    if np.any(inside):
        ti = t[inside]
        f0, f1, f2, f3 = _f_derivs(a, ti)
        h = 4.0 - f0
        live = h > _EXP_FLOOR
        e = np.where(live, np.exp(np.maximum(h, _EXP_FLOOR)), 0.0)
        if order == 0:
            vals = 1.0 + e
        elif order == 1:
            vals = np.where(live, -f1 * e, 0.0)
        elif order == 2:
            vals = np.where(live, (-f2 + f1**2) * e, 0.0)
        else:
            vals = np.where(live, (-f3 + 3.0 * f1 * f2 - f1**3) * e, 0.0)
        out[inside] = vals
    return float(out[0]) if scalar else out


def _bump_array(avals, ts, order):
    """g_{a}(t) - 1 (order 0) or its t-derivatives, elementwise in (a, t)."""
    out = np.zeros_like(ts)
    inside = (ts > 0.0) & (ts < 1.0)
    if np.any(inside):
        ti = ts[inside]
        f0, f1, f2, f3 = _f_derivs(avals[inside], ti)
        h = 4.0 - f0
        live = h > _EXP_FLOOR
        e = np.where(live, np.exp(np.maximum(h, _EXP_FLOOR)), 0.0)
        if order == 0:
            vals = e
        elif order == 1:
            vals = np.where(live, -f1 * e, 0.0)
        elif order == 2:
            vals = np.where(live, (-f2 + f1**2) * e, 0.0)
        else:
            vals = np.where(live, (-f3 + 3.0 * f1 * f2 - f1**3) * e, 0.0)
        out[inside] = vals
    return out


def p_alpha(seq: ShiftSequence, u, order: int = 0):
    """Bump-train profile: for non-integer u exactly one factor is active, so
    p(u) = g_{seq(floor u)}(u - floor u) - 1; zero (with flat derivatives) at integers.
    Values lie in [0, 1].
    """
    scalar = np.isscalar(u)
    uu = np.atleast_1d(np.asarray(u, dtype=float))
    ks = np.floor(uu).astype(int)
    ts = uu - ks
    avals = seq.values_at(ks)
    out = _bump_array(avals, ts, order)
    if order == 0:
        # route through the same float ops as g_a so the single-factor
        # identity p_alpha(u) == g_a(u - floor u) - 1 holds bit-exactly
        out = (1.0 + out) - 1.0
    return float(out[0]) if scalar else out
