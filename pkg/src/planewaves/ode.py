"""Dense-output integration of the wave equations: Jacobi (vector and matrix),
the Sachs Riccati equation, the third-order conformal scalar equation, and
primitives of h^{-1}.

The integrator is scipy's adaptive explicit Runge-Kutta (RK45) with dense
output; verification residuals are computed on independent grids, never on the
solver's own steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ._linalg import maxabs, sym
from .errors import DomainError, IntegrationError, PairingError, SymmetryError
from .profiles import Interval, MatrixProfile

_DEFAULT_SPAN = 12.0


@dataclass(frozen=True)
class SolverConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    dense_grid_step: float = 1e-2
    blowup_ceiling: float = 1e8

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "dense_grid_step", "blowup_ceiling"):
            if getattr(self, name) <= 0:
                raise DomainError(f"SolverConfig.{name} must be positive")


DEFAULT_CONFIG = SolverConfig()


def _clip_range(interval: Interval, u0: float, u_range, span=_DEFAULT_SPAN):
    if u_range is not None:
        lo, hi = float(u_range[0]), float(u_range[1])
    else:
        lo = interval.lo if math.isfinite(interval.lo) else u0 - span
        hi = interval.hi if math.isfinite(interval.hi) else u0 + span
        lo, hi = max(lo, u0 - 4 * span), min(hi, u0 + 4 * span)
    if not (lo <= u0 <= hi):
        raise DomainError(f"base point {u0} outside integration range [{lo}, {hi}]")
    # keep strictly inside an open interval
    pad = 1e-12 * max(1.0, abs(lo), abs(hi))
    if lo <= interval.lo:
        lo = interval.lo + max(pad, 1e-9 * (hi - lo))
    if hi >= interval.hi:
        hi = interval.hi - max(pad, 1e-9 * (hi - lo))
    return lo, hi


class DenseSolution:
    """Two-sided dense ODE solution around a base point u0.

    eval_state(u) interpolates the state vector; the effective domain shrinks
    at detected blowups.
    """

    def __init__(self, u0, y0, rhs, lo, hi, config, events=None):
        self.u0 = float(u0)
        self.lo_req, self.hi_req = lo, hi
        self._fwd = self._bwd = None
        self.blowup_forward = self.blowup_backward = None
        kwargs = dict(method="RK45", dense_output=True, rtol=config.rel_tol,
                      atol=config.abs_tol, max_step=config.max_step, events=events)
        if hi > u0:
            res = solve_ivp(rhs, (u0, hi), y0, **kwargs)
            if not res.success and res.status != 1:
                raise IntegrationError(f"forward integration failed: {res.message}")
            self._fwd = res.sol
            if res.status == 1 and res.t_events and len(res.t_events[0]):
                self.blowup_forward = float(res.t_events[0][0])
        if lo < u0:
            res = solve_ivp(rhs, (u0, lo), y0, **kwargs)
            if not res.success and res.status != 1:
                raise IntegrationError(f"backward integration failed: {res.message}")
            self._bwd = res.sol
            if res.status == 1 and res.t_events and len(res.t_events[0]):
                self.blowup_backward = float(res.t_events[0][0])
        self._y0 = np.asarray(y0, dtype=float)

    @property
    def domain(self) -> Interval:
        lo = self.blowup_backward if self.blowup_backward is not None else self.lo_req
        hi = self.blowup_forward if self.blowup_forward is not None else self.hi_req
        return Interval(min(lo, self.u0 - 1e-15), max(hi, self.u0 + 1e-15))

    @property
    def blowup_point(self):
        if self.blowup_forward is not None:
            return self.blowup_forward
        return self.blowup_backward

    def eval_state(self, us):
        scalar = np.isscalar(us)
        us = np.atleast_1d(np.asarray(us, dtype=float))
        dom = self.domain
        eps = 1e-9 * max(1.0, abs(dom.lo), abs(dom.hi))
        if us.size and (us.min() < dom.lo - eps or us.max() > dom.hi + eps):
            raise DomainError("evaluation outside the solution's domain "
                              f"[{dom.lo}, {dom.hi}]")
        out = np.empty((us.size, self._y0.size))
        fwd = us >= self.u0
        if np.any(fwd):
            if self._fwd is None:
                out[fwd] = self._y0
            else:
                out[fwd] = self._fwd(np.clip(us[fwd], self.u0, self._fwd.t_max)).T
        if np.any(~fwd):
            if self._bwd is None:
                out[~fwd] = self._y0
            else:
                out[~fwd] = self._bwd(np.clip(us[~fwd], self._bwd.t_min, self.u0)).T
        return out[0] if scalar else out


class OdeSolution:
    """Component view of a dense solution: eval(u, order) per the wrapping solver."""

    max_order = 1

    def __init__(self, dense: DenseSolution):
        self.dense = dense

    @property
    def domain(self):
        return self.dense.domain

    @property
    def blowup_point(self):
        return self.dense.blowup_point

    def eval(self, u, order=0):
        raise NotImplementedError

    __call__ = eval

    def _fd_of(self, u, order_below, h=1e-5):
        dom = self.dense.domain
        h = min(h, 0.25 * (dom.hi - dom.lo))
        up = np.minimum(u + h, dom.hi - 1e-12 * max(1.0, abs(dom.hi)))
        um = np.maximum(u - h, dom.lo + 1e-12 * max(1.0, abs(dom.lo)))
        num = self.eval(up, order_below) - self.eval(um, order_below)
        den = up - um
        if np.ndim(num) > np.ndim(den):
            den = np.expand_dims(den, tuple(range(np.ndim(den), np.ndim(num))))
        return num / den


class JacobiVectorSolution(OdeSolution):
    """q with q'' + p q = 0; state (q, q'). Orders: 0, 1 from the state, 2 by
    differencing the dense derivative (keeps integration error visible)."""

    max_order = 2

    def __init__(self, dense, n, profile):
        super().__init__(dense)
        self.n = n
        self.profile = profile

    def eval(self, u, order=0):
        if order <= 1:
            s = self.dense.eval_state(u)
            if s.ndim == 1:
                return s[: self.n] if order == 0 else s[self.n:]
            return s[:, : self.n] if order == 0 else s[:, self.n:]
        if order == 2:
            return self._fd_of(u, 1)
        raise DomainError("Jacobi vector solutions expose orders 0..2")

    __call__ = eval


class JacobiMatrixSolution(OdeSolution):
    """Matrix solution L of L'' + p L = 0; state (L, L') flattened."""

    max_order = 2

    def __init__(self, dense, n, profile):
        super().__init__(dense)
        self.n = n
        self.profile = profile

    def eval(self, u, order=0):
        n = self.n
        if order <= 1:
            s = self.dense.eval_state(u)
            block = s[..., : n * n] if order == 0 else s[..., n * n:]
            return block.reshape(s.shape[:-1] + (n, n))
        if order == 2:
            return -self.profile.eval(u) @ self.eval(u, 0)
        raise DomainError("Jacobi matrix solutions expose orders 0..2")

    __call__ = eval


@dataclass(frozen=True, eq=False)
class LagrangianMatrix:
    """Jacobi matrix solution whose columns form a Lagrangian family:
    LT L' - L'T L = 0 wherever defined (equivalently S = L' L^{-1} symmetric)."""

    L: JacobiMatrixSolution
    base_point: float

    def shear(self, u):
        """S(u) = L'(u) L(u)^{-1} (symmetric where L is invertible)."""
        return self.L.eval(u, 1) @ np.linalg.inv(self.L.eval(u, 0))

    def lagrangian_defect(self, us=None):
        if us is None:
            dom = self.L.domain
            us = np.linspace(dom.lo + 1e-9, dom.hi - 1e-9, 101)
        l0 = self.L.eval(np.asarray(us), 0)
        l1 = self.L.eval(np.asarray(us), 1)
        pair = np.einsum("tji,tjk->tik", l0, l1)
        return float(np.max(np.abs(pair - pair.swapaxes(1, 2))))


class SachsSolution(OdeSolution):
    """Symmetric S with S' + S^2 + p = 0; integrated until the norm ceiling."""

    max_order = 1

    def __init__(self, dense, n, profile):
        super().__init__(dense)
        self.n = n
        self.profile = profile

    def eval(self, u, order=0):
        n = self.n
        s = self.dense.eval_state(u)
        mat = s.reshape(s.shape[:-1] + (n, n))
        mat = sym(mat)
        if order == 0:
            return mat
        if order == 1:
            p = self.profile.eval(u) if np.isscalar(u) else self.profile.eval_array(u)
            return -(mat @ mat) - p
        raise DomainError("Sachs solutions expose orders 0..1")

    __call__ = eval


class CubicScalarSolution(OdeSolution):
    """w with w''' + 4 P w' + 2 P' w = 0; state (w, w', w''). Order 3 by
    differencing w'' so solver error stays visible."""

    max_order = 3

    def __init__(self, dense, scalar_profile):
        super().__init__(dense)
        self.scalar = scalar_profile

    def eval(self, u, order=0):
        if order <= 2:
            s = self.dense.eval_state(u)
            return s[..., order]
        if order == 3:
            return self._fd_of(u, 2)
        raise DomainError("scalar solutions expose orders 0..3")

    __call__ = eval


class PrimitiveSolution(OdeSolution):
    """H with h H' = I and H(u0) = 0; derivative orders 1..3 are analytic in h."""

    max_order = 3

    def __init__(self, dense, n, h_profile):
        super().__init__(dense)
        self.n = n
        self.h = h_profile

    def eval(self, u, order=0):
        n = self.n
        if order == 0:
            s = self.dense.eval_state(u)
            return s.reshape(s.shape[:-1] + (n, n))
        if np.isscalar(u):
            h0 = self.h.eval(u, 0)
            hinv = np.linalg.inv(h0)
            if order == 1:
                return hinv
            h1 = self.h.eval(u, 1)
            if order == 2:
                return -hinv @ h1 @ hinv
            h2 = self.h.eval(u, 2)
            return (2.0 * hinv @ h1 @ hinv @ h1 @ hinv - hinv @ h2 @ hinv)
        return np.stack([self.eval(float(x), order) for x in np.asarray(u)])

    __call__ = eval


# -- solvers ---------------------------------------------------------------------


def _residual_grid(domain: Interval, num=41):
    pad = (domain.hi - domain.lo) * 1e-6
    return np.linspace(domain.lo + pad, domain.hi - pad, num)


_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(7)


def _integral_residual(us, top_state, integrand):
    """Residual of d(top)/du = integrand in integrated form on each cell,
    normalized by cell length: |top(b) - top(a) - int_a^b integrand| / (b - a).

    Quadrature is 7-point Gauss per cell, so no numerical differentiation
    enters and dense-output interpolation error is measured faithfully.
    """
    worst = 0.0
    for a, b in zip(us[:-1], us[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        nodes = mid + half * _GAUSS_X
        integral = half * np.einsum("g,g...->...", _GAUSS_W,
                                    np.stack([integrand(float(x)) for x in nodes]))
        res = top_state(float(b)) - top_state(float(a)) - integral
        worst = max(worst, float(np.max(np.abs(res))) / (b - a))
    return worst


def solve_jacobi_vector(p: MatrixProfile, u0, q0, qdot0, config=DEFAULT_CONFIG,
                        u_range=None) -> JacobiVectorSolution:
    """Integrate q'' + p(u) q = 0 with q(u0) = q0, q'(u0) = qdot0."""
    n = p.n
    q0 = np.asarray(q0, dtype=float).ravel()
    qdot0 = np.asarray(qdot0, dtype=float).ravel()
    if q0.size != n or qdot0.size != n:
        raise DomainError("initial data dimension mismatch")
    lo, hi = _clip_range(p.interval, u0, u_range)

    def rhs(u, y):
        return np.concatenate([y[n:], -p.eval(u) @ y[:n]])

    dense = DenseSolution(u0, np.concatenate([q0, qdot0]), rhs, lo, hi, config)
    sol = JacobiVectorSolution(dense, n, p)
    sol.verification_residual = _jacobi_vector_residual(sol, p)
    return sol


def _jacobi_vector_residual(sol, p):
    us = _residual_grid(sol.domain, 33)
    return _integral_residual(us, lambda u: sol.eval(u, 1),
                              lambda u: -(p.eval(u) @ sol.eval(u, 0)))


def solve_jacobi_matrix(p: MatrixProfile, u0, L0, Ldot0, config=DEFAULT_CONFIG,
                        u_range=None) -> LagrangianMatrix:
    """Integrate L'' + p L = 0 from Lagrangian initial data (L0T Ldot0 symmetric)."""
    n = p.n
    L0 = np.atleast_2d(np.asarray(L0, dtype=float))
    Ldot0 = np.atleast_2d(np.asarray(Ldot0, dtype=float))
    pair = L0.T @ Ldot0
    if maxabs(pair - pair.T) > 1e-9 * (1.0 + maxabs(pair)):
        raise SymmetryError("initial data violates the Lagrangian condition")
    lo, hi = _clip_range(p.interval, u0, u_range)

    def rhs(u, y):
        l = y[: n * n].reshape(n, n)
        ld = y[n * n:].reshape(n, n)
        return np.concatenate([ld.ravel(), (-p.eval(u) @ l).ravel()])

    dense = DenseSolution(u0, np.concatenate([L0.ravel(), Ldot0.ravel()]),
                          rhs, lo, hi, config)
    return LagrangianMatrix(JacobiMatrixSolution(dense, n, p), float(u0))


def solve_sachs(p: MatrixProfile, u0, S0, config=DEFAULT_CONFIG,
                u_range=None) -> SachsSolution:
    """Integrate the Riccati equation S' + S^2 + p = 0 until blowup (norm ceiling)."""
    n = p.n
    S0 = np.atleast_2d(np.asarray(S0, dtype=float))
    if maxabs(S0 - S0.T) > 1e-9 * (1.0 + maxabs(S0)):
        raise SymmetryError("Sachs initial data must be symmetric")
    lo, hi = _clip_range(p.interval, u0, u_range)
    ceiling = config.blowup_ceiling

    def rhs(u, y):
        s = y.reshape(n, n)
        return (-(s @ s) - p.eval(u)).ravel()

    def hit_ceiling(u, y):
        return ceiling - float(np.linalg.norm(y))

    hit_ceiling.terminal = True
    hit_ceiling.direction = -1.0

    dense = DenseSolution(u0, S0.ravel(), rhs, lo, hi, config, events=[hit_ceiling])
    return SachsSolution(dense, n, p)


def solve_w_equation(P: MatrixProfile, u0, w0, wdot0, wddot0, config=DEFAULT_CONFIG,
                     u_range=None) -> CubicScalarSolution:
    """Integrate w''' + 4 P w' + 2 P' w = 0 for a scalar profile P."""
    if P.n != 1:
        raise DomainError("P must be a scalar (1x1) profile")
    lo, hi = _clip_range(P.interval, u0, u_range)

    def rhs(u, y):
        p0 = P.eval(u)[0, 0]
        p1 = P.eval(u, 1)[0, 0]
        return np.array([y[1], y[2], -4.0 * p0 * y[1] - 2.0 * p1 * y[0]])

    dense = DenseSolution(u0, np.array([w0, wdot0, wddot0], dtype=float),
                          rhs, lo, hi, config)
    sol = CubicScalarSolution(dense, P)
    us = _residual_grid(sol.domain, 33)
    sol.verification_residual = _integral_residual(
        us, lambda u: np.asarray(sol.eval(u, 2)),
        lambda u: np.asarray(-4 * P.eval(u)[0, 0] * sol.eval(u, 1)
                             - 2 * P.eval(u, 1)[0, 0] * sol.eval(u, 0)))
    return sol


def integrate_h_inverse(h: MatrixProfile, u0, config=DEFAULT_CONFIG,
                        u_range=None) -> PrimitiveSolution:
    """Integrate h(u) H'(u) = I with H(u0) = 0; H is symmetric."""
    n = h.n
    lo, hi = _clip_range(h.interval, u0, u_range)
    us_check = np.linspace(lo, hi, 65)
    eigs = np.linalg.eigvalsh(h.eval_array(us_check, 0))
    if float(eigs.min()) <= 1e-12:
        from .errors import SingularityError

        raise SingularityError("h must be positive definite on the integration range")

    def rhs(u, y):
        return np.linalg.inv(h.eval(u)).ravel()

    dense = DenseSolution(u0, np.zeros(n * n), rhs, lo, hi, config)
    return PrimitiveSolution(dense, n, h)


def symplectic_pairing(q1: JacobiVectorSolution, q2: JacobiVectorSolution,
                       tol=1e-6, num=64) -> float:
    """The conserved pairing q1T q2' - q2T q1', evaluated at the base point.

    Raises PairingError if the pairing drifts beyond tol across the common
    domain (the two inputs then do not solve the same Jacobi equation).
    """
    dom = q1.domain.intersect(q2.domain)
    us = np.linspace(dom.lo + 1e-9, dom.hi - 1e-9, num)
    vals = (np.einsum("ti,ti->t", q1.eval(us, 0), q2.eval(us, 1))
            - np.einsum("ti,ti->t", q2.eval(us, 0), q1.eval(us, 1)))
    if float(vals.max() - vals.min()) > tol:
        raise PairingError("symplectic pairing is not constant; "
                           "inputs do not share a Jacobi equation")
    u0 = q1.dense.u0 if dom.contains(q1.dense.u0) else 0.5 * (dom.lo + dom.hi)
    base = (q1.eval(u0, 0) @ q2.eval(u0, 1)) - (q2.eval(u0, 0) @ q1.eval(u0, 1))
    return float(base)
