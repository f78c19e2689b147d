"""Conversions between the three plane-wave forms and the point maps that
realize them.

Conventions. A PointMap phi always carries source coordinates to target
coordinates, and a successful conversion satisfies phi^* (target metric) =
source metric, which pullback_residual measures as
max || J^T Gbar(phi(x)) J - G(x) ||.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from ._linalg import maxabs, sym, sym_sqrt
from .errors import ConversionError, DomainError, SingularityError
from .metrics import (AlekseevskyMetric, BrinkmannMetric, RosenMetric,
                      SpacetimePoint, metric_components, _as_point)
from .ode import DEFAULT_CONFIG, DenseSolution, solve_sachs
from .profiles import (CallableProfile, ConstantProfile, Interval, MatrixProfile,
                       RotatingConstantProfile)

_FD_STEP = 1e-6


def _pad_range(interval, lo, hi):
    """Shrink a working range strictly inside an open interval."""
    pad = max(1e-12, 1e-9 * (hi - lo))
    if lo <= interval.lo:
        lo = interval.lo + pad
    if hi >= interval.hi:
        hi = interval.hi - pad
    return lo, hi


@dataclass(eq=False)
class PointMap:
    """Differentiable coordinate map with an analytic Jacobian where available.

    forward acts on arrays (u, v, x1..xn). jacobian returns the (n+2)x(n+2)
    matrix of partials; when absent, a central finite difference (step 1e-6)
    is used.
    """

    kind: str
    forward: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    inverse: "PointMap | None" = None
    params: dict = field(default_factory=dict)

    def apply(self, point):
        pt = point.as_array() if isinstance(point, SpacetimePoint) else np.asarray(point, float)
        return self.forward(pt)

    def jac(self, point):
        pt = point.as_array() if isinstance(point, SpacetimePoint) else np.asarray(point, float)
        if self.jacobian is not None:
            return self.jacobian(pt)
        m = pt.size
        out = np.empty((m, m))
        for j in range(m):
            dp = np.zeros(m)
            dp[j] = _FD_STEP
            out[:, j] = (self.forward(pt + dp) - self.forward(pt - dp)) / (2 * _FD_STEP)
        return out

    def then(self, outer: "PointMap") -> "PointMap":
        """outer composed after self (self first)."""
        return compose(outer, self)

    def to_json(self):
        return {"kind": self.kind, "params": _jsonable(self.params)}


def _jsonable(params):
    out = {}
    for k, v in params.items():
        if isinstance(v, np.ndarray):
            out[k] = v.tolist()
        elif isinstance(v, (int, float, str, bool)) or v is None:
            out[k] = v
        elif isinstance(v, (list, tuple)):
            out[k] = list(v)
    return out


def identity_map(n):
    return PointMap("identity", lambda pt: pt.copy(),
                    jacobian=lambda pt: np.eye(n + 2), params={"n": n})


def compose(outer: PointMap, inner: PointMap) -> PointMap:
    def forward(pt):
        return outer.forward(inner.forward(pt))

    def jacobian(pt):
        mid = inner.forward(pt)
        return outer.jac(mid) @ inner.jac(pt)

    inv = None
    if outer.inverse is not None and inner.inverse is not None:
        inv = PointMap(f"({inner.inverse.kind});({outer.inverse.kind})",
                       lambda pt: inner.inverse.forward(outer.inverse.forward(pt)),
                       jacobian=lambda pt: inner.inverse.jac(outer.inverse.forward(pt))
                       @ outer.inverse.jac(pt))
    composed = PointMap(f"({inner.kind});({outer.kind})", forward, jacobian, inv,
                        params={"stages": [inner.kind, outer.kind]})
    if inv is not None:
        inv.inverse = composed
    return composed


def affine_rotation_map(a, u0, gamma) -> PointMap:
    """(u, v, x) -> (a (u - u0), v / a, gamma x); isometry between Brinkmann forms."""
    gamma = np.atleast_2d(np.asarray(gamma, dtype=float))
    n = gamma.shape[0]

    def forward(pt):
        return np.concatenate([[a * (pt[0] - u0), pt[1] / a], gamma @ pt[2:]])

    jac = np.zeros((n + 2, n + 2))
    jac[0, 0] = a
    jac[1, 1] = 1.0 / a
    jac[2:, 2:] = gamma
    inv = PointMap("affine_u", lambda pt: np.concatenate(
        [[pt[0] / a + u0, pt[1] * a], gamma.T @ pt[2:]]),
        jacobian=lambda pt: np.linalg.inv(jac), params={"a": 1 / a, "u0": -a * u0})
    pm = PointMap("affine_u", forward, jacobian=lambda pt: jac, inverse=inv,
                  params={"a": a, "u0": u0, "gamma": gamma})
    inv.inverse = pm
    return pm


def rotation_gauge_map(omega, sign=1.0) -> PointMap:
    """(u, v, x) -> (u, v, e^{sign u w} x) for a constant skew generator w."""
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    n = omega.shape[0]
    pm = rotation_gauge_map_raw(omega, sign, n)
    inv = rotation_gauge_map_raw(omega, -sign, n)
    pm.inverse = inv
    inv.inverse = pm
    return pm


def rotation_gauge_map_raw(omega, sign, n):
    w, vv = np.linalg.eig(omega)
    vinv = np.linalg.inv(vv)

    def rot(u):
        return (vv @ np.diag(np.exp(sign * u * w)) @ vinv).real

    def forward(pt):
        return np.concatenate([pt[:2], rot(pt[0]) @ pt[2:]])

    def jacobian(pt):
        r = rot(pt[0])
        out = np.eye(n + 2)
        out[2:, 2:] = r
        out[2:, 0] = sign * omega @ r @ pt[2:]
        return out

    return PointMap("rotation_gauge", forward, jacobian,
                    params={"omega": omega, "sign": sign})


def dilation_map(t, n) -> PointMap:
    """(u, v, x) -> (u, e^{2t} v, e^t x); scales any plane-wave metric by e^{2t}."""
    def forward(pt):
        return np.concatenate([[pt[0], math.exp(2 * t) * pt[1]], math.exp(t) * pt[2:]])

    jac = np.diag(np.concatenate([[1.0, math.exp(2 * t)], np.full(n, math.exp(t))]))
    return PointMap("dilation_scale", forward, jacobian=lambda pt: jac, params={"t": t})


def heisenberg_map(qsol, scale=1.0, v_shift=0.0) -> PointMap:
    """Flow of the Killing field built from a Jacobi solution q:
    (u, v, x) -> (u, v + s xT q'(u) + s^2 qT q'/2 + c, x + s q(u))."""

    def forward(pt):
        u = pt[0]
        q, qd = qsol.eval(u, 0), qsol.eval(u, 1)
        v = pt[1] + scale * float(pt[2:] @ qd) + 0.5 * scale**2 * float(q @ qd) + v_shift
        return np.concatenate([[u, v], pt[2:] + scale * q])

    def jacobian(pt):
        u = pt[0]
        n = pt.size - 2
        q, qd = qsol.eval(u, 0), qsol.eval(u, 1)
        profile = getattr(qsol, "profile", None)
        qdd = -(profile.eval(u) @ q) if profile is not None else qsol.eval(u, 2)
        out = np.eye(n + 2)
        out[1, 0] = scale * float(pt[2:] @ qdd) + 0.5 * scale**2 * (qd @ qd + q @ qdd)
        out[1, 2:] = scale * qd
        out[2:, 0] = scale * qd
        return out

    return PointMap("heisenberg", forward, jacobian, params={"scale": scale, "v_shift": v_shift})


# -- pullback check ---------------------------------------------------------------


def pullback_residual(point_map: PointMap, source_metric, target_metric, points) -> float:
    """max over points of || J^T Gbar(phi(pt)) J - G(pt) || (max-abs entries)."""
    worst = 0.0
    for point in points:
        pt = _as_point(point, source_metric.n)
        image = point_map.apply(pt)
        j = point_map.jac(pt)
        gt = metric_components(target_metric, image)
        gs = metric_components(source_metric, pt)
        worst = max(worst, maxabs(j.T @ gt @ j - gs))
    return worst


def conformal_pullback_residual(point_map, source_metric, target_metric, points,
                                factor=None):
    """Like pullback_residual but allows a conformal factor: the factor is the
    supplied callable factor(pt), or else is inferred from the (u,v) component."""
    worst = 0.0
    for point in points:
        pt = _as_point(point, source_metric.n)
        image = point_map.apply(pt)
        j = point_map.jac(pt)
        gt = metric_components(target_metric, image)
        gs = metric_components(source_metric, pt)
        t = j.T @ gt @ j
        om2 = factor(pt.as_array()) if factor is not None else t[0, 1] / gs[0, 1]
        worst = max(worst, maxabs(t - om2 * gs))
    return worst


def _sample_points(metric, num=50, seed=0, u_window=None, box=2.0):
    rng = np.random.default_rng(seed)
    if u_window is None:
        profile = metric.p if hasattr(metric, "p") else metric.h
        lo, hi = profile.window()
        lo, hi = max(lo, metric.domain.lo), min(hi, metric.domain.hi)
    else:
        lo, hi = u_window
    pad = (hi - lo) * 1e-3
    us = rng.uniform(lo + pad, hi - pad, num)
    vs = rng.uniform(-box, box, num)
    xs = rng.uniform(-box, box, (num, metric.n))
    return [SpacetimePoint(u, v, x) for u, v, x in zip(us, vs, xs)]


# -- Rosen -> Brinkmann -----------------------------------------------------------


class BrinkmannizationResult(NamedTuple):
    metric: BrinkmannMetric
    point_map: PointMap
    residual: float


def brinkmannize(rosen: RosenMetric, u0=None, config=DEFAULT_CONFIG,
                 u_range=None, check=True) -> BrinkmannizationResult:
    """Convert a Rosen metric to Brinkmann form on the regular component of u0.

    Integrates L' = (1/2) L^{-T} h' from L(u0) = sqrt(h(u0)) (principal root,
    the canonical Lagrangian gauge; any other choice differs by a constant
    rotation). The tidal profile is p = -L'' L^{-1}, with derivatives taken
    analytically from h and the dense output.
    """
    h = rosen.h
    n = rosen.n
    if u_range is None:
        lo_w, hi_w = h.window()
        lo_w, hi_w = max(lo_w, rosen.domain.lo), min(hi_w, rosen.domain.hi)
    else:
        lo_w, hi_w = u_range
    if u0 is None:
        u0 = 0.5 * (lo_w + hi_w)
    # restrict to the regular component containing u0
    for s in rosen.singular_set:
        if s <= u0:
            lo_w = max(lo_w, s + 1e-6)
        if s >= u0:
            hi_w = min(hi_w, s - 1e-6)
    lo_w, hi_w = _pad_range(h.interval, lo_w, hi_w)
    if not lo_w < u0 < hi_w:
        raise DomainError("base point is not interior to a regular component")
    l0 = sym_sqrt(h.eval(u0))

    def rhs(u, y):
        l = y.reshape(n, n)
        return (0.5 * np.linalg.solve(l.T, h.eval(u, 1))).ravel()

    dense = DenseSolution(u0, l0.ravel(), rhs, lo_w, hi_w, config)

    def lmat(u, order=0):
        if order == 0:
            return dense.eval_state(u).reshape(n, n)
        if order == 1:
            l = dense.eval_state(u).reshape(n, n)
            return 0.5 * np.linalg.solve(l.T, h.eval(u, 1))
        raise DomainError("L exposes orders 0..1")

    def p_fn(us, order):
        us = np.asarray(us, dtype=float)
        l = dense.eval_state(us).reshape(-1, n, n)
        linv = np.linalg.inv(l)
        linv_t = linv.transpose(0, 2, 1)
        h1 = h.eval_array(us, 1)
        h2 = h.eval_array(us, 2)
        hinv = np.linalg.inv(h.eval_array(us, 0))
        a = h2 - 0.5 * h1 @ hinv @ h1
        if order == 0:
            return sym(-0.5 * linv_t @ a @ linv)
        h3 = h.eval_array(us, 3)
        adot = h3 - 0.5 * (h2 @ hinv @ h1 - h1 @ hinv @ h1 @ hinv @ h1
                           + h1 @ hinv @ h2)
        return sym(-0.5 * linv_t @ (adot - 0.5 * (h1 @ hinv @ a + a @ hinv @ h1))
                   @ linv)

    validity = dense.domain
    p_profile = CallableProfile(p_fn, n, validity, "symmetric", max_analytic_order=1,
                                knots=h.knots(), window=(validity.lo, validity.hi),
                                name="brinkmannized")
    metric = BrinkmannMetric(n, validity, p_profile)

    def forward(pt):
        u = pt[0]
        l, ld = lmat(u), lmat(u, 1)
        return np.concatenate([[u, pt[1] + 0.5 * pt[2:] @ (l.T @ ld) @ pt[2:]],
                               l @ pt[2:]])

    def jacobian(pt):
        u = pt[0]
        l, ld = lmat(u), lmat(u, 1)
        ldd = -p_fn(np.array([u]), 0)[0] @ l
        out = np.zeros((n + 2, n + 2))
        out[0, 0] = 1.0
        out[1, 0] = 0.5 * pt[2:] @ (ld.T @ ld + l.T @ ldd) @ pt[2:]
        out[1, 1] = 1.0
        out[1, 2:] = pt[2:] @ (l.T @ ld)
        out[2:, 0] = ld @ pt[2:]
        out[2:, 2:] = l
        return out

    def inv_forward(pt):
        u = pt[0]
        l, ld = lmat(u), lmat(u, 1)
        s = ld @ np.linalg.inv(l)
        return np.concatenate([[u, pt[1] - 0.5 * pt[2:] @ s @ pt[2:]],
                               np.linalg.solve(l, pt[2:])])

    def inv_jacobian(pt):
        u = pt[0]
        l, ld = lmat(u), lmat(u, 1)
        linv = np.linalg.inv(l)
        s = ld @ linv
        sd = -(s @ s) - p_fn(np.array([u]), 0)[0]
        out = np.zeros((n + 2, n + 2))
        out[0, 0] = 1.0
        out[1, 0] = -0.5 * pt[2:] @ sd @ pt[2:]
        out[1, 1] = 1.0
        out[1, 2:] = -pt[2:] @ s
        out[2:, 0] = -linv @ s @ pt[2:]
        out[2:, 2:] = linv
        return out

    inverse = PointMap("rosenization", inv_forward, inv_jacobian, params={"u0": u0})
    pmap = PointMap("brinkmannization", forward, jacobian, inverse, params={"u0": u0})
    inverse.inverse = pmap
    residual = math.nan
    if check:
        pts = _sample_points(rosen, 25, seed=7, u_window=(validity.lo, validity.hi))
        residual = pullback_residual(pmap, rosen, metric, pts)
        if residual > 1e-7:
            raise ConversionError(f"brinkmannization pullback residual {residual:.3e}")
    return BrinkmannizationResult(metric, pmap, residual)


# -- Brinkmann -> Rosen ------------------------------------------------------------


class RosenizationResult(NamedTuple):
    metric: RosenMetric
    point_map: PointMap
    validity: Interval


def rosenize(brinkmann: BrinkmannMetric, u0, S0=None, config=DEFAULT_CONFIG,
             u_range=None) -> RosenizationResult:
    """Convert to Rosen form locally: S solves the Riccati wave-front equation
    from S(u0) = S0 (default 0), L' = S L from L(u0) = I, h = L^T L on the
    maximal subinterval before blowup. The returned map sends Brinkmann to
    Rosen coordinates; its inverse is the change of variables x = L X."""
    n = brinkmann.n
    p = brinkmann.p
    S0 = np.zeros((n, n)) if S0 is None else np.atleast_2d(np.asarray(S0, float))
    if maxabs(S0 - S0.T) > 1e-9 * (1 + maxabs(S0)):
        raise DomainError("S0 must be symmetric")
    if u_range is None:
        lo_w, hi_w = p.window()
        lo_w, hi_w = max(lo_w, brinkmann.domain.lo), min(hi_w, brinkmann.domain.hi)
    else:
        lo_w, hi_w = u_range
    lo_w, hi_w = _pad_range(p.interval, lo_w, hi_w)
    if not lo_w <= u0 <= hi_w:
        raise DomainError("u0 outside the working range")
    ceiling = config.blowup_ceiling

    def rhs(u, y):
        s = y[: n * n].reshape(n, n)
        l = y[n * n:].reshape(n, n)
        return np.concatenate([(-(s @ s) - p.eval(u)).ravel(), (s @ l).ravel()])

    def hit_ceiling(u, y):
        return ceiling - float(np.linalg.norm(y[: n * n]))

    hit_ceiling.terminal = True
    hit_ceiling.direction = -1.0

    dense = DenseSolution(u0, np.concatenate([S0.ravel(), np.eye(n).ravel()]),
                          rhs, lo_w, hi_w, config, events=[hit_ceiling])
    validity = dense.domain

    def parts(u):
        y = dense.eval_state(u)
        return sym(y[: n * n].reshape(n, n)), y[n * n:].reshape(n, n)

    def h_fn(us, order):
        us = np.asarray(us, dtype=float)
        y = dense.eval_state(us)
        s = sym(y[:, : n * n].reshape(-1, n, n))
        l = y[:, n * n:].reshape(-1, n, n)
        lt = l.transpose(0, 2, 1)
        if order == 0:
            return sym(lt @ l)
        if order == 1:
            return sym(2.0 * lt @ s @ l)
        pv = p.eval_array(us, 0)
        if order == 2:
            return sym(2.0 * lt @ (s @ s - pv) @ l)
        pd = p.eval_array(us, 1)
        sd = -(s @ s) - pv
        core = s @ (s @ s - pv) + (sd @ s + s @ sd - pd) + (s @ s - pv) @ s
        return sym(2.0 * lt @ core @ l)

    h_profile = CallableProfile(h_fn, n, validity, "symmetric", max_analytic_order=3,
                                knots=p.knots(), window=(validity.lo, validity.hi),
                                name="rosenized")
    rosen = RosenMetric(n, validity, h_profile)

    def forward(pt):
        s, l = parts(pt[0])
        return np.concatenate([[pt[0], pt[1] - 0.5 * pt[2:] @ s @ pt[2:]],
                               np.linalg.solve(l, pt[2:])])

    def jacobian(pt):
        u = pt[0]
        s, l = parts(u)
        linv = np.linalg.inv(l)
        sd = -(s @ s) - p.eval(u)
        out = np.zeros((n + 2, n + 2))
        out[0, 0] = 1.0
        out[1, 0] = -0.5 * pt[2:] @ sd @ pt[2:]
        out[1, 1] = 1.0
        out[1, 2:] = -pt[2:] @ s
        out[2:, 0] = -linv @ s @ pt[2:]
        out[2:, 2:] = linv
        return out

    def inv_forward(pt):
        s, l = parts(pt[0])
        x = l @ pt[2:]
        return np.concatenate([[pt[0], pt[1] + 0.5 * x @ s @ x], x])

    def inv_jacobian(pt):
        u = pt[0]
        s, l = parts(u)
        ld = s @ l
        ldd = -p.eval(u) @ l
        out = np.zeros((n + 2, n + 2))
        out[0, 0] = 1.0
        out[1, 0] = 0.5 * pt[2:] @ (ld.T @ ld + l.T @ ldd) @ pt[2:]
        out[1, 1] = 1.0
        out[1, 2:] = pt[2:] @ (l.T @ ld)
        out[2:, 0] = ld @ pt[2:]
        out[2:, 2:] = l
        return out

    inverse = PointMap("brinkmannization", inv_forward, inv_jacobian, params={"u0": u0})
    pmap = PointMap("rosenization", forward, jacobian, inverse, params={"u0": u0})
    inverse.inverse = pmap
    return RosenizationResult(rosen, pmap, validity)


# -- Alekseevsky <-> Brinkmann (constant coefficients) ------------------------------


class ConversionResult(NamedTuple):
    metric: object
    point_map: PointMap
    residual: float


def _require_constant(profile, what):
    if not isinstance(profile, ConstantProfile):
        raise ConversionError(f"{what} must be a Constant profile for this conversion")
    return profile.matrix


def alekseevsky_to_brinkmann(alek: AlekseevskyMetric, check=True) -> ConversionResult:
    """G_A(w, p) with constant coefficients is isometric to the Brinkmann metric
    with rotating profile e^{u w} (p - w^2) e^{-u w}, via X = e^{u w} x."""
    p = _require_constant(alek.p, "p")
    w = _require_constant(alek.omega, "omega")
    base = p - w @ w
    profile = (ConstantProfile(base, alek.domain) if maxabs(w) == 0.0
               else RotatingConstantProfile(w, base, alek.domain))
    metric = BrinkmannMetric(alek.n, alek.domain, profile)
    pmap = rotation_gauge_map(w, +1.0)
    residual = math.nan
    if check:
        pts = _sample_points(alek, 25, seed=11)
        residual = pullback_residual(pmap, alek, metric, pts)
        if residual > 1e-9:
            raise ConversionError(f"rotation-gauge pullback residual {residual:.3e}")
    return ConversionResult(metric, pmap, residual)


def brinkmann_to_alekseevsky(brink: BrinkmannMetric, check=True) -> ConversionResult:
    """Inverse direction: a rotating profile e^{u w} B e^{-u w} becomes the
    constant-coefficient form (omega = w, p = B + w^2), via x = e^{-u w} X."""
    if isinstance(brink.p, ConstantProfile):
        w = np.zeros((brink.n, brink.n))
        base = brink.p.matrix
    elif isinstance(brink.p, RotatingConstantProfile):
        w = brink.p.omega
        base = brink.p.base
    else:
        raise ConversionError("profile must be Constant or RotatingConstant")
    alek = AlekseevskyMetric(brink.n, brink.domain,
                             ConstantProfile(base + w @ w, brink.domain),
                             ConstantProfile(w, brink.domain, symmetry="skew"))
    pmap = rotation_gauge_map(w, -1.0)
    residual = math.nan
    if check:
        pts = _sample_points(brink, 25, seed=13)
        residual = pullback_residual(pmap, brink, alek, pts)
        if residual > 1e-9:
            raise ConversionError(f"rotation-gauge pullback residual {residual:.3e}")
    return ConversionResult(alek, pmap, residual)


# -- conformal reparametrization -----------------------------------------------------


class ReparamResult(NamedTuple):
    profile: MatrixProfile
    point_map: PointMap
    factor: Callable
    U_interval: Interval


def conformal_reparam(p: MatrixProfile, Lfun: MatrixProfile, u0: float,
                      U0: float = 0.0, config=DEFAULT_CONFIG) -> ReparamResult:
    """Apply the conformal change of wave coordinate generated by a positive
    scalar L(U): with du = L(U)^2 dU, the map
        (u, v, x) -> (U(u), v + (1/2) L L' xT x, L(U) x)
    carries L^2 G_beta(p) isometrically to G_beta(P) with
        P(U) = L^{-4} p(u(U)) - (L''(U)/L(U)) I.
    Returns the new profile, the map, and the conformal factor L(U(u))^2.
    """
    if Lfun.n != 1:
        raise DomainError("L must be a scalar (1x1) profile")
    lo, hi = Lfun.window()
    if not lo <= U0 <= hi:
        raise DomainError("U0 outside L's window")
    us_check = np.linspace(lo + 1e-9, hi - 1e-9, 257)
    lvals = Lfun.eval_array(us_check, 0)[:, 0, 0]
    if lvals.min() <= 0.0:
        raise DomainError("L must be positive on its interval")

    def lval(U, order=0):
        return float(Lfun.eval(float(U), order)[0, 0])

    # u as a function of U (dU = L^2 du, so du/dU = L^{-2}), clipped where u
    # leaves the profile's interval
    def rhs_u(U, y):
        return [lval(U) ** -2]

    events = []
    if math.isfinite(p.interval.hi):
        ev_hi = lambda U, y: p.interval.hi - 1e-12 - y[0]
        ev_hi.terminal = True
        events.append(ev_hi)
    if math.isfinite(p.interval.lo):
        ev_lo = lambda U, y: y[0] - p.interval.lo - 1e-12
        ev_lo.terminal = True
        events.append(ev_lo)
    dense_u = DenseSolution(U0, np.array([u0]), rhs_u, lo + 1e-9, hi - 1e-9, config,
                            events=events or None)
    U_lo, U_hi = dense_u.domain.lo, dense_u.domain.hi

    def u_of(U):
        return float(dense_u.eval_state(float(U))[0])

    u_lo, u_hi = u_of(U_lo + 1e-12), u_of(U_hi - 1e-12)

    def U_of(u):
        if not u_lo <= u <= u_hi:
            raise DomainError("u outside the reparametrized range")
        return brentq(lambda U: u_of(U) - u, U_lo + 1e-13, U_hi - 1e-13, xtol=1e-13)

    def profile_fn(us, order):
        out = np.empty((us.size, p.n, p.n))
        eye = np.eye(p.n)
        for i, U in enumerate(us):
            U = float(U)
            l0, l1, l2 = lval(U), lval(U, 1), lval(U, 2)
            pu = p.eval(u_of(U), 0)
            if order == 0:
                out[i] = pu / l0**4 - (l2 / l0) * eye
            else:
                l3 = lval(U, 3)
                pd = p.eval(u_of(U), 1)
                out[i] = (-4.0 * l1 / l0**5 * pu + pd / l0**6
                          - (l3 / l0 - l2 * l1 / l0**2) * eye)
        return out

    new_interval = Interval(U_lo, U_hi)
    new_profile = CallableProfile(profile_fn, p.n, new_interval, "symmetric",
                                  max_analytic_order=1, window=(U_lo, U_hi),
                                  name="reparametrized")

    def forward(pt):
        U = U_of(pt[0])
        l0, l1 = lval(U), lval(U, 1)
        return np.concatenate([[U, pt[1] + 0.5 * l0 * l1 * float(pt[2:] @ pt[2:])],
                               l0 * pt[2:]])

    def jacobian(pt):
        n = pt.size - 2
        U = U_of(pt[0])
        l0, l1, l2 = lval(U), lval(U, 1), lval(U, 2)
        out = np.zeros((n + 2, n + 2))
        out[0, 0] = l0**2
        out[1, 0] = 0.5 * (l1**2 + l0 * l2) * l0**2 * float(pt[2:] @ pt[2:])
        out[1, 1] = 1.0
        out[1, 2:] = l0 * l1 * pt[2:]
        out[2:, 0] = l1 * l0**2 * pt[2:]
        out[2:, 2:] = l0 * np.eye(n)
        return out

    pmap = PointMap("conformal_reparam", forward, jacobian,
                    params={"u0": u0, "U0": U0})

    def factor(pt):
        return lval(U_of(pt[0])) ** 2

    return ReparamResult(new_profile, pmap, factor, new_interval)
