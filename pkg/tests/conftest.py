import numpy as np
import pytest

from planewaves.profiles import CallableProfile, Interval


def trig_positive_profile(seed, lo=-2.0, hi=2.0, floor=0.6):
    """Random smooth positive-definite 2x2 profile h = Q(u)^T Q(u) + floor*I
    with analytic derivatives (Q trigonometric)."""
    rng = np.random.default_rng(seed)
    b0 = rng.normal(0, 0.4, (2, 2))
    b1 = rng.normal(0, 0.25, (2, 2))
    w = rng.uniform(0.5, 1.4)
    ph = rng.uniform(0, 2 * np.pi)

    def fn(us, order):
        c = {0: np.cos(w * us + ph), 1: -w * np.sin(w * us + ph),
             2: -w * w * np.cos(w * us + ph), 3: w**3 * np.sin(w * us + ph)}
        q = b0[None] + b1[None] * c[0][:, None, None]
        qt = q.transpose(0, 2, 1)
        if order == 0:
            return qt @ q + floor * np.eye(2)
        qd = b1[None] * c[1][:, None, None]
        if order == 1:
            return qd.transpose(0, 2, 1) @ q + qt @ qd
        qdd = b1[None] * c[2][:, None, None]
        if order == 2:
            return (qdd.transpose(0, 2, 1) @ q + 2 * qd.transpose(0, 2, 1) @ qd
                    + qt @ qdd)
        qddd = b1[None] * c[3][:, None, None]
        return (qddd.transpose(0, 2, 1) @ q + 3 * qdd.transpose(0, 2, 1) @ qd
                + 3 * qd.transpose(0, 2, 1) @ qdd + qt @ qddd)

    return CallableProfile(fn, 2, Interval(lo, hi), "symmetric", window=(lo, hi))


def parabola_profile(lo=-3.0, hi=3.0):
    """diag(1 + u^2, -1): conformally curved, no extra symmetry."""

    def fn(us, order):
        out = np.zeros((us.size, 2, 2))
        if order == 0:
            out[:, 0, 0] = 1 + us**2
            out[:, 1, 1] = -1.0
        elif order == 1:
            out[:, 0, 0] = 2 * us
        elif order == 2:
            out[:, 0, 0] = 2.0
        return out

    return CallableProfile(fn, 2, Interval(), "symmetric", window=(lo, hi))


def scalar_profile_of(f, derivs, interval, window=None):
    fns = [f] + list(derivs)

    def fn(us, order):
        return np.asarray(fns[order](us), dtype=float).reshape(-1, 1, 1)

    return CallableProfile(fn, 1, interval, "symmetric",
                           window=window or (interval.lo, interval.hi))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
