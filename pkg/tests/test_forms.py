import numpy as np
import pytest

from conftest import scalar_profile_of, trig_positive_profile
from planewaves.errors import ConversionError, DomainError
from planewaves.forms import (alekseevsky_to_brinkmann, affine_rotation_map,
                              brinkmann_to_alekseevsky, brinkmannize, compose,
                              conformal_pullback_residual, conformal_reparam,
                              dilation_map, heisenberg_map, identity_map,
                              pullback_residual, rosenize, rotation_gauge_map,
                              _sample_points)
from planewaves.metrics import (AlekseevskyMetric, BrinkmannMetric,
                                RosenMetric, SpacetimePoint)
from planewaves.ode import solve_jacobi_vector
from planewaves.profiles import (CallableProfile, ConstantProfile, Interval,
                                 PowerLawProfile, RotatingConstantProfile)

D2 = np.diag([1.0, -1.0])
J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def cos_cosh_rosen():
    def fn(us, order):
        out = np.zeros((us.size, 2, 2))
        table = {
            0: (np.cos(us) ** 2, np.cosh(us) ** 2),
            1: (-np.sin(2 * us), np.sinh(2 * us)),
            2: (-2 * np.cos(2 * us), 2 * np.cosh(2 * us)),
            3: (4 * np.sin(2 * us), 4 * np.sinh(2 * us)),
        }
        out[:, 0, 0], out[:, 1, 1] = table[order]
        return out

    prof = CallableProfile(fn, 2, Interval(-np.pi / 4, np.pi / 4), "symmetric",
                           window=(-np.pi / 4, np.pi / 4))
    return RosenMetric(2, Interval(-np.pi / 4, np.pi / 4), prof)


def test_brinkmannize_identity_rosen():
    r = RosenMetric(2, Interval(-2, 2), ConstantProfile(np.eye(2), Interval(-2, 2)))
    res = brinkmannize(r, u0=0.0)
    us = np.linspace(-1.8, 1.8, 21)
    assert np.max(np.abs(res.metric.p.eval_array(us, 0))) < 1e-10
    pt = SpacetimePoint.of(0.5, 1.0, [0.3, -0.2])
    assert np.allclose(res.point_map.apply(pt), pt.as_array(), atol=1e-12)
    assert res.residual < 1e-7


def test_brinkmannize_cos_cosh_oracle():
    # oracle: L = diag(cos u, cosh u) solves L'' + diag(1,-1) L = 0 and
    # h = LT L, so the recovered profile must be diag(1, -1)
    res = brinkmannize(cos_cosh_rosen(), u0=0.0)
    us = np.linspace(-0.7, 0.7, 31)
    assert np.max(np.abs(res.metric.p.eval_array(us, 0) - D2)) < 1e-8
    assert res.residual < 1e-7


def test_brinkmannize_expanding_flat_gauge():
    # h = (1+u)^2 (n = 1): L = 1 + u has L'' = 0, so p = 0
    def fn(us, order):
        vals = {0: (1 + us) ** 2, 1: 2 * (1 + us),
                2: np.full_like(us, 2.0), 3: np.zeros_like(us)}[order]
        return vals.reshape(-1, 1, 1)

    h = CallableProfile(fn, 1, Interval(-0.9, 3.0), "symmetric", window=(-0.9, 3.0))
    res = brinkmannize(RosenMetric(1, Interval(-0.9, 3.0), h), u0=0.0)
    us = np.linspace(-0.7, 2.7, 21)
    assert np.max(np.abs(res.metric.p.eval_array(us, 0))) < 1e-9


def test_rosenize_flat():
    m = BrinkmannMetric(2, Interval(), ConstantProfile(np.zeros((2, 2))))
    res = rosenize(m, 0.0, u_range=(-3, 3))
    us = np.linspace(-2.5, 2.5, 11)
    assert np.max(np.abs(res.metric.h.eval_array(us, 0) - np.eye(2))) < 1e-10


def test_rosenize_scalar_oracles():
    # p = 1: h = cos^2 u with validity ending at the pi/2 conjugate points
    m = BrinkmannMetric(1, Interval(), ConstantProfile([[1.0]]))
    res = rosenize(m, 0.0, u_range=(-3, 3))
    assert res.validity.hi == pytest.approx(np.pi / 2, abs=1e-5)
    assert res.validity.lo == pytest.approx(-np.pi / 2, abs=1e-5)
    us = np.linspace(-1.3, 1.3, 25)
    assert np.max(np.abs(res.metric.h.eval_array(us, 0)[:, 0, 0]
                         - np.cos(us) ** 2)) < 1e-9
    # p = -1: h = cosh^2 u on the whole range
    m2 = BrinkmannMetric(1, Interval(), ConstantProfile([[-1.0]]))
    res2 = rosenize(m2, 0.0, u_range=(-3, 3))
    assert res2.validity.hi >= 2.99
    assert np.max(np.abs(res2.metric.h.eval_array(us, 0)[:, 0, 0]
                         - np.cosh(us) ** 2)) < 1e-8


def test_rosenize_point_map_pullback():
    m = BrinkmannMetric(2, Interval(), ConstantProfile(D2))
    res = rosenize(m, 0.0, u_range=(-1.2, 1.2))
    pts = _sample_points(m, 20, seed=1, u_window=(-1.0, 1.0))
    # forward map: Brinkmann -> Rosen pulls the Rosen metric back to Brinkmann
    assert pullback_residual(res.point_map, m, res.metric, pts) < 1e-8
    # inverse direction
    pts_r = _sample_points(res.metric, 20, seed=2, u_window=(-1.0, 1.0))
    assert pullback_residual(res.point_map.inverse, res.metric, m, pts_r) < 1e-8


@pytest.mark.parametrize("p_builder,u_range", [
    (lambda: ConstantProfile(np.zeros((2, 2))), (-3, 3)),
    (lambda: ConstantProfile(D2), (-1.3, 1.3)),
    (lambda: RotatingConstantProfile(0.6 * J2, D2), (-1.2, 1.2)),
    (lambda: PowerLawProfile(1.0, 1.0, D2, Interval(0.0, 0.9)), (0.001, 0.899)),
])
def test_roundtrip_recovers_profile(p_builder, u_range):
    p = p_builder()
    m = BrinkmannMetric(2, Interval(u_range[0], u_range[1]) if p.interval.bounded
                        else Interval(), p)
    u0 = 0.5 * (u_range[0] + u_range[1])
    ros = rosenize(m, u0, u_range=u_range)
    span = ros.validity.hi - ros.validity.lo
    lo, hi = ros.validity.lo + 0.05 * span, ros.validity.hi - 0.05 * span
    back = brinkmannize(ros.metric, u0=u0, u_range=(lo, hi))
    us = np.linspace(lo + 1e-6, hi - 1e-6, 301)
    assert np.max(np.abs(back.metric.p.eval_array(us, 0)
                         - p.eval_array(us, 0))) < 1e-6
    assert back.residual < 1e-7


def test_brinkmannize_base_point_independence():
    # two base points give profiles related by a constant rotation gamma
    from planewaves.equivalence import brinkmann_isometry

    r = cos_cosh_rosen()
    b1 = brinkmannize(r, u0=0.0)
    b2 = brinkmannize(r, u0=0.3)
    wit = brinkmann_isometry(b1.metric, b2.metric)
    assert wit is not None
    assert wit.a == pytest.approx(1.0, abs=1e-8)
    assert wit.u0 == pytest.approx(0.0, abs=1e-7)


def test_alekseevsky_to_brinkmann_examples():
    # omega = 0: unchanged constants, identity map
    a0 = AlekseevskyMetric(2, Interval(), ConstantProfile(D2),
                           ConstantProfile(np.zeros((2, 2)), symmetry="skew"))
    res = alekseevsky_to_brinkmann(a0)
    assert np.allclose(res.metric.p.eval(0.7), D2)
    # omega = J, p = 0: base = -J^2 = I, profile constant I
    a1 = AlekseevskyMetric(2, Interval(), ConstantProfile(np.zeros((2, 2))),
                           ConstantProfile(J2, symmetry="skew"))
    res1 = alekseevsky_to_brinkmann(a1)
    us = np.linspace(-2, 2, 9)
    assert np.max(np.abs(res1.metric.p.eval_array(us, 0) - np.eye(2))) < 1e-12
    assert res1.residual < 1e-9
    # omega = J, p = diag(2, 0): base = p + I = diag(3, 1)
    a2 = AlekseevskyMetric(2, Interval(), ConstantProfile(np.diag([2.0, 0.0])),
                           ConstantProfile(J2, symmetry="skew"))
    res2 = alekseevsky_to_brinkmann(a2)
    assert np.allclose(res2.metric.p.base, np.diag([3.0, 1.0]))
    assert np.allclose(res2.metric.p.omega, J2)
    assert res2.residual < 1e-9


def test_brinkmann_to_alekseevsky_examples():
    # constant profile -> omega = 0
    m = BrinkmannMetric(2, Interval(), ConstantProfile(D2))
    res = brinkmann_to_alekseevsky(m)
    assert np.allclose(res.metric.p.matrix, D2)
    assert np.max(np.abs(res.metric.omega.matrix)) == 0.0
    # rotating profile with base I and generator J: p_out = I + J^2 = 0
    mrc = BrinkmannMetric(2, Interval(), RotatingConstantProfile(J2, np.eye(2)))
    res2 = brinkmann_to_alekseevsky(mrc)
    assert np.max(np.abs(res2.metric.p.matrix)) < 1e-14
    assert np.allclose(res2.metric.omega.matrix, J2)
    assert res2.residual < 1e-9


def test_alekseevsky_round_trip_exact_parameters():
    a = AlekseevskyMetric(2, Interval(), ConstantProfile(np.diag([2.0, 0.0])),
                          ConstantProfile(0.8 * J2, symmetry="skew"))
    there = alekseevsky_to_brinkmann(a)
    back = brinkmann_to_alekseevsky(there.metric)
    assert np.allclose(back.metric.p.matrix, np.diag([2.0, 0.0]), atol=1e-14)
    assert np.allclose(back.metric.omega.matrix, 0.8 * J2, atol=1e-14)


def test_conversion_requires_constant_profiles():
    var = BrinkmannMetric(2, Interval(0, 1),
                          PowerLawProfile(1.0, 1.0, D2, Interval(0.0, 0.95)))
    with pytest.raises(ConversionError):
        brinkmann_to_alekseevsky(var)
    a_bad = AlekseevskyMetric(2, Interval(0, 0.9),
                              PowerLawProfile(1.0, 1.0, D2, Interval(0.0, 0.95)),
                              ConstantProfile(J2, Interval(0, 0.95), symmetry="skew"))
    with pytest.raises(ConversionError):
        alekseevsky_to_brinkmann(a_bad)


def test_pullback_identity_and_wrong_map():
    m = BrinkmannMetric(2, Interval(), ConstantProfile(np.zeros((2, 2))))
    pts = _sample_points(m, 10, seed=4)
    assert pullback_residual(identity_map(2), m, m, pts) == 0.0
    # doubling the transverse coordinates on flat space: JT(-I)J - (-I) = -3I
    double = affine_rotation_map(1.0, 0.0, np.eye(2))
    double = compose(dilation_map(np.log(2.0), 2), double)
    # strip the v-scaling to isolate x -> 2x: build the raw map directly
    from planewaves.forms import PointMap

    def fwd(pt):
        return np.concatenate([pt[:2], 2.0 * pt[2:]])

    raw = PointMap("stretch", fwd)
    res = pullback_residual(raw, m, m, pts)
    assert res == pytest.approx(3.0, abs=1e-6)


def test_heisenberg_map_is_isometry():
    m = BrinkmannMetric(2, Interval(), ConstantProfile(D2))
    q = solve_jacobi_vector(m.p, 0.0, [0.4, -0.2], [0.1, 0.3], u_range=(-2, 2))
    hs = heisenberg_map(q, scale=1.0, v_shift=0.7)
    pts = _sample_points(m, 15, seed=5, u_window=(-1.8, 1.8))
    assert pullback_residual(hs, m, m, pts) < 1e-8


def test_rotation_and_dilation_maps():
    m = BrinkmannMetric(2, Interval(), ConstantProfile(np.zeros((2, 2))))
    pts = _sample_points(m, 10, seed=6)
    # a constant rotation of the wave front is an isometry
    th = 0.6
    rot_const = affine_rotation_map(1.0, 0.0, np.array(
        [[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]]))
    assert pullback_residual(rot_const, m, m, pts) < 1e-12
    # the u-dependent gauge rotation is NOT an isometry of the flat Brinkmann
    # metric (it generates the rotation cross term of the third form)
    rot_gauge = rotation_gauge_map(0.5 * J2, 1.0)
    assert pullback_residual(rot_gauge, m, m, pts) > 0.1
    dil = dilation_map(0.3, 2)
    assert conformal_pullback_residual(dil, m, m, pts) < 1e-12
    # explicit factor e^{2t}
    assert conformal_pullback_residual(dil, m, m, pts,
                                       factor=lambda pt: np.exp(0.6)) < 1e-12


def test_conformal_reparam_examples():
    # L = 1: identity
    one = ConstantProfile([[1.0]], Interval(-2, 2))
    rp = conformal_reparam(ConstantProfile(D2), one, 0.0)
    us = np.linspace(-1.5, 1.5, 7)
    assert np.max(np.abs(rp.profile.eval_array(us, 0) - D2)) < 1e-10
    # L = U on U > 0: flat stays flat (L'' = 0)
    lin = scalar_profile_of(lambda us: us, [lambda us: np.ones_like(us),
                                            lambda us: np.zeros_like(us),
                                            lambda us: np.zeros_like(us)],
                            Interval(0.2, 3.0))
    rp2 = conformal_reparam(ConstantProfile(np.zeros((2, 2))), lin, 0.0, U0=1.0)
    Us = np.linspace(rp2.U_interval.lo + 0.01, rp2.U_interval.hi - 0.01, 9)
    assert np.max(np.abs(rp2.profile.eval_array(Us, 0))) < 1e-10
    # L = cosh U on flat input: P = -(cosh''/cosh) I = -I
    cosh = scalar_profile_of(np.cosh, [np.sinh, np.cosh, np.sinh],
                             Interval(-1.5, 1.5))
    rp3 = conformal_reparam(ConstantProfile(np.zeros((2, 2))), cosh, 0.0)
    Us = np.linspace(rp3.U_interval.lo + 0.01, rp3.U_interval.hi - 0.01, 15)
    assert np.max(np.abs(rp3.profile.eval_array(Us, 0) + np.eye(2))) < 1e-9
    # the map carries L^2 G(p) to G(P): conformal residual with factor L^2
    m0 = BrinkmannMetric(2, Interval(), ConstantProfile(np.zeros((2, 2))))
    mP = BrinkmannMetric(2, rp3.U_interval, rp3.profile)
    pts = _sample_points(m0, 20, seed=3, u_window=(-0.85, 0.85))
    assert conformal_pullback_residual(rp3.point_map, m0, mP, pts,
                                       factor=rp3.factor) < 1e-7


def test_conformal_reparam_requires_positive_L():
    lin = scalar_profile_of(lambda us: us, [lambda us: np.ones_like(us),
                                            lambda us: np.zeros_like(us),
                                            lambda us: np.zeros_like(us)],
                            Interval(-1.0, 1.0))
    with pytest.raises(DomainError):
        conformal_reparam(ConstantProfile(D2), lin, 0.0)


def test_conversion_pullbacks_on_random_points():
    # all conversion outputs pass the pullback gate on a 50-point sample
    r = cos_cosh_rosen()
    res = brinkmannize(r, u0=0.0)
    pts = _sample_points(r, 50, seed=11, u_window=(-0.7, 0.7))
    assert pullback_residual(res.point_map, r, res.metric, pts) < 1e-7
