import numpy as np
import pytest
import scipy.linalg as sla

from planewaves.errors import DomainError, SymmetryError
from planewaves.profiles import (ConstantProfile, Interval, PowerLawProfile,
                                 RotatingConstantProfile, SampledProfile,
                                 ScalarTimesFixedProfile, ShiftBumpProfile,
                                 SumProfile, bernoulli_family_profile,
                                 sampled_from, seminorm, trace_decompose,
                                 trace_free_part, trace_scalar)
from planewaves.sequences import ShiftSequence

J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
D2 = np.diag([1.0, -1.0])


def test_interval_requires_order():
    with pytest.raises(DomainError):
        Interval(1.0, 1.0)


def test_constant_profile_eval_and_derivatives():
    p = ConstantProfile(D2)
    assert np.array_equal(p.eval(0.7), D2)
    assert np.array_equal(p.eval(0.7, 1), np.zeros((2, 2)))
    with pytest.raises(DomainError):
        p.eval(0.0, 4)


def test_rotating_constant_matches_expm_oracle():
    # oracle: direct matrix-exponential conjugation
    rc = RotatingConstantProfile(J2, D2)
    for u in (np.pi / 2, 0.3, -1.2):
        oracle = sla.expm(u * J2) @ D2 @ sla.expm(-u * J2)
        assert np.allclose(rc.eval(u), oracle, atol=1e-13)
    assert np.allclose(rc.eval(np.pi / 2), np.diag([-1.0, 1.0]), atol=1e-12)


def test_power_law_values_and_pole_exclusion():
    p = PowerLawProfile(1.0, 1.0, D2, Interval(-8.0, 1.0))
    assert np.allclose(p.eval(0.5), (1 - 0.5) ** -2 * D2)
    with pytest.raises(DomainError):
        PowerLawProfile(1.0, 1.0, D2, Interval(0.0, 2.0))
    # derivative ladder (k+1)! b^k (a-bu)^(-2-k)
    u = 0.3
    for k, coef in [(1, 2.0), (2, 6.0), (3, 24.0)]:
        assert np.allclose(p.eval(u, k), coef * (1 - u) ** (-2 - k) * D2)


@pytest.mark.parametrize("build", [
    lambda: ConstantProfile(D2),
    lambda: RotatingConstantProfile(0.7 * J2, D2),
    lambda: PowerLawProfile(1.0, 1.0, D2, Interval(-8.0, 0.97)),
    lambda: bernoulli_family_profile(ShiftSequence.from_values([0.1, 0.4, 0.25])),
    lambda: SumProfile([ConstantProfile(D2), RotatingConstantProfile(J2, D2)]),
])
def test_symmetry_preserved_at_all_orders(build):
    p = build()
    us = p.sample_grid(97)
    for order in range(4):
        vals = p.eval_array(us, order)
        defect = np.max(np.abs(vals - vals.transpose(0, 2, 1)))
        assert defect <= 1e-10 * (1.0 + np.max(np.abs(vals)))


@pytest.mark.parametrize("build", [
    lambda: RotatingConstantProfile(0.7 * J2, D2),
    lambda: PowerLawProfile(1.0, 1.0, D2, Interval(-8.0, 0.0)),
    lambda: bernoulli_family_profile(ShiftSequence.from_values([0.1, 0.4, 0.25])),
])
def test_first_derivative_matches_central_difference(build):
    p = build()
    lo, hi = p.window()
    us = np.linspace(lo + 0.05, hi - 0.05, 23)
    h = 1e-4
    fd = (p.eval_array(us + h, 0) - p.eval_array(us - h, 0)) / (2 * h)
    assert np.max(np.abs(p.eval_array(us, 1) - fd)) < 1e-6


def test_trace_decompose_examples():
    td = trace_decompose(D2)
    assert td.scalar == 0.0 and np.array_equal(td.tilde, D2)
    td = trace_decompose(np.eye(2))
    assert td.scalar == 1.0 and np.allclose(td.tilde, 0.0)
    td = trace_decompose(np.diag([3.0, 1.0]))  # P = tr/2 = 2 by hand
    assert td.scalar == 2.0 and np.allclose(td.tilde, D2)
    assert np.allclose(td.reconstruct(), np.diag([3.0, 1.0]))
    with pytest.raises(SymmetryError):
        trace_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_trace_decompose_is_projection():
    m = np.array([[2.0, 0.3], [0.3, -1.0]])
    once = trace_decompose(m)
    twice = trace_decompose(once.tilde)
    assert np.allclose(twice.tilde, once.tilde) and abs(twice.scalar) < 1e-14


def test_trace_parts_profiles():
    p = ConstantProfile(np.diag([3.0, 1.0]))
    tf = trace_free_part(p)
    ts = trace_scalar(p)
    assert np.allclose(tf.eval(0.2), D2)
    assert np.allclose(ts.eval(0.2), [[2.0]])
    assert abs(np.trace(tf.eval(1.3))) < 1e-14


def test_seminorm_constant_and_zero():
    assert np.isclose(seminorm(ConstantProfile(D2), 1), np.sqrt(2.0))
    assert seminorm(ConstantProfile(np.zeros((2, 2))), 3) == 0.0


def test_seminorm_bump_profile_against_dense_grid_oracle():
    # oracle: brute-force sup of |p| + |p'| on a step-1e-4 grid with
    # finite-difference derivatives, independent of the analytic path
    seq = ShiftSequence.from_values([0.5, 0.5, 0.5])
    prof = ShiftBumpProfile(seq)
    us = np.arange(-1.0, 1.0 + 1e-4, 1e-4)
    vals = prof.eval_array(us, 0)[:, 0, 0]
    dvals = np.gradient(vals, us)
    oracle = np.max(np.abs(vals) + np.abs(dvals))
    assert abs(seminorm(prof, 1) - oracle) < 5e-3 * (1 + oracle)


def test_seminorm_requires_window():
    with pytest.raises(DomainError):
        seminorm(ConstantProfile(D2, Interval(-0.5, 0.5)), 1)


def test_sampled_profile_roundtrip_and_derivatives():
    grid = np.linspace(-1, 1, 41)
    vals = np.stack([np.array([[np.sin(t) + 2, 0.1], [0.1, 1.0]]) for t in grid])
    p = SampledProfile(grid, vals)
    assert np.allclose(p.eval(0.37)[0, 0], np.sin(0.37) + 2, atol=1e-6)
    assert np.allclose(p.eval(0.37, 1)[0, 0], np.cos(0.37), atol=1e-4)
    # order 3 is a difference of the spline curvature; just require finiteness
    assert np.isfinite(p.eval(0.37, 3)).all()


def test_sampled_from_resampling():
    rc = RotatingConstantProfile(J2, D2)
    s = sampled_from(rc, num=801)
    us = np.linspace(-3, 3, 11)
    assert np.max(np.abs(s.eval_array(us, 0) - rc.eval_array(us, 0))) < 1e-6


def test_sum_profile_dimension_mismatch():
    with pytest.raises(DomainError):
        SumProfile([ConstantProfile(D2), ConstantProfile(np.zeros((3, 3)))])


def test_scalar_times_fixed_requires_scalar():
    with pytest.raises(DomainError):
        ScalarTimesFixedProfile(ConstantProfile(D2), D2)


def test_eval_outside_interval_raises():
    p = PowerLawProfile(1.0, 1.0, D2, Interval(-8.0, 1.0))
    with pytest.raises(DomainError):
        p.eval(1.5)
