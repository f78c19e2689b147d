import numpy as np
import pytest

from planewaves.errors import DomainError, PairingError, SymmetryError
from planewaves.ode import (SolverConfig, integrate_h_inverse,
                            solve_jacobi_matrix, solve_jacobi_vector,
                            solve_sachs, solve_w_equation, symplectic_pairing)
from planewaves.profiles import (CallableProfile, ConstantProfile, Interval,
                                 scalar_constant)

D2 = np.diag([1.0, -1.0])


def test_config_validation():
    with pytest.raises(DomainError):
        SolverConfig(rel_tol=-1.0)


def test_jacobi_vector_flat_solutions():
    p0 = ConstantProfile(np.zeros((1, 1)))
    q = solve_jacobi_vector(p0, 0.0, [1.0], [0.0], u_range=(-3, 3))
    assert abs(q.eval(2.0)[0] - 1.0) < 1e-12
    q2 = solve_jacobi_vector(p0, 0.0, [0.0], [1.0], u_range=(-3, 3))
    assert abs(q2.eval(2.0)[0] - 2.0) < 1e-10


def test_jacobi_vector_cosine_oracle():
    # closed form: q'' + q = 0, q(0) = 1, q'(0) = 0 -> cos u
    p1 = ConstantProfile([[1.0]])
    q = solve_jacobi_vector(p1, 0.0, [1.0], [0.0], u_range=(-4, 4))
    us = np.linspace(-3.5, 3.5, 41)
    assert np.max(np.abs(q.eval(us, 0)[:, 0] - np.cos(us))) < 1e-8
    assert np.max(np.abs(q.eval(us, 1)[:, 0] + np.sin(us))) < 1e-8
    assert q.verification_residual < 1e-8


def test_jacobi_matrix_decoupled_oracle():
    # diag profile decouples into cos and cosh
    p = ConstantProfile(D2)
    lag = solve_jacobi_matrix(p, 0.0, np.eye(2), np.zeros((2, 2)), u_range=(-2, 2))
    u = 1.3
    expect = np.diag([np.cos(u), np.cosh(u)])
    assert np.max(np.abs(lag.L.eval(u) - expect)) < 1e-9
    assert lag.lagrangian_defect() < 1e-8


def test_jacobi_matrix_rejects_non_lagrangian_data():
    p = ConstantProfile(D2)
    bad = np.array([[0.0, 1.0], [0.0, 0.0]])  # L0T Ldot0 not symmetric
    with pytest.raises(SymmetryError):
        solve_jacobi_matrix(p, 0.0, np.eye(2), bad)


def test_flat_matrix_solutions():
    p0 = ConstantProfile(np.zeros((2, 2)))
    lag = solve_jacobi_matrix(p0, 0.0, np.eye(2), np.zeros((2, 2)), u_range=(-2, 2))
    assert np.allclose(lag.L.eval(1.7), np.eye(2), atol=1e-12)
    lag2 = solve_jacobi_matrix(p0, 0.0, np.zeros((2, 2)), np.eye(2), u_range=(-2, 2))
    assert np.allclose(lag2.L.eval(1.7), 1.7 * np.eye(2), atol=1e-10)


def test_sachs_flat_oracles():
    p0 = ConstantProfile(np.zeros((1, 1)))
    s = solve_sachs(p0, 0.0, [[0.0]], u_range=(-5, 5))
    assert abs(s.eval(3.0)[0, 0]) < 1e-12
    # S0 = 1: s(u) = 1/(1 + u), pole at u = -1
    s2 = solve_sachs(p0, 0.0, [[1.0]], u_range=(-5, 5))
    assert abs(s2.eval(1.0)[0, 0] - 0.5) < 1e-9
    assert s2.blowup_point == pytest.approx(-1.0, abs=1e-7)


def test_sachs_tangent_oracle_and_blowup():
    # s' + s^2 + 1 = 0, s(0) = 0 -> s = -tan u, blowup at pi/2
    p1 = ConstantProfile([[1.0]])
    s = solve_sachs(p1, 0.0, [[0.0]], u_range=(-1.2, 3.0))
    us = np.linspace(-1.1, 1.2, 25)
    vals = np.array([s.eval(float(u))[0, 0] for u in us])
    assert np.max(np.abs(vals + np.tan(us))) < 1e-7
    assert s.blowup_point == pytest.approx(np.pi / 2, abs=2e-8)
    with pytest.raises(SymmetryError):
        solve_sachs(ConstantProfile(D2), 0.0, np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_w_equation_oracles():
    zero = scalar_constant(0.0)
    w = solve_w_equation(zero, 0.0, 1.0, 0.0, 0.0, u_range=(-3, 3))
    assert abs(w.eval(2.2) - 1.0) < 1e-12
    w2 = solve_w_equation(zero, 0.0, 0.0, 0.0, 2.0, u_range=(-3, 3))
    assert abs(w2.eval(1.5) - 1.5**2) < 1e-9
    # constant coefficient oracle: w''' + 4c w' = 0 with (0,1,0) gives
    # w = sin(2 sqrt(c) u) / (2 sqrt(c))
    c = 0.7
    wc = solve_w_equation(scalar_constant(c), 0.0, 0.0, 1.0, 0.0, u_range=(-3, 3))
    us = np.linspace(-2.5, 2.5, 21)
    r = 2 * np.sqrt(c)
    expect = np.sin(r * us) / r
    vals = np.array([wc.eval(float(u)) for u in us])
    assert np.max(np.abs(vals - expect)) < 1e-8
    assert wc.verification_residual < 1e-8


def test_h_inverse_oracles():
    h1 = ConstantProfile(np.eye(2))
    prim = integrate_h_inverse(h1, 0.0, u_range=(-2, 2))
    assert np.allclose(prim.eval(1.5), 1.5 * np.eye(2), atol=1e-10)

    # scalar quadrature oracle: h = e^{2u} -> H = (1 - e^{-2u}) / 2
    def fn(us, order):
        return (2.0**order * np.exp(2 * us)).reshape(-1, 1, 1)

    hexp = CallableProfile(fn, 1, Interval(-2, 2), "symmetric", window=(-2, 2))
    prim2 = integrate_h_inverse(hexp, 0.0)
    us = np.linspace(-1.5, 1.5, 11)
    expect = (1 - np.exp(-2 * us)) / 2
    got = np.array([prim2.eval(float(u))[0, 0] for u in us])
    assert np.max(np.abs(got - expect)) < 1e-8

    # componentwise: diag(1, 4) -> diag(u, u/4)
    prim3 = integrate_h_inverse(ConstantProfile(np.diag([1.0, 4.0])), 0.0,
                                u_range=(-2, 2))
    assert np.allclose(prim3.eval(1.0), np.diag([1.0, 0.25]), atol=1e-10)
    # analytic derivative orders
    assert np.allclose(prim3.eval(0.3, 1), np.diag([1.0, 0.25]), atol=1e-12)
    assert np.allclose(prim3.eval(0.3, 2), np.zeros((2, 2)), atol=1e-12)


def test_h_inverse_rejects_singular():
    from planewaves.errors import SingularityError

    bad = ConstantProfile(np.diag([1.0, 0.0]))
    with pytest.raises(SingularityError):
        integrate_h_inverse(bad, 0.0, u_range=(-1, 1))


def test_symplectic_pairing_conservation(rng):
    profiles = [ConstantProfile(D2),
                ConstantProfile(np.array([[0.3, 0.1], [0.1, -0.2]]))]
    for p in profiles:
        for _ in range(5):
            q0, qd0 = rng.normal(size=(2, 2)), rng.normal(size=(2, 2))
            q1 = solve_jacobi_vector(p, 0.0, q0[0], qd0[0], u_range=(-3, 3))
            q2 = solve_jacobi_vector(p, 0.0, q0[1], qd0[1], u_range=(-3, 3))
            dom = q1.domain
            us = np.linspace(dom.lo + 1e-6, dom.hi - 1e-6, 33)
            vals = (np.einsum("ti,ti->t", q1.eval(us, 0), q2.eval(us, 1))
                    - np.einsum("ti,ti->t", q2.eval(us, 0), q1.eval(us, 1)))
            assert vals.max() - vals.min() < 1e-8


def test_symplectic_pairing_examples():
    p0 = ConstantProfile(np.zeros((1, 1)))
    q1 = solve_jacobi_vector(p0, 0.0, [1.0], [0.0], u_range=(-2, 2))
    q2 = solve_jacobi_vector(p0, 0.0, [0.0], [1.0], u_range=(-2, 2))
    assert symplectic_pairing(q1, q2) == pytest.approx(1.0, abs=1e-10)
    assert symplectic_pairing(q1, q1) == pytest.approx(0.0, abs=1e-12)
    # (cos u, 0), (sin u, 0) for p = diag(1, -1): Wronskian oracle gives 1
    p = ConstantProfile(D2)
    qc = solve_jacobi_vector(p, 0.0, [1.0, 0.0], [0.0, 0.0], u_range=(-2, 2))
    qs = solve_jacobi_vector(p, 0.0, [0.0, 0.0], [1.0, 0.0], u_range=(-2, 2))
    assert symplectic_pairing(qc, qs) == pytest.approx(1.0, abs=1e-10)


def test_pairing_error_on_mismatched_equations():
    q1 = solve_jacobi_vector(ConstantProfile([[1.0]]), 0.0, [1.0], [0.0],
                             u_range=(-3, 3))
    q2 = solve_jacobi_vector(ConstantProfile([[-1.0]]), 0.0, [0.0], [1.0],
                             u_range=(-3, 3))
    with pytest.raises(PairingError):
        symplectic_pairing(q1, q2)


def test_sachs_jacobi_compatibility():
    # if L solves the matrix equation then S = L' L^{-1} solves the Riccati one
    p = ConstantProfile(np.array([[0.4, 0.1], [0.1, -0.3]]))
    lag = solve_jacobi_matrix(p, 0.0, np.eye(2), 0.1 * np.eye(2), u_range=(-1, 1))
    sachs = solve_sachs(p, 0.0, 0.1 * np.eye(2), u_range=(-1, 1))
    for u in np.linspace(-0.9, 0.9, 13):
        assert np.max(np.abs(lag.shear(float(u)) - sachs.eval(float(u)))) < 1e-7


def test_linearity_of_jacobi_solutions(rng):
    p = ConstantProfile(D2)
    a0, b0 = rng.normal(size=2), rng.normal(size=2)
    a1, b1 = rng.normal(size=2), rng.normal(size=2)
    qa = solve_jacobi_vector(p, 0.0, a0, a1, u_range=(-2, 2))
    qb = solve_jacobi_vector(p, 0.0, b0, b1, u_range=(-2, 2))
    qsum = solve_jacobi_vector(p, 0.0, a0 + b0, a1 + b1, u_range=(-2, 2))
    us = np.linspace(-1.9, 1.9, 17)
    assert np.max(np.abs(qsum.eval(us, 0) - qa.eval(us, 0) - qb.eval(us, 0))) < 1e-9


def test_eval_outside_solution_domain():
    p1 = ConstantProfile([[1.0]])
    s = solve_sachs(p1, 0.0, [[0.0]], u_range=(-1.2, 3.0))
    with pytest.raises(DomainError):
        s.eval(2.5)  # beyond the blowup
