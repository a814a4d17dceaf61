from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from shiftfloquet.errors import LogBranchFailure, NotRegressive, OutOfDomain, SingularM
from shiftfloquet.floquet import (G_of, MatrixFunction, exp_R, floquet_decompose, in_P, m_of,
                                  noncritical_check, peano_baker,
                                  periodic_solution_exists_homogeneous, r_function, solve_R,
                                  theta, transition_matrix)
from shiftfloquet.matfun import PrincipalPower, fractional_power, principal_log
from shiftfloquet.timescale import (catalog_systems, geometric_system, integer_system,
                                    power_system)

from oracles import product_transition, theta_bruteforce


def dyadic_A():
    s = power_system(2.0)
    return MatrixFunction(s, 2, lambda t: np.eye(2) / t, 2.0)


# principal powers ----------------------------------------------------------------

def test_principal_power_matches_scipy():
    rng = np.random.default_rng(1)
    for _ in range(10):
        V = rng.normal(size=(3, 3))
        M = V @ np.diag(rng.uniform(0.2, 4, 3)) @ np.linalg.inv(V)
        for x in (0.5, 1.0 / 3, -0.75, 2.0):
            assert np.allclose(fractional_power(M, x), scipy.linalg.fractional_matrix_power(M, x),
                               atol=1e-9)
        assert np.allclose(scipy.linalg.expm(principal_log(M)), M, atol=1e-10)


def test_defective_matrix_uses_schur_log():
    M = np.array([[2.0, 1.0], [0.0, 2.0]])
    P = PrincipalPower(M)
    assert P.mode == "schur"
    assert np.allclose(P(0.5) @ P(0.5), M, atol=1e-12)


def test_complex_spectrum_power_is_real():
    th = 0.7
    M = 2 * np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    X = fractional_power(M, 0.5)
    assert not np.iscomplexobj(X)
    assert np.allclose(X @ X, M)


def test_negative_eigenvalue_only_blocks_fractional_powers():
    P = PrincipalPower(np.diag([-2.0, 3.0]))
    assert not P.has_principal_log
    assert np.array_equal(P(2.0), np.diag([4.0, 9.0]))
    with pytest.raises(LogBranchFailure):
        P(0.5)


def test_singular_monodromy():
    with pytest.raises(SingularM):
        PrincipalPower(np.array([[1.0, 2.0], [2.0, 4.0]]))


# transition matrices -------------------------------------------------------------

def test_dyadic_monodromy_exact():
    A = dyadic_A()
    assert np.array_equal(transition_matrix(A, 2.0, 1.0), 2 * np.eye(2))
    assert np.array_equal(transition_matrix(A, 8.0, 1.0), 8 * np.eye(2))


def test_transition_at_t0_is_identity():
    assert np.array_equal(transition_matrix(dyadic_A(), 1.0, 1.0), np.eye(2))


def test_constant_A_on_integers():
    A0 = np.array([[0.1, 0.3], [-0.2, 0.05]])
    A = MatrixFunction.constant(integer_system(), A0)
    for k in range(0, 6):
        assert np.allclose(transition_matrix(A, k, 0), np.linalg.matrix_power(np.eye(2) + A0, k),
                           atol=1e-14)


def test_backward_transition_is_inverse():
    A = dyadic_A()
    assert np.allclose(transition_matrix(A, 0.25, 1.0) @ transition_matrix(A, 1.0, 0.25), np.eye(2))
    assert np.allclose(transition_matrix(A, 0.25, 1.0), 0.25 * np.eye(2))


def test_cocycle():
    rng = np.random.default_rng(3)
    vals = {k: rng.normal(size=(2, 2)) * 0.3 for k in range(-2, 10)}
    s = integer_system()
    A = MatrixFunction(s, 2, lambda t: vals[int(t)])
    for u in range(0, 6):
        # same factors, different association: equal up to rounding
        lhs = transition_matrix(A, 7, 0)
        assert np.allclose(lhs, transition_matrix(A, 7, u) @ transition_matrix(A, u, 0),
                           atol=1e-14, rtol=1e-14)


def test_not_regressive_names_point():
    A = MatrixFunction.constant(integer_system(), -np.eye(1))
    with pytest.raises(NotRegressive) as err:
        transition_matrix(A, 3, 0)
    assert err.value.point == 0.0


def test_transition_matches_oracle_product():
    s = geometric_system(3.0)
    A = MatrixFunction(s, 2, lambda t: np.array([[1 / t, 0.5], [0.0, -0.2 / t]]))
    pts = [3.0 ** k for k in range(0, 5)]
    assert np.allclose(transition_matrix(A, pts[-1]), product_transition(pts, A.fn), rtol=1e-13)


def test_peano_baker_examples():
    A = dyadic_A()
    assert np.array_equal(peano_baker(A, 2.0, 1.0, order=0), np.eye(2))
    assert np.array_equal(peano_baker(A, 2.0, 1.0, order=1), transition_matrix(A, 2.0, 1.0))
    assert np.allclose(peano_baker(A, 4.0, 1.0, order=2), transition_matrix(A, 4.0, 1.0), atol=1e-14)
    with pytest.raises(OutOfDomain):
        peano_baker(A, 0.5, 1.0)


@settings(max_examples=30)
@given(st.integers(0, 2**31), st.integers(1, 8), st.sampled_from(["integer", "geometric"]))
def test_peano_baker_oracle(seed, steps, kind):
    rng = np.random.default_rng(seed)
    s = integer_system() if kind == "integer" else geometric_system(2.0)
    vals = {k: rng.uniform(-0.5, 0.5, size=(3, 3)) / s.scale.mu_index(k) for k in range(0, steps)}
    A = MatrixFunction(s, 3, lambda t: vals[s.index(t)])
    t = s.point(steps)
    assert np.allclose(peano_baker(A, t, s.t0, order=steps), transition_matrix(A, t, s.t0),
                       atol=1e-12, rtol=0)


# Theta ----------------------------------------------------------------------------

def test_theta_additive_with_t0_zero():
    s = integer_system()
    for T in (1, 2, 5):
        assert [theta(s, T, t) for t in range(0, 21)] == list(range(0, 21))


def test_theta_at_t0_is_zero_everywhere():
    for s in catalog_systems().values():
        if s.P is not None:
            assert theta(s, s.P, s.t0) == 0
            assert m_of(s, s.P, s.t0) == 0 and G_of(s, s.P, s.t0) == 0


def test_theta_g_branch_on_dyadic_scale():
    s = power_system(2.0)
    assert m_of(s, 4, 2) == 1
    assert G_of(s, 4, 2) == -2
    assert theta(s, 4, 2) == 2
    assert not in_P(s, 4, 2) and in_P(s, 4, 16)


@given(st.integers(0, 10), st.integers(1, 3))
def test_theta_matches_bruteforce_dyadic(kt, span):
    s = power_system(2.0)
    T = 2 ** span
    t = 2 ** kt
    m, G, th = theta_bruteforce(t, 1, T, lambda a, b: a * b, lambda a, b: b / a)
    assert (m_of(s, T, t), G_of(s, T, t), theta(s, T, t)) == (m, G, th)


@given(st.integers(0, 25), st.integers(1, 6), st.integers(-3, 5))
def test_theta_matches_bruteforce_integer(dt, span, t0):
    s = integer_system(t0=t0)
    T, t = t0 + span, t0 + dt
    plus = lambda a, b: b + (a - t0)  # noqa: E731
    minus = lambda a, b: b - (a - t0)  # noqa: E731
    m, G, th = theta_bruteforce(t, t0, T, plus, minus)
    assert (m_of(s, T, t), G_of(s, T, t), theta(s, T, t)) == (m, G, th)


@pytest.mark.parametrize("q", [2.0, 3.0])
def test_theta_additivity_anchor(q):
    s = geometric_system(q)
    one = theta(s, q, q)
    assert [theta(s, q, q ** k) for k in range(6)] == [k * one for k in range(6)]


def test_theta_rejects_points_before_t0():
    with pytest.raises(OutOfDomain):
        theta(power_system(2.0), 2, 0.5)


# R and e_R ----------------------------------------------------------------------------

def test_R_identity_monodromy_is_zero():
    s = geometric_system(2.0)
    assert np.array_equal(solve_R(np.eye(2), s, 2.0, 4.0), np.zeros((2, 2)))


@pytest.mark.parametrize("q", [2.0, 3.0])
def test_R_on_geometric_scale(q):
    s = geometric_system(q)
    M = np.array([[2.0, 1.0], [0.5, 3.0]])
    for k in range(0, 4):
        t = q ** k
        assert np.allclose(solve_R(M, s, q, t), (M - np.eye(2)) / ((q - 1) * t), rtol=1e-13)


def test_R_dyadic_example():
    s = power_system(2.0)
    for t in (1.0, 2.0, 4.0):
        assert np.array_equal(solve_R(2 * np.eye(2), s, 2.0, t), np.eye(2) / t)


def test_R_scalar_fractional_oracle():
    s = power_system(2.0)
    m = 5.0
    # window {1, 2} with T = 4: exponents 1/2 and 1/2
    assert solve_R(np.array([[m]]), s, 4.0, 1.0)[0, 0] == pytest.approx((m ** 0.5 - 1) / 1.0)
    assert solve_R(np.array([[m]]), s, 4.0, 2.0)[0, 0] == pytest.approx((m ** 0.5 - 1) / 2.0)


def test_exp_R_single_step_and_zero():
    s = power_system(2.0)
    M = np.array([[3.0, 1.0], [0.0, 2.0]])
    R = r_function(M, s, 4.0)
    first = exp_R(R, 2.0)
    assert np.allclose(first, scipy.linalg.fractional_matrix_power(M, theta(s, 4, 2) / 4), atol=1e-12)
    Z = MatrixFunction.constant(s, np.zeros((2, 2)))
    assert np.array_equal(exp_R(Z, 16.0), np.eye(2))


@settings(max_examples=25)
@given(st.integers(0, 2**31), st.sampled_from([1, 2, 3]), st.sampled_from([2.0, 4.0, 8.0]))
def test_exp_R_reproduces_monodromy_fractional(seed, n, T):
    # on {2^n} with T > 2 the exponents are fractional
    rng = np.random.default_rng(seed)
    V = rng.normal(size=(n, n)) + 2 * np.eye(n)
    M = V @ np.diag(rng.uniform(0.1, 5.0, n)) @ np.linalg.inv(V)
    s = power_system(2.0)
    R = r_function(M, s, T)
    assert np.max(np.abs(exp_R(R, T) - M)) <= 1e-10 * max(1.0, np.max(np.abs(M)))


# Floquet decomposition -------------------------------------------------------------------

def test_floquet_dyadic_example():
    fd = floquet_decompose(dyadic_A(), 2.0)
    assert np.array_equal(fd.M, 2 * np.eye(2))
    assert all(np.array_equal(L, np.eye(2)) for L in fd.L.values())
    assert max(fd.residuals().values()) == 0


def test_floquet_zero_A():
    A = MatrixFunction.constant(power_system(2.0), np.zeros((2, 2)))
    fd = floquet_decompose(A, 4.0)
    assert np.array_equal(fd.M, np.eye(2))
    assert all(np.array_equal(fd.R.at_index(k), np.zeros((2, 2))) for k in range(0, 4))
    assert all(np.array_equal(L, np.eye(2)) for L in fd.L.values())


@settings(max_examples=20)
@given(st.integers(0, 2**31), st.sampled_from([2.0, 8.0]))
def test_floquet_invariants_random(seed, T):
    rng = np.random.default_rng(seed)
    s = power_system(2.0)
    m = len(s.window(T))
    vals = [np.eye(2) * 0.3 + rng.uniform(-0.3, 0.3, size=(2, 2)) / t for t in s.window(T)]
    A = MatrixFunction.from_window(s, T, vals)
    M = transition_matrix(A, T)
    w = np.linalg.eigvals(M)
    if np.any((np.abs(w.imag) < 1e-9) & (w.real <= 0)):
        return
    fd = floquet_decompose(A, T)
    assert max(fd.residuals().values()) <= 1e-9
    assert m == len(fd.L)


def test_transition_shift_invariance():
    rng = np.random.default_rng(7)
    s = power_system(2.0)
    T = 4.0
    vals = [rng.uniform(-0.4, 0.4, size=(2, 2)) for _ in s.window(T)]
    A = MatrixFunction.from_window(s, T, vals)
    for t in (1.0, 2.0, 4.0, 8.0):
        assert np.allclose(transition_matrix(A, t * T, T), transition_matrix(A, t, 1.0), atol=1e-12)


def test_scalar_exponential_shift_invariance():
    s = geometric_system(3.0)
    A = MatrixFunction.from_window(s, 3.0, [np.array([[0.7]])])
    for k in range(0, 4):
        t = 3.0 ** k
        assert transition_matrix(A, 3 * t, 3.0)[0, 0] == pytest.approx(transition_matrix(A, t)[0, 0])


# eigenvalue-one criterion -------------------------------------------------------------------

def test_eigenvalue_one_examples():
    has, w = periodic_solution_exists_homogeneous(dyadic_A(), 2.0)
    assert not has and np.allclose(w, [2, 2])
    assert noncritical_check(dyadic_A(), 2.0)
    Z = MatrixFunction.constant(integer_system(), np.zeros((2, 2)))
    assert periodic_solution_exists_homogeneous(Z, 1.0)[0]
    assert not noncritical_check(Z, 1.0)
    alt = MatrixFunction.constant(integer_system(), np.array([[-2.0]]))
    assert periodic_solution_exists_homogeneous(alt, 2.0)[0]
    assert not noncritical_check(alt, 2.0)


def test_exactness_of_dyadic_products():
    # Fractions confirm the float product carries no rounding on the dyadic data
    prod = Fraction(1)
    for k in range(0, 5):
        t = Fraction(2) ** k
        prod *= 1 + t * (1 / t)
    assert transition_matrix(dyadic_A(), 32.0)[0, 0] == float(prod)
