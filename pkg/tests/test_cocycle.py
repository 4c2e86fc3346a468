import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpjacobi.cocycle import (ScaledMatrix2x2, diagonalize, hyperbolic_power_growth,
                              lyapunov_birkhoff, measure_lambda, power_coefficients, product,
                              random_phases, regularity_bounds_check, regularize_product,
                              trace_D, trace_classify, trace_polynomial)
from qpjacobi.errors import DegenerateDiagonalization, DomainError, SingularStep
from qpjacobi.lattice import ehm, explicit_model, free_laplacian, trig_model

lam = st.floats(0.05, 1.0)
unit = st.floats(0, 1)


def naive_A(model, E, n, m):
    """Plain numpy product of the step matrices A_j = D_j / w_j."""
    w, v = model.sample(m - 1, m + n)
    P = np.eye(2, dtype=complex)
    for k in range(1, n + 1):
        D = np.array([[E - v[k], -np.conj(w[k - 1])], [w[k], 0]])
        P = (D / w[k]) @ P
    return P


@settings(max_examples=40, deadline=None)
@given(lam, lam, lam, unit, st.floats(-3, 3), st.integers(1, 40), st.integers(-20, 20))
def test_product_matches_naive(l1, l2, l3, theta, E, n, m):
    model = ehm(l1, l2, l3, 0.618, theta)
    w, _ = model.sample(m - 1, m + n)
    if np.min(np.abs(w)) < 1e-3:
        return
    A = product(model, E, n, m, "A").array()
    ref = naive_A(model, E, n, m)
    assert np.linalg.norm(A - ref) <= 1e-9 * np.linalg.norm(ref)


@settings(max_examples=40, deadline=None)
@given(lam, lam, lam, unit, st.floats(-3, 3), st.integers(1, 3000), st.integers(-500, 500))
def test_regularized_product_is_unimodular_and_real(l1, l2, l3, theta, E, n, m):
    model = ehm(l1, l2, l3, 0.618, theta)
    if model.c_has_zeros():
        return
    At = product(model, E, n, m, "At")
    assert abs(At.det() - 1) < 1e-10
    assert np.max(np.abs(At.entries.imag)) == 0


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.45), st.floats(0.05, 0.9), unit, st.floats(-3, 3),
       st.integers(10, 2000), st.integers(-100, 100))
def test_conjugacy_residual(l1, l2, theta, E, n, m):
    # l1 = l3 < l2/2 keeps c zero-free
    model = ehm(l1, l2, l1 * 0.9, 0.618, theta)
    reg = regularize_product(model, E, n, m)
    assert reg.residual <= 1e-8


def test_negative_index_inverts():
    model = ehm(0.2, 0.3, 0.2, 0.618, 0.1)
    A = product(model, 0.3, -5, 1, "A")
    B = product(model, 0.3, 5, -4, "A")
    assert np.allclose((A @ B).array(), np.eye(2), atol=1e-10)
    assert np.allclose(product(model, 0.3, 0, 3).array(), np.eye(2))


def test_scaled_matrix_survives_long_products():
    # hyperbolic free Laplacian at E = 3: ||A(n)|| ~ rho^n with no overflow
    model = free_laplacian()
    rho = (3 + math.sqrt(5)) / 2
    A = product(model, 3.0, 100_000, 0)
    assert A.log_norm() / 100_000 == pytest.approx(math.log(rho), rel=1e-4)
    assert abs(A.det() - 1) < 1e-10


def test_free_lyapunov_closed_form():
    model = free_laplacian()
    for E in (2.5, 4.0):
        est = lyapunov_birkhoff(model, E, 5000, random_phases(4, 1))
        assert est.mean == pytest.approx(math.acosh(E / 2), abs=1e-3)
    est = lyapunov_birkhoff(model, 0.5, 5000, random_phases(4, 1))
    assert est.mean < 1e-3


def test_lyapunov_argument_checks():
    with pytest.raises(DomainError):
        lyapunov_birkhoff(free_laplacian(), 0, 10, [0, 0.1, 0.2, 0.3])
    with pytest.raises(DomainError):
        lyapunov_birkhoff(free_laplacian(), 0, 2000, [0.1])


def test_dw_route_agrees_with_A_route():
    model = ehm(0.2, 0.3, 0.2, 0.618)
    th = random_phases(4, 2)
    a = lyapunov_birkhoff(model, 0.27, 4000, th, method="A").mean
    b = lyapunov_birkhoff(model, 0.27, 4000, th, method="Dw").mean
    assert a == pytest.approx(b, abs=1e-10)


def test_singular_step_raised():
    model = explicit_model([1, 0, 1, 1], [0, 0, 0, 0])
    with pytest.raises(SingularStep):
        product(model, 0.0, 2, 1, "A")


def test_scalar_products():
    model = ehm(0.2, 0.3, 0.2, 0.618, 0.4)
    w, _ = model.sample(3, 13)
    s = product(model, 0, 10, 3, "w")
    assert s.value() == pytest.approx(np.prod(w), rel=1e-10)


@settings(max_examples=30)
@given(st.floats(-8, 8), st.integers(1, 25))
def test_power_coefficients_against_explicit_powers(t, k):
    if abs(abs(t) - 2) < 1e-6:
        return
    G = np.array([[t, -1.0], [1.0, 0.0]])
    s, c = power_coefficients(t, k)
    X = s * (G - t / 2 * np.eye(2)) + c * np.eye(2)
    P = np.linalg.matrix_power(G, k)
    assert np.allclose(X, P, rtol=1e-8, atol=1e-8 * max(1, np.abs(P).max()))


def test_diagonalize_and_power_growth():
    G = np.array([[3.0, 1.0], [2.0, 1.0]])
    rho, B = diagonalize(G)
    assert np.allclose(B @ np.diag([rho, 1 / rho]) @ np.linalg.inv(B), G)
    out = hyperbolic_power_growth(G, 20)
    assert out["kind"] == "hyperbolic" and out["B_pass"]
    assert out["expansion_residual"] < 1e-10
    with pytest.raises(DegenerateDiagonalization):
        diagonalize(np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert hyperbolic_power_growth(np.array([[1.0, 1.0], [0.0, 1.0]]), 10)["kind"] == "parabolic"


def test_measure_lambda_components():
    model = trig_model({0: 1, 1: 0.1}, {1: 0.05, -1: 0.05}, 0.618, 0.2)
    lamb = measure_lambda(model, 13, 200, E=0.0)
    assert lamb["Lambda"] == max(lamb["lower"], lamb["growth_q"], lamb["growth_r"])
    assert lamb["lower"] >= 0


def test_regularity_check_on_periodic_model_is_tight():
    # rational alpha with q the period: every difference vanishes
    model = ehm(0.2, 0.3, 0.2, 2 / 5, 0.1)
    out = regularity_bounds_check(model, 5, 50, 1.0, 0.0)
    assert out["pass"]
    assert all(c.observed < 1e-8 for c in out["checks"])


def test_trace_classify_free():
    rows = trace_classify(free_laplacian(), 4, [0.5, 3.0], 0.1)
    assert rows[0].label == "elliptic-strict"
    assert rows[1].label == "S1"


@pytest.mark.parametrize("q", [3, 8])
def test_trace_polynomial_reproduces_direct(q):
    model = ehm(0.2, 0.3, 0.2, 0.618, 0.3)
    p = trace_polynomial(model, q)
    E = np.linspace(-1.9, 1.9, 17)
    d = trace_D(model, q, E)
    assert np.max(np.abs(p(E) - d) / np.abs(d)) < 1e-10


def test_trace_polynomial_degree_is_exact():
    # an interpolant of lower degree cannot reproduce Tr D(q)
    model = ehm(0.2, 0.3, 0.2, 0.618, 0.3)
    q = 6
    E = np.linspace(-1.7, 1.7, 9)
    d = trace_D(model, q, E)
    coarse = np.polynomial.Chebyshev.fit(E, d.real, q - 1)
    fine = np.polynomial.Chebyshev.fit(E, d.real, q)
    x = np.linspace(-1.5, 1.5, 13)
    assert np.max(np.abs(fine(x) - trace_D(model, q, x).real)) < 1e-9
    assert np.max(np.abs(coarse(x) - trace_D(model, q, x).real)) > 1e-6
