import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpjacobi.errors import DomainError, RangeTooShort, SingularStep
from qpjacobi.lattice import ehm, explicit_model, free_laplacian, schrodinger_cos
from qpjacobi.spectral import (JL_HIGH, JL_LOW, M_identity, M_report, gamma_scan,
                               half_line_m, half_line_solution, jl_sandwich_check,
                               log_ell_norm, solution_pair, subordinacy_length, whole_line_M)

G = 0.6180339887498949


def upper(*cands):
    return max(cands, key=lambda x: x.imag)


def free_half_line_g(z):
    s = cmath.sqrt(z * z - 4)
    return upper((-z + s) / 2, (-z - s) / 2)


@pytest.mark.parametrize("z", [0.3 + 0.2j, -1.5 + 0.05j, 3 + 1j])
def test_free_half_line_m_closed_form(z):
    assert half_line_m(free_laplacian(), 0.0, z) == pytest.approx(free_half_line_g(z), abs=1e-7)


@pytest.mark.parametrize("z", [0.3 + 0.2j, 1.1 + 0.1j])
def test_free_whole_line_closed_form(z):
    s = cmath.sqrt(z * z - 4)
    g00 = upper(1 / s, -1 / s)
    assert whole_line_M(free_laplacian(), z) == pytest.approx(2 * g00, abs=1e-7)


@settings(max_examples=10, deadline=None)
@given(st.floats(-1.4, 1.4), st.floats(-2, 2), st.floats(0.05, 0.5))
def test_m_is_herglotz_and_identity_holds(phi, E, eta):
    model = ehm(0.2, 0.3, 0.2, G, 0.1)
    z = complex(E, eta)
    assert half_line_m(model, phi, z).imag > 0
    M = whole_line_M(model, z)
    assert abs(M_identity(model, z, phi) - M) <= 1e-6 * max(1, abs(M))


def test_m_report():
    rep = M_report(ehm(0.2, 0.3, 0.2, G, 0.1), 0.1 + 0.1j, n_phi=8)
    assert rep.dkl_pass and rep.identity_pass


def test_identity_uses_bond_weight():
    # small |w_0| (about 0.037 here) makes the weight factor visible
    model = ehm(0.2, 0.3, 0.2, G, 0.1)
    z = 0.5j
    assert abs(M_identity(model, z, 0.0) - whole_line_M(model, z)) < 1e-6


def test_solution_residual_and_normalization():
    u = half_line_solution(schrodinger_cos(1.5, G, 0.2), 0.7, 0.4, length=5000)
    assert u.residual() < 1e-12
    assert u.values[0] ** 2 + u.values[1] ** 2 == pytest.approx(1)


def test_log_ell_norm_interpolates():
    u = half_line_solution(free_laplacian(), 0.3, 0.2, length=50)
    vals = u.values
    direct = math.sqrt(sum(vals[1:8] ** 2) + 0.25 * vals[8] ** 2)
    assert math.exp(log_ell_norm(u, 7.25)) == pytest.approx(direct, rel=1e-12)
    with pytest.raises(RangeTooShort):
        log_ell_norm(u, 60)
    with pytest.raises(DomainError):
        log_ell_norm(u, 0.5)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.001, 0.1))
def test_subordinacy_length_solves_equation(eps):
    u, v = solution_pair(ehm(0.2, 0.3, 0.2, G, 0.1), 0.2, 0.3, length=4000)
    ell = subordinacy_length(u, v, eps, scale=float(u.weights[0]))
    if ell == 1.0:
        # the product already exceeds the target at the first site
        assert log_ell_norm(u, 1) + log_ell_norm(v, 1) >= math.log(u.weights[0] / (2 * eps))
        return
    lhs = log_ell_norm(u, ell) + log_ell_norm(v, ell)
    assert lhs == pytest.approx(math.log(u.weights[0] / (2 * eps)), abs=1e-8)


def test_jl_constants():
    assert JL_LOW * JL_HIGH == pytest.approx(1)


@pytest.mark.parametrize("model", [free_laplacian(), schrodinger_cos(0.5, G, 0.2),
                                   ehm(0.2, 0.3, 0.2, G, 0.1)])
def test_jl_sandwich(model):
    rows = jl_sandwich_check(model, 0.1, 0.01, [0.0, 0.7, -1.1])
    assert all(r.passed for r in rows)


def test_zero_weight_truncates_solution():
    w = np.ones(40)
    w[10] = 0
    u = half_line_solution(explicit_model(w, np.zeros(40)), 0.1, 0.0, length=30)
    assert u.truncated_at == 10
    w[0] = 0
    with pytest.raises(SingularStep):
        half_line_solution(explicit_model(w, np.zeros(40)), 0.1, 0.0, length=30)


def test_gamma_scan_free_band():
    # inside the free band |M| stays bounded, so gamma = 1 is continuity-consistent
    rows, brackets = gamma_scan(free_laplacian(), [0.5], [0.0, 0.9], np.logspace(-1, -4, 7))
    assert [r.verdict for r in rows] == ["continuity-consistent"] * 2
    assert brackets[0.5][0] == 0.9


def test_gamma_scan_point_mass_is_singular():
    # a single eigenvalue: M ~ 1/(E - z), so eps^{1-gamma}|M| ~ eps^{-gamma} blows up
    rows, _ = gamma_scan(lambda E, e: 1 / (0.0 - complex(E, e)), [0.0], [0.5],
                         np.logspace(-1, -4, 7))
    assert rows[0].verdict == "singularity-consistent"


def test_gamma_scan_grid_too_short():
    with pytest.raises(DomainError):
        gamma_scan(free_laplacian(), [0.5], [1.0], [0.1, 0.01])
