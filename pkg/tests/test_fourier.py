import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpjacobi.cocycle import product
from qpjacobi.errors import (BudgetExceeded, DegenerateZeros, DomainError, EmptyLevelSet,
                             NonAnalyticInput)
from qpjacobi.fourier import (_longest_run, decompose_F, degree_factor, find_large_norm_interval,
                              localization_density, log_f_on, log_g_on, measure_C1,
                              prefix_log_hs, structural_degree, sublevel_measure_bound,
                              sum_norm_growth)
from qpjacobi.lattice import ehm, explicit_model, free_laplacian

G = 0.6180339887498949
EHM = ehm(0.2, 0.3, 0.2, G, 0.123)
E0 = 0.2719


@pytest.fixture(scope="module")
def dec():
    return decompose_F(EHM, E0, 30)


def test_decomposition_consistency(dec):
    assert dec.grid >= 8 * dec.d * dec.n
    assert dec.d >= 2
    assert dec.parseval_error() < 1e-10
    assert dec.split_error() < 1e-10
    assert dec.product_error() < 1e-8
    assert dec.decay_margin() > 0
    assert dec.log_max_R() < 0


def test_coefficients_against_direct_quadrature(dec):
    # an independent grid of a different size gives the same low modes
    N = 3001
    th = np.arange(N) / N
    f = np.exp(log_f_on(EHM, E0, dec.n, th, 0.0, dec.b_rescale) - dec.scale)
    for k in (0, 1, 2, 5, -3):
        direct = np.mean(f * np.exp(-2j * np.pi * k * th))
        assert abs(dec.coeffs[k] - direct) < 1e-12


def test_P_at_matches_grid(dec):
    i = [0, 17, 400]
    assert np.allclose(dec.P_at(dec.theta[i]), dec.P[i], atol=1e-12)


def test_f_is_hs_norm_of_D_product():
    th = np.array([0.123, 0.4])
    lf = log_f_on(EHM, E0, 12, th, 0.0, 0.0)
    for t, val in zip(th, lf):
        D = product(EHM.with_theta(t), E0, 12, 0, "D")
        assert val == pytest.approx(2 * D.log_hs(), abs=1e-9)


def test_g_is_product_of_c():
    th = np.array([0.3])
    lg = log_g_on(EHM, 12, th, 0.0)
    w, _ = EHM.with_theta(0.3).sample(0, 12)
    assert lg[0] == pytest.approx(2 * np.sum(np.log(np.abs(w))), abs=1e-9)


def test_structural_degree_and_factor():
    assert structural_degree(EHM, 10) == 20
    assert degree_factor(0.0, 1.0) == 2
    assert degree_factor(10.0, 1.0) == int(10 / math.pi) + 2


def test_strip_constant_monotone():
    s = measure_C1(EHM, E0, 50)
    assert s.at(50) >= s.direct
    assert 0 < s.rho <= 1


def test_input_checks():
    with pytest.raises(NonAnalyticInput):
        decompose_F(explicit_model(np.ones(5), np.zeros(5)), 0.0, 2)
    with pytest.raises(BudgetExceeded):
        decompose_F(EHM, E0, 2001)
    with pytest.raises(DomainError):
        decompose_F(EHM, E0, 0)


def test_longest_run_wraps():
    m = np.array([1, 1, 0, 0, 1, 0, 1, 1, 1], dtype=bool)
    assert _longest_run(m) == (6, 5)
    assert _longest_run(np.ones(4, dtype=bool)) == (0, 4)


def test_interval_found_region_one():
    dec = decompose_F(EHM, E0, 60)
    iv = find_large_norm_interval(dec, 1.0)
    assert iv.chain and iv.passed
    assert iv.length >= iv.required


def test_empty_level_set_region_two():
    # supercritical potential: no growth of f_n beyond e^{na/3} for a = 0.5
    model = ehm(0.0, 2.0, 0.0, G, 0.123)
    with pytest.raises(EmptyLevelSet):
        find_large_norm_interval(decompose_F(model, 0.1, 20), 0.5)


def test_prefix_matches_products():
    logs = prefix_log_hs(EHM, E0, 50)
    for k in (1, 10, 50):
        assert logs[k - 1] == pytest.approx(product(EHM, E0, k, 0).log_hs(), abs=1e-10)


def test_density_small_instance():
    cert = localization_density(EHM, E0, 13, 1.0, M=4)
    assert len(cert.j) == 4
    for m, j in enumerate(cert.j):
        assert max(2 * m * 13, 1) <= j < (2 * m + 2) * 13
    assert all(v > cert.threshold for v in cert.log_norms)


def test_growth_sum_free():
    # ||A(k)||_HS^2 grows like k^2 at E = 0 on the free line, so the sum ~ ell^3
    gs = sum_norm_growth(free_laplacian(), 0.0, 2000)
    assert gs.log_sum == pytest.approx(gs.log_sum_reversed)
    assert 0.9 < gs.exponent_fit < 1.6
    with pytest.raises(DomainError):
        sum_norm_growth(free_laplacian(), 0.0, 1)


def dense_measure(p, a, b):
    """|{a < p < b}| from the real eigenvalue roots of p - a and p - b."""
    pts = []
    for lev in (a, b):
        q = np.array(p, dtype=float)
        q[-1] -= lev
        r = np.roots(q)
        pts += [x.real for x in r if abs(x.imag) < 1e-7]
    pts = sorted(pts)
    tot = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        y = np.polyval(p, 0.5 * (lo + hi))
        if a < y < b:
            tot += hi - lo
    return tot


def test_sublevel_quadratic_closed_form():
    rep = sublevel_measure_bound([1, 0, -1], 0.0, 0.5)
    assert rep.measure == pytest.approx(2 * (math.sqrt(1.5) - 1), abs=1e-12)
    assert rep.holds


def test_sublevel_linear_is_vacuous():
    rep = sublevel_measure_bound([2, 1], 0.0, 1.0)
    assert rep.vacuous and rep.measure == pytest.approx(0.5)


def test_sublevel_rejects_degenerate():
    with pytest.raises(DegenerateZeros):
        sublevel_measure_bound([1, 0, 1], 0.0, 1.0)
    with pytest.raises(DegenerateZeros):
        sublevel_measure_bound([1, -2, 1], 0.0, 1.0)
    with pytest.raises(DomainError):
        sublevel_measure_bound([1, 0, -1], 1.0, 0.5)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=2, max_size=4, unique=True),
       st.floats(0.01, 3), st.floats(0, 2), st.floats(0.01, 2))
def test_sublevel_bound_holds(roots, lead, a, width):
    roots = sorted(roots)
    if min(np.diff(roots)) < 1e-2:
        return
    p = lead * np.poly(roots)
    rep = sublevel_measure_bound(p, a, a + width)
    assert rep.holds
    assert rep.measure == pytest.approx(dense_measure(p, a, a + width), abs=1e-6)
