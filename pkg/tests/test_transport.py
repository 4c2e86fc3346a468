import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from qpjacobi.errors import DomainError, GridTooCoarse, LeakageExceeded, RangeTooShort
from qpjacobi.lattice import box_matrix, ehm, explicit_model, free_laplacian
from qpjacobi.transport import (Box, MomentSeries, Propagator, auto_box, chebyshev_terms,
                                evolve, moments, run_transport, transport_exponents)

G = 0.6180339887498949


@settings(max_examples=10, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0.1, 3))
def test_propagator_matches_dense_expm(l1, l2, l3, tau):
    if l1 + l2 + l3 == 0:
        return
    model = ehm(l1, l2, l3, G, 0.2)
    L = 15
    box = Box(model, L)
    psi = np.zeros(2 * L + 1, dtype=complex)
    psi[L] = 1
    psi[L + 3] = 0.5j
    out = Propagator(box, tau).step(psi)
    ref = expm(-1j * tau * box_matrix(model, L)) @ psi
    assert np.max(np.abs(out - ref)) < 1e-9


def test_box_apply_matches_dense():
    model = ehm(0.2, 0.3, 0.2, G, 0.1)
    box = Box(model, 10)
    x = np.random.default_rng(0).normal(size=21) + 0j
    assert np.allclose(box.apply(x), box_matrix(model, 10) @ x)
    assert np.allclose(box.apply(x[3:9], 3), (box_matrix(model, 10)[3:9, 3:9] @ x[3:9]))


def test_chebyshev_term_count_certified():
    from scipy.special import jv
    for z in (0.5, 3.0, 20.0):
        K = chebyshev_terms(z)
        tail = 2 * sum(abs(jv(k, z)) for k in range(K, K + 60))
        assert tail <= 1e-10


def test_free_profile_is_bessel():
    # psi_n(t) = (-i)^n J_n(2t) on the free line
    from scipy.special import jv
    t = np.linspace(0, 10, 101)
    snaps = evolve(free_laplacian(), 60, t, keep=True)
    n = np.arange(-60, 61)
    # 100 steps, each truncated at 1e-10
    assert np.max(np.abs(snaps.prob[-1] - jv(n, 20.0) ** 2)) < 1e-9
    # sum n^2 J_n(2t)^2 = 2 t^2
    assert np.allclose(snaps.sums[2.0], 2 * t ** 2, atol=1e-8)
    assert snaps.max_norm_error < 1e-9
    assert snaps.energy_drift < 1e-8


def test_single_site_phase():
    model = explicit_model([0.0], [2.0])
    snaps = evolve(model, 0, np.linspace(0, 1, 5))
    assert snaps.psi_last[0] == pytest.approx(np.exp(-2j))
    assert np.all(snaps.sums[2.0] == 0)


def test_leakage_raises_with_snapshots():
    with pytest.raises(LeakageExceeded) as e:
        evolve(free_laplacian(), 20, np.linspace(0, 30, 301))
    assert e.value.snapshots.truncated


def test_grid_must_be_uniform():
    with pytest.raises(DomainError):
        evolve(free_laplacian(), 10, [0, 0.1, 0.3])


def test_abel_average_free_closed_form():
    # <X^2>(T) = (2/T) int e^{-2t/T} 2 t^2 dt = T^2; the 6T cut leaves a tail the estimate covers
    T = np.array([4.0, 8.0])
    t = np.arange(0, 6 * 8 + 1, 0.05)
    snaps = evolve(free_laplacian(), auto_box(free_laplacian(), t[-1]), t)
    ms = moments(snaps, 2.0, T)
    gap = T ** 2 - ms.values
    assert np.all(gap > 0)
    assert np.allclose(gap, ms.tail_estimate, rtol=0.05)
    assert np.all(ms.quad_error < 1e-3 * T ** 2)


def test_moments_grid_checks():
    t = np.arange(0, 30, 1.0)
    snaps = evolve(free_laplacian(), 200, t)
    with pytest.raises(GridTooCoarse):
        moments(snaps, 2.0, [4.0])
    with pytest.raises(GridTooCoarse):
        moments(snaps, 2.0, [20.0])


def series(T, y, p=2.0):
    z = np.zeros_like(T)
    return MomentSeries(p, T, y, z, z, 0, 0.0)


@given(st.floats(0.05, 1.5))
def test_exponent_fit_recovers_power_law(beta):
    T = np.logspace(1, 3, 25)
    fit = transport_exponents(series(T, 3.0 * T ** (2 * beta)))
    assert fit.beta_minus == pytest.approx(beta, abs=1e-9)
    assert fit.beta_plus == pytest.approx(beta, abs=1e-9)


def test_exponent_fit_range_and_degenerate():
    T = np.logspace(1, 2, 10)
    with pytest.raises(RangeTooShort):
        transport_exponents(series(T, T))
    T = np.logspace(1, 3, 10)
    assert transport_exponents(series(T, np.zeros(10))).degenerate


def test_auto_box_scales_with_hopping():
    assert auto_box(free_laplacian(), 10) == 41
    assert auto_box(ehm(1, 1, 1, G), 10) == 121


def test_run_transport_localized_short():
    # c = 1/3 is almost Mathieu at coupling 3: localized, nearly no spreading
    run = run_transport(ehm(0, 1 / 3, 0, G, 0.3), T_lo=10, T_hi=10 ** 2.5, dt=0.5)
    assert run.fit.beta_plus < 0.2
    assert run.snaps.max_norm_error < 1e-9


def test_run_transport_subcritical_spreads():
    # c = 3 is almost Mathieu at coupling 1/3: absolutely continuous, ballistic
    run = run_transport(ehm(0, 3.0, 0, G, 0.3), T_lo=10, T_hi=10 ** 2.5, dt=0.5)
    assert run.fit.beta_minus > 0.9
    assert run.snaps.max_norm_error < 1e-9
