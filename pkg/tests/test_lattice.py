import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpjacobi.errors import DomainError, Unclassifiable, WindowTooLarge
from qpjacobi.lattice import (TrigPolynomial, box_matrix, constant, cosine, ehm,
                              ehm_classify, ehm_lyapunov_formula, explicit_model,
                              finite_box_spectrum, free_laplacian, read_coefficients,
                              sample_window, schrodinger_cos, trig_model)

coef = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


@given(st.dictionaries(st.integers(-4, 4), coef, min_size=1, max_size=5),
       st.floats(0, 1))
def test_trig_polynomial_matches_direct_sum(coeffs, theta):
    f = TrigPolynomial(coeffs)
    direct = sum(c * complex(math.cos(2 * math.pi * k * theta), math.sin(2 * math.pi * k * theta))
                 for k, c in coeffs.items())
    assert abs(complex(f(np.array([theta]))[0]) - direct) < 1e-12 * (1 + f.sup_bound())
    assert abs(direct) <= f.sup_bound() + 1e-12


@given(st.dictionaries(st.integers(-3, 3), coef, min_size=1, max_size=4))
def test_jensen_mean_log_against_quadrature(coeffs):
    f = TrigPolynomial({k: c for k, c in coeffs.items() if abs(c) > 1e-3})
    if f.sup_bound() < 1e-3:
        return
    # zeros near the circle make the trapezoid rule slow; skip those draws
    if any(abs(abs(z) - 1) < 0.05 for z in f.roots()):
        return
    th = (np.arange(4096) + 0.5) / 4096
    quad = float(np.mean(np.log(np.abs(f(th)))))
    assert abs(quad - f.mean_log_abs()) < 1e-8


def test_cosine_and_constant():
    th = np.linspace(0, 1, 7)
    assert np.allclose(cosine(1.5)(th), 3 * np.cos(2 * np.pi * th))
    assert np.allclose(constant(2.0)(th), 2.0)


def test_ehm_zeros_on_critical_line():
    # l1 = l3 with l1 + l3 >= l2 gives zeros of c on the circle
    c = ehm(0.5, 0.5, 0.5, 0.3).c
    assert len(c.zeros()) == 2
    assert not ehm(0.1, 0.5, 0.1, 0.3).c_has_zeros()


def test_sampling_window():
    m = schrodinger_cos(2.0, 0.3, 0.1)
    win = sample_window(m, -3, 5)
    assert win.hi == 5 and len(win.w) == 9
    assert np.allclose(win.v, 4 * np.cos(2 * np.pi * (0.1 + 0.3 * np.arange(-3, 6))))
    with pytest.raises(WindowTooLarge):
        m.sample(0, 100, cap=10)


def test_explicit_model_bounds():
    m = explicit_model([1, 2, 3], [0, 0, 0], offset=5)
    w, _ = m.sample(6, 8)
    assert list(w) == [2, 3]
    with pytest.raises(DomainError):
        m.sample(0, 3)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_box_spectrum_matches_dense_hermitian(l1, l2, l3, theta):
    if l1 + l2 + l3 == 0:
        return
    m = ehm(l1, l2, l3, 0.618, theta)
    ev = finite_box_spectrum(m, 20)
    dense = np.linalg.eigvalsh(box_matrix(m, 20))
    assert np.allclose(ev, dense, atol=1e-10)
    assert np.max(np.abs(ev)) <= m.norm_bound() + 1e-12


def test_free_spectrum_in_band():
    ev = finite_box_spectrum(free_laplacian(), 50)
    assert ev.min() > -2 and ev.max() < 2
    k = np.arange(1, 102)
    assert np.allclose(np.sort(ev), np.sort(2 * np.cos(np.pi * k / 102)))


@pytest.mark.parametrize("lam,r,geo", [
    ((0.2, 0.3, 0.2), "R1", "I°"),
    ((0, 2, 0), "R2", "II°"),
    ((1, 0.5, 1), "R3", "III°"),
    ((0.5, 1, 0.3), "R3", "L_II"),
    ((1, 2, 1), "R3", "L_III"),
    ((1.5, 2, 0.5), "R2", "L_III"),
])
def test_ehm_classify(lam, r, geo):
    reg = ehm_classify(lam)
    assert reg.r_label == r
    assert reg.geo_label == geo


def test_ehm_classify_degenerate():
    with pytest.raises(Unclassifiable):
        ehm_classify((0, 0, 0))
    with pytest.raises(DomainError):
        ehm_classify((-1, 0.5, 0))


def test_ehm_lyapunov_closed_forms():
    assert ehm_lyapunov_formula((0, 0.5, 0)) == pytest.approx(math.log(2))
    assert ehm_lyapunov_formula((0.2, 0.3, 0.2)) == pytest.approx(
        math.log((1 + math.sqrt(0.84)) / 0.4))
    assert ehm_lyapunov_formula((0, 2, 0)) == 0.0


def test_read_coefficients(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# header\n0 1 0\n1 0.5 0.25\n1 0.5 0\n")
    assert read_coefficients(p) == {0: 1 + 0j, 1: 1 + 0.25j}
    p.write_text("0 1\n")
    with pytest.raises(DomainError):
        read_coefficients(p)


def test_trig_model_describe():
    m = trig_model({0: 1, 1: 0.1}, {1: 0.05, -1: 0.05}, 0.3, 0.2)
    d = m.describe()
    assert d["alpha"] == 0.3 and d["c"]["kind"] == "trig-polynomial"
