import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from qpjacobi.errors import DomainError, Overflow
from qpjacobi.numberkit import (ConstantRule, ExpRule, SequenceRule, alpha_from_quotients,
                                beta_estimate, cf_expand, golden, parse_rule,
                                rotation_distance, sqrt2m1)


def fib(n):
    a, b = 1, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def test_golden_quotients_are_ones():
    cf = cf_expand(golden(), 40)
    assert set(cf.quotients) == {1}
    assert cf.denominators[:8] == [1, 1, 2, 3, 5, 8, 13, 21]


def test_sqrt2m1_quotients_are_twos():
    cf = cf_expand(sqrt2m1(), 30)
    assert set(cf.quotients) == {2}
    assert cf.denominators[:5] == [1, 2, 5, 12, 29]


def test_rational_input_terminates():
    cf = cf_expand(Fraction(13, 21), 50, strict=False)
    assert cf.rational
    assert cf.convergents[-1] == (13, 21)


@given(st.lists(st.integers(1, 50), min_size=1, max_size=12))
def test_convergent_recurrence_matches_fraction_oracle(qs):
    # the continued fraction [0; a1, ..., aN] evaluated with exact Fractions
    x = Fraction(0)
    for a in reversed(qs):
        x = 1 / (a + x)
    cf, value = alpha_from_quotients(SequenceRule(qs), len(qs))
    p, q = cf.convergents[-1]
    assert Fraction(p, q) == x
    assert math.gcd(p, q) == 1


@given(st.lists(st.integers(1, 30), min_size=2, max_size=10))
def test_convergent_determinant_identity(qs):
    cf, _ = alpha_from_quotients(SequenceRule(qs), len(qs))
    c = cf.convergents
    for (p0, q0), (p1, q1) in zip(c, c[1:]):
        assert abs(p1 * q0 - p0 * q1) == 1


@given(st.integers(1, 10 ** 6), st.fractions(min_value=0, max_value=1))
def test_rotation_distance_exact_for_fractions(k, a):
    d = rotation_distance(k, a)
    x = k * a
    assert d == min(x - math.floor(x), math.ceil(x) - x)
    assert 0 <= d <= Fraction(1, 2)


def test_rotation_distance_rejects_zero():
    with pytest.raises(DomainError):
        rotation_distance(0, 0.3)


def test_best_approximation_at_fibonacci():
    g = golden()
    for n in range(5, 20):
        q = fib(n)
        # ||q alpha|| ~ 1/(sqrt5 q) for golden denominators
        d = float(rotation_distance(q, g))
        assert abs(d * q * math.sqrt(5) - 1) < 2.0 / q ** 2


def test_golden_beta_is_small():
    est = beta_estimate(cf_expand(golden(), 30))
    assert est.verdict_at_depth <= 0.1
    assert est.running_sup_tail == tuple(sorted(est.running_sup_tail, reverse=True))


def test_exp_rule_beta_near_rate():
    cf, _ = alpha_from_quotients(ExpRule(1.0), 6, log_domain=True)
    est = beta_estimate(cf)
    assert 0.9 <= est.verdict_at_depth <= 1.1
    assert len(est.levels) == 6
    with pytest.raises(Overflow):
        alpha_from_quotients(ExpRule(1.0), 7, log_domain=True)


def test_exp_rule_overflow_without_log_domain():
    with pytest.raises(Overflow):
        alpha_from_quotients(ExpRule(1.0), 8)


def test_parse_rule():
    assert isinstance(parse_rule("const:3"), ConstantRule)
    assert isinstance(parse_rule("seq:1,2"), SequenceRule)
    assert isinstance(parse_rule("exp:0.5"), ExpRule)
    with pytest.raises(DomainError):
        parse_rule("bogus:1")


def test_beta_undefined_for_rationals():
    with pytest.raises(DomainError):
        beta_estimate(cf_expand(Fraction(3, 7), 10, strict=False))


@settings(max_examples=30)
@given(st.integers(1, 6))
def test_constant_rule_value_is_quadratic_irrational(a):
    # [0; a, a, ...] = (sqrt(a^2 + 4) - a) / 2
    cf, value = alpha_from_quotients(ConstantRule(a), 40)
    with mpmath.workdps(200):
        exact = (mpmath.sqrt(a * a + 4) - a) / 2
        q = cf.denominators[-1]
        assert abs(value - exact) < mpmath.mpf(1) / q ** 2
