from decimal import Decimal
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from renormcf import (
    BigScalar,
    DomainError,
    InsufficientPrecision,
    get_precision,
    hull,
    log_gamma,
    promotion_threshold,
    stirling_parts,
    working_precision,
)

from conftest import agrees, mp_fraction

fractions = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**6)
positive = st.fractions(min_value=Fraction(1, 10**6), max_value=10**6, max_denominator=10**6)


def widened(q: Fraction) -> BigScalar:
    """A genuine (non-exact) enclosure of ``q``."""
    eps = Fraction(1, 10**30)
    return BigScalar.interval(q - eps, q + eps)


@given(fractions, fractions)
def test_exact_arithmetic_is_exact(a, b):
    x, y = BigScalar(a), BigScalar(b)
    assert (x + y).exact_value == a + b
    assert (x - y).exact_value == a - b
    assert (x * y).exact_value == a * b
    if b:
        assert (x / y).exact_value == a / b


@given(fractions, fractions)
def test_interval_arithmetic_encloses(a, b):
    x, y = widened(a), widened(b)
    assert (x + y).contains(BigScalar(a + b))
    assert (x - y).contains(BigScalar(a - b))
    assert (x * y).contains(BigScalar(a * b))
    if abs(b) > Fraction(1, 1000):
        assert (x / y).contains(BigScalar(a / b))


@settings(max_examples=50)
@given(positive)
def test_log_exp_sqrt_enclose_mpmath(a):
    x = widened(a)
    with mpmath.workprec(400):
        assert agrees(x.log(), mpmath.log(mpmath.mpf(a.numerator) / a.denominator), Fraction(1, 10**40))
        assert agrees(x.sqrt(), mpmath.sqrt(mpmath.mpf(a.numerator) / a.denominator), Fraction(1, 10**40))
    small = BigScalar(a / 10**5)
    with mpmath.workprec(400):
        assert agrees(small.exp(), mpmath.exp(mpmath.mpf(a.numerator) / a.denominator / 10**5), Fraction(1, 10**40))


def test_promotion_threshold_default_and_override():
    big = BigScalar(2) ** 70000
    assert not big.is_exact
    assert BigScalar(2) ** 60000 == BigScalar(2 ** 60000)
    with promotion_threshold(1 << 17):
        assert (BigScalar(2) ** 70000).is_exact


def test_pow2_log_is_exponent_times_log2():
    e = 2 ** 200
    v = BigScalar.pow2(e)
    assert v.kind == "log"
    with mpmath.workprec(600):
        assert agrees(v.log(), mpmath.mpf(e) * mpmath.ln2, Fraction(1, 10**60))


def test_nested_log_values_order_and_multiply():
    a = BigScalar.pow2(2 ** 512)  # 2^(2^512)
    b = BigScalar.pow2(2 ** 512 + 1)
    assert a.certainly_lt(b)
    assert (a * a).overlaps(b * BigScalar.pow2(2 ** 512 - 1))
    assert (a / b).overlaps(BigScalar(Fraction(1, 2)))
    assert a.reciprocal().certainly_gt(0)


def test_log_space_cancellation_is_reported():
    a = BigScalar.pow2(2 ** 400)
    with pytest.raises(InsufficientPrecision):
        (a + 1) - a
    # sums dominated by one side, or of like signs, stay resolvable
    assert (a + 1).overlaps(a)
    assert (a + a).overlaps(2 * a)
    assert (a + BigScalar.pow2(2 ** 400 - 1)).certainly_gt(a)


def test_hull_and_comparisons():
    h = hull(BigScalar(1), BigScalar(3), BigScalar(Fraction(5, 2)))
    assert h.lower().certainly_ge(1) and h.lower().certainly_le(1)
    assert h.upper().certainly_ge(3) and h.upper().certainly_le(3)
    assert h.contains(BigScalar(2)) and not h.contains(BigScalar(4))
    x = BigScalar.interval(61, Fraction(6100001, 100000))
    assert x.certainly_ge(61) and not x.certainly_gt(61)
    assert x.certainly_le(62) and x.certainly_lt(62)
    assert x.overlaps(BigScalar(61)) and not x.overlaps(BigScalar(60))
    with pytest.raises(InsufficientPrecision):
        x.compare(BigScalar(Fraction(610000005, 10000000)))


@given(fractions)
def test_bounds_str_is_outward(a):
    x = widened(a)
    lo, hi = x.bounds_str(12)
    assert Decimal(lo) <= Decimal(a.numerator) / Decimal(a.denominator) <= Decimal(hi)
    lo, hi = BigScalar(a).bounds_str(12)
    assert Decimal(lo) <= Decimal(a.numerator) / Decimal(a.denominator) <= Decimal(hi)


def test_bounds_str_nested():
    lo, hi = BigScalar.pow2(2 ** 512).bounds_str(8)
    assert lo.startswith("exp(") and hi.startswith("exp(")
    lo, hi = BigScalar.pow2(2 ** 512).reciprocal().bounds_str(8)
    assert lo.startswith("exp(-") and hi.startswith("exp(-")


@pytest.mark.parametrize("z", ["0.5", "1", "3.5", "17.25", "100", "12345.678"])
def test_log_gamma_matches_mpmath(z):
    with mpmath.workprec(400):
        ref = mpmath.loggamma(mpmath.mpf(z))
    assert agrees(log_gamma(BigScalar(Fraction(z))), ref, Fraction(1, 10**60))


def test_log_gamma_huge_argument_is_stirling_leading_term():
    z = BigScalar.pow2(300)
    lz, rest = stirling_parts(z)
    with mpmath.workprec(800):
        zz = mpmath.mpf(2) ** 300
        assert agrees(lz, mpmath.log(zz), Fraction(1, 10**70))
        assert agrees(log_gamma(z), mpmath.loggamma(zz), Fraction(1, 10**70))
    assert rest.certainly_lt(0)  # -log(z)/2 dominates
    with pytest.raises(DomainError):
        stirling_parts(BigScalar(3))


def test_working_precision_context(monkeypatch):
    monkeypatch.setenv("RENORM_CF_PRECISION", "128")
    assert get_precision() == 128
    with working_precision(512):
        assert get_precision() == 512
        narrow = BigScalar.pi()
    wide = BigScalar.pi()
    assert narrow.width().certainly_lt(wide.width())


def test_pi_and_ln2_enclosures():
    with mpmath.workprec(400):
        assert agrees(BigScalar.pi(), mpmath.pi, Fraction(1, 10**70))
        assert agrees(BigScalar.ln2(), mpmath.ln2, Fraction(1, 10**70))


def test_mp_fraction_helper_is_exact():
    assert mp_fraction(mpmath.mpf(0.375)) == Fraction(3, 8)
    assert mp_fraction(mpmath.mpf(-2.5)) == Fraction(-5, 2)
