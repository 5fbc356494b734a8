import threading
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from renormcf import (
    BigScalar,
    DomainError,
    EntryStream,
    InsufficientPrecision,
    PowerOfTwo,
    StreamExhausted,
    beta,
    beta_defect,
    beta_entry,
    beta_sequence,
    convergents,
    entry_int,
    entry_log,
    entry_scalar,
    evaluate,
    expand_rational,
    gauss_step,
    log_q_sequence,
    power_of_two,
    tail_enclosure,
    to_stream,
)

from conftest import agrees, cf_value, euclid, gauss_iterates, int_convergents

rationals = st.builds(
    Fraction, st.integers(min_value=0, max_value=10**12), st.integers(min_value=1, max_value=10**12)
)
entry_lists = st.lists(st.integers(min_value=1, max_value=10**6), min_size=1, max_size=12)


# --- expansion -------------------------------------------------------------------


@pytest.mark.parametrize(
    "p, q, entries", [(355, 113, [3, 7, 16]), (1, 2, [0, 2]), (2, 5, [0, 2, 2]), (7, 1, [7])]
)
def test_expand_rational_examples(p, q, entries):
    assert expand_rational(p, q).prefix(len(entries) + 5) == entries


def test_expand_rational_rejects_bad_input():
    with pytest.raises((DomainError, ZeroDivisionError)):
        expand_rational(1, 0)
    with pytest.raises(DomainError):
        expand_rational(-3, 4)


@given(rationals)
def test_expand_rational_matches_euclid_and_round_trips(x):
    s = expand_rational(x.numerator, x.denominator)
    items = list(s)
    assert items == euclid(x.numerator, x.denominator)
    assert evaluate(s) == x
    if len(items) > 1:
        assert items[-1] >= 2


def test_finite_stream_canonical_form_and_validation():
    assert list(EntryStream.finite([0, 2, 1])) == [0, 3]
    assert list(EntryStream.finite([5])) == [5]
    with pytest.raises(DomainError):
        EntryStream.finite([0, 0, 2])
    s = EntryStream.finite([0, 2, 2])
    assert s.is_finite and s.last_index() == 2
    with pytest.raises(StreamExhausted):
        s[3]
    assert not s.has(3)


def test_stream_memoization_is_deterministic_across_threads():
    calls = []

    def entry(j):
        calls.append(j)
        return j + 1

    s = EntryStream.from_function(entry)
    seen = []

    def reader():
        seen.append(tuple(s[j] for j in range(200)))

    threads = [threading.Thread(target=reader) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(seen)) == 1
    assert sorted(calls) == list(range(200))  # every entry produced exactly once


# --- exponent-form entries -------------------------------------------------------


def test_power_of_two_entries():
    assert power_of_two(10) == 1024
    big = power_of_two(100)
    assert isinstance(big, PowerOfTwo) and str(big) == "2^100"
    assert entry_int(big) == 2 ** 100
    with mpmath.workprec(400):
        assert agrees(entry_log(big), 100 * mpmath.ln2, Fraction(1, 10**60))
    nested = power_of_two(power_of_two(512))
    assert str(nested) == "2^(2^512)"
    assert entry_scalar(nested).level == 1  # exp of an interval holding 2^512 log 2
    assert str(nested.squared()) == "2^(2^513)"
    with mpmath.workprec(800):
        assert agrees(entry_log(nested).log(), 512 * mpmath.ln2 + mpmath.log(mpmath.ln2), Fraction(1, 10**60))


# --- convergents ---------------------------------------------------------------


def test_convergent_examples():
    pairs = [(c.p, c.q) for c in convergents(to_stream("silver"), 4)]
    assert pairs == [(0, 1), (1, 2), (2, 5), (5, 12), (12, 29)]
    assert [c.q for c in convergents(to_stream("golden"), 4)] == [1, 1, 2, 3, 5]
    c = convergents(to_stream("cf:0;2"), 1)
    assert [(x.p, x.q) for x in c] == [(0, 1), (1, 2)]
    assert c[1].p * c[0].q - c[0].p * c[1].q == 1
    assert len(convergents(to_stream("cf:0;2"), 7)) == 2


@given(st.integers(min_value=0, max_value=100), entry_lists)
def test_convergent_invariants(a0, rest):
    entries = [a0] + rest
    if len(entries) > 1 and entries[-1] == 1:
        entries[-1] = 2
    s = EntryStream.finite(entries)
    conv = convergents(s, len(entries))
    assert [(c.p, c.q) for c in conv] == int_convergents(entries)
    for j in range(1, len(conv)):
        det = conv[j].p * conv[j - 1].q - conv[j - 1].p * conv[j].q
        assert det == (-1) ** (j + 1)
        q2 = conv[j - 2].q if j >= 2 else 0
        assert conv[j].q == entries[j] * conv[j - 1].q + q2
        if j >= 2:
            assert conv[j].q >= 2 * conv[j - 2].q
    assert Fraction(conv[-1].p, conv[-1].q) == cf_value(entries)


# --- Gauss map -----------------------------------------------------------------


def test_gauss_step_examples():
    assert gauss_step(Fraction(2, 5)) == Fraction(1, 2)
    assert gauss_step(Fraction(3, 10)) == Fraction(1, 3)
    with pytest.raises(DomainError):
        gauss_step(Fraction(0))
    r = BigScalar(2).sqrt() - 1
    g = gauss_step(r)
    assert g.overlaps(r) and g.width().certainly_lt(BigScalar(Fraction(1, 10**60)))
    with pytest.raises(InsufficientPrecision):
        gauss_step(BigScalar.interval(Fraction(49, 100), Fraction(51, 100)))


@given(st.lists(st.integers(min_value=1, max_value=1000), min_size=2, max_size=12))
def test_gauss_shift_property(rest):
    if rest[-1] == 1:
        rest[-1] = 2
    x = cf_value([0] + rest)
    assert list(expand_rational(*_nd(gauss_step(x)))) == [0] + rest[1:]


def _nd(q: Fraction):
    return q.numerator, q.denominator


# --- beta ------------------------------------------------------------------------


def test_beta_examples():
    silver = to_stream("silver")
    with mpmath.workprec(400):
        assert agrees(beta(silver, 1), (mpmath.sqrt(2) - 1) ** 2, Fraction(1, 10**60))
        gamma = (mpmath.sqrt(5) - 1) / 2
        assert agrees(beta(to_stream("golden"), 3), gamma ** 4, Fraction(1, 10**60))
    assert beta(silver, -1) == BigScalar(1)
    assert beta(to_stream("rat:2/5"), -1) == BigScalar(1)
    with pytest.raises(DomainError):
        beta(to_stream("cf:1;(2)"), 0)


@settings(max_examples=60)
@given(st.lists(st.integers(min_value=1, max_value=60), min_size=1, max_size=12))
def test_beta_equals_product_of_gauss_iterates(rest):
    if len(rest) > 1 and rest[-1] == 1 or rest == [1]:
        rest[-1] = 2
    x = cf_value([0] + rest)
    s = expand_rational(x.numerator, x.denominator)
    its = gauss_iterates(x, len(rest) + 1)
    prod = Fraction(1)
    for j in range(len(rest)):  # beta_j exists while a_{j+1} does
        prod *= its[j]
        b = beta(s, j)
        assert b.is_exact and b.exact_value == prod
    with pytest.raises(StreamExhausted):
        beta(s, len(rest))


def test_beta_recurrence_and_bracket_on_periodic_streams():
    for spec in ["golden", "silver", "cf:0;(1,2,3)", "cf:0;5,(17,1)"]:
        x = to_stream(spec)
        bs = beta_sequence(x, 40)  # bs[i] = beta_{i-1}
        conv = convergents(x, 42)
        for j in range(1, 41):
            # beta_{j-2} = a_j beta_{j-1} + beta_j
            assert bs[j - 1].overlaps(x[j] * bs[j] + bs[j + 1])
        for n in range(0, 40):
            r = conv[n + 1].q * bs[n + 1]
            assert r.certainly_gt(BigScalar(Fraction(1, 2))) and r.certainly_lt(1)
            e = beta_defect(x, n)
            assert e.certainly_gt(0) and e.certainly_lt(1)
            assert r.overlaps((1 + e).reciprocal())


def test_beta_entry_matches_product_where_resolvable():
    x = to_stream("cf:0;(3,1,4)")
    bs = beta_sequence(x, 20)
    for j in range(1, 20):
        assert beta_entry(x, j).overlaps(bs[j] * x[j])
    # huge entries: the product form is out of reach, the direct form is not
    p = to_stream("rec:pow2sq")
    be = beta_entry(p, 6)
    assert be.certainly_gt(0) and be.level == 1


def test_tail_enclosure():
    with mpmath.workprec(400):
        assert agrees(tail_enclosure(to_stream("silver"), 1), mpmath.sqrt(2) - 1, Fraction(1, 10**60))
    assert tail_enclosure(to_stream("rat:2/5"), 1) == BigScalar(Fraction(2, 5))
    assert tail_enclosure(to_stream("rec:pow2sq"), 8).contains(BigScalar(Fraction(1, 2)))


# --- log q ---------------------------------------------------------------------


def test_log_q_examples():
    lq = log_q_sequence(to_stream("rec:pow2sq"), 4)
    with mpmath.workprec(600):
        assert agrees(lq[4], mpmath.log(mpmath.mpf(2) ** 256 * 49 + 3), Fraction(1, 10**60))
        assert agrees(log_q_sequence(to_stream("golden"), 5)[5], mpmath.log(8), Fraction(1, 10**60))
        assert agrees(log_q_sequence(to_stream("cf:0;2"), 1)[1], mpmath.log(2), Fraction(1, 10**60))


def test_log_q_exact_and_log_regimes_agree():
    # q_6 of rec:pow2 is past the promotion threshold; the big-integer value agrees
    x = to_stream("rec:pow2")
    entries = [0, 1, 2, 4, 16, 65536, 2 ** 65536]
    qs = [q for _, q in int_convergents(entries)]
    lq = log_q_sequence(x, 6)
    assert not convergents(x, 6)[6].is_exact
    for j in range(7):
        with mpmath.workprec(400):
            ref = mpmath.log(mpmath.mpf(qs[j]))
        assert agrees(lq[j], ref, Fraction(1, 10**60))
