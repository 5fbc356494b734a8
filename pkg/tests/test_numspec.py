from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from renormcf import (
    PowerOfTwo,
    SpecParseError,
    convergents,
    entry_int,
    evaluate,
    format_number_spec,
    parse_entry,
    parse_number_spec,
    to_stream,
)

from conftest import cf_value, euclid


def test_rational_spec():
    s = parse_number_spec("rat:2/5")
    assert s.kind == "rational" and s.rational == Fraction(2, 5)
    assert list(to_stream(s)) == [0, 2, 2]
    assert str(parse_number_spec("rat:6/4")) == "rat:3/2"
    assert str(parse_number_spec("rat:7")) == "rat:7/1"
    assert list(to_stream("rat:355/113")) == [3, 7, 16]


def test_periodic_spec():
    s = parse_number_spec("cf:2;(2)")
    assert s.kind == "periodic-cf"
    x = to_stream(s)
    # convergents of 1 + sqrt(2): (p - q)/q solves the Pell equation u^2 - 2 q^2 = +-1
    for c in convergents(x, 12):
        assert abs((c.p - c.q) ** 2 - 2 * c.q * c.q) == 1
    assert x.prefix(6) == [2, 2, 2, 2, 2, 2]


@pytest.mark.parametrize(
    "text, canonical",
    [
        ("golden", "cf:0;(1)"),
        ("silver", "cf:0;(2)"),
        ("cf:1;2,2,(2,2)", "cf:1;(2)"),
        ("cf:0;1,(2,1)", "cf:0;(1,2)"),
        ("cf:3;2,1", "cf:3;3"),
        ("rat:6/4", "rat:3/2"),
        ("rec:pow2sq", "rec:pow2sq"),
        ("cf:0;2^70,3", "cf:0;2^70,3"),
        (" cf: 0 ; 1 , 2 ", "cf:0;1,2"),
    ],
)
def test_canonical_forms(text, canonical):
    assert format_number_spec(parse_number_spec(text)) == canonical


def test_recurrence_entries_match_independent_recurrence():
    x = to_stream("rec:pow2sq")
    got = x.prefix(6)
    # a_1 = 1, a_i = 2^(a_{i-1}^2) with plain integers while they fit
    want = [0, 1]
    for _ in range(3):
        want.append(2 ** (want[-1] ** 2))
    assert [entry_int(a) for a in got[:5]] == want
    assert want[4] == 2 ** 256 and isinstance(got[4], PowerOfTwo)
    a5 = got[5]
    assert isinstance(a5, PowerOfTwo) and entry_int(a5.exponent) == (2 ** 256) ** 2
    assert str(a5) == "2^(2^512)"
    p = to_stream("rec:pow2").prefix(7)
    assert [entry_int(a) for a in p[:6]] == [0, 1, 2, 4, 16, 65536]
    assert str(p[6]) == "2^65536"
    assert to_stream("golden").prefix(5) == [0, 1, 1, 1, 1]


@pytest.mark.parametrize(
    "text, position",
    [
        ("cf:1;2,x", 7),
        ("rat:1/0", 6),
        ("cf:0;0,1", 5),
        ("bogus:3", 0),
        ("cf:3;(", 5),
        ("rat:-1/2", 4),
        ("rec:nope", 4),
    ],
)
def test_parse_errors_carry_position(text, position):
    with pytest.raises(SpecParseError) as info:
        parse_number_spec(text)
    assert info.value.position == position
    assert "position" in str(info.value)


def test_parse_entry():
    assert parse_entry("17") == 17
    assert parse_entry("2^10") == 1024
    assert str(parse_entry("2^100")) == "2^100"
    with pytest.raises(SpecParseError):
        parse_entry("3^4")


def test_entry_file(tmp_path):
    f = tmp_path / "entries.txt"
    f.write_text("# k0 digits\n0\n3  # first\n\n7\n2^80\n", encoding="ascii")
    spec = parse_number_spec(f"file:{f}")
    assert spec.kind == "entry-file"
    x = to_stream(spec)
    assert x.is_finite and x.prefix(10)[:3] == [0, 3, 7] and str(x[3]) == "2^80"
    bad = tmp_path / "bad.txt"
    bad.write_text("0\n3\nfoo\n", encoding="ascii")
    with pytest.raises(SpecParseError, match="line 3"):
        to_stream(f"file:{bad}")
    with pytest.raises(OSError):
        to_stream(f"file:{tmp_path / 'missing.txt'}")


finite_lists = st.lists(st.integers(min_value=1, max_value=10**6), min_size=0, max_size=8)


@given(st.integers(min_value=0, max_value=99), finite_lists, st.lists(st.integers(min_value=1, max_value=99), min_size=1, max_size=5))
def test_periodic_round_trip(a0, pre, period):
    body = ",".join(map(str, pre))
    text = f"cf:{a0};{body + ',' if body else ''}({','.join(map(str, period))})"
    spec = parse_number_spec(text)
    canon = format_number_spec(spec)
    assert format_number_spec(parse_number_spec(canon)) == canon
    assert to_stream(text).prefix(40) == to_stream(canon).prefix(40)


@given(st.integers(min_value=0, max_value=99), finite_lists)
def test_finite_round_trip(a0, rest):
    entries = [a0] + rest
    text = "cf:" + str(a0) + (";" + ",".join(map(str, rest)) if rest else "")
    canon = format_number_spec(parse_number_spec(text))
    assert format_number_spec(parse_number_spec(canon)) == canon
    assert evaluate(to_stream(canon)) == cf_value(entries)


@given(st.fractions(min_value=0, max_value=10**6, max_denominator=10**6))
def test_rational_round_trip(q):
    canon = format_number_spec(parse_number_spec(f"rat:{q.numerator}/{q.denominator}"))
    assert parse_number_spec(canon).rational == q
    assert list(to_stream(canon)) == euclid(q.numerator, q.denominator)
