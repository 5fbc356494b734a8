"""Shared corpus and independent oracles (plain ints, Fractions and mpmath only)."""

from __future__ import annotations

import random
from fractions import Fraction

import mpmath
import pytest

from renormcf import BigScalar, EntryStream, to_stream

# Depth to which each recurrence can be followed at 256 bits; past it the
# nested exponent form gives out (an entry or a level-3 log is not representable).
RECURRENCE_DEPTH = {"rec:pow2": 8, "rec:pow2sq": 6}

NAMED = ["golden", "silver", "cf:2;(1,2)", "cf:0;(1,2,3)", "cf:0;3,(1,1,4)"]


def random_periodic(rng: random.Random, max_entry: int = 50) -> EntryStream:
    prefix = [0] + [rng.randint(1, max_entry) for _ in range(rng.randint(0, 4))]
    period = [rng.randint(1, max_entry) for _ in range(rng.randint(1, 5))]
    return EntryStream.periodic(prefix, period, label=f"rand{prefix}{period}")


def random_stream(rng: random.Random, max_entry: int = 50) -> EntryStream:
    """Aperiodic pseudo-random entries, reproducible per seed."""
    seed = rng.randrange(1 << 30)

    def entry(j: int) -> int:
        if j == 0:
            return 0
        return random.Random(seed * 1000003 + j).randint(1, max_entry)

    return EntryStream.from_function(entry, label=f"rand-seed-{seed}")


def corpus() -> list[tuple[str, EntryStream, int]]:
    """``(label, stream in (0,1) or above 1, max index)``."""
    rng = random.Random(20240611)
    out = [(name, to_stream(name), 50) for name in NAMED]
    out += [(name, to_stream(name), d) for name, d in RECURRENCE_DEPTH.items()]
    for i in range(6):
        out.append((f"periodic-{i}", random_periodic(rng), 50))
    for i in range(6):
        out.append((f"random-{i}", random_stream(rng), 50))
    return out


@pytest.fixture(autouse=True)
def _oracle_precision():
    """Oracles (plain mpmath arithmetic in the tests) run at 400 bits."""
    with mpmath.workprec(400):
        yield


@pytest.fixture(scope="session")
def full_corpus():
    return corpus()


# --- oracles -------------------------------------------------------------------


def euclid(p: int, q: int) -> list[int]:
    out = []
    while q:
        a, r = divmod(p, q)
        out.append(a)
        p, q = q, r
    if len(out) > 1 and out[-1] == 1:
        out[-2:] = [out[-2] + 1]
    return out


def cf_value(entries: list[int]) -> Fraction:
    v = Fraction(entries[-1])
    for a in reversed(entries[:-1]):
        v = a + 1 / v
    return v


def int_convergents(entries: list[int]) -> list[tuple[int, int]]:
    p2, q2, p1, q1 = 0, 1, 1, 0
    out = []
    for a in entries:
        p, q = a * p1 + p2, a * q1 + q2
        out.append((p, q))
        p2, q2, p1, q1 = p1, q1, p, q
    return out


def gauss_iterates(x: Fraction, count: int) -> list[Fraction]:
    """``[x, G(x), G^2(x), ...]`` by exact division (stops at 0)."""
    out = []
    for _ in range(count):
        out.append(x)
        if x == 0:
            break
        x = 1 / x - (1 / x).__floor__()
    return out


def mp_value(v) -> mpmath.mpf:
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def u_oracle(k) -> mpmath.mpf:
    with mpmath.workprec(400):
        k = mp_value(k)
        return mpmath.log((1 + k) ** 6 / (2 * mpmath.pi ** 2 * k ** 3))


def mp_fraction(v) -> Fraction:
    """Exact value of an mpmath number."""
    if not isinstance(v, mpmath.mpf):
        v = mpmath.mpf(v)
    sign, man, exp, _ = v._mpf_  # no re-rounding to the ambient precision
    q = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -q if sign else q


def agrees(enc: BigScalar, value, rel: Fraction = Fraction(1, 10**60)) -> bool:
    """``enc`` overlaps ``value`` widened by a relative slack (for the oracle's own rounding)."""
    v = value if isinstance(value, Fraction) else mp_fraction(value)
    slack = abs(v) * rel + Fraction(1, 10**100)
    return enc.overlaps(BigScalar.interval(v - slack, v + slack))


def silver_sum_oracle() -> mpmath.mpf:
    """``(u(1 + sqrt 2) + u(sqrt 2)) / sqrt 2``."""
    with mpmath.workprec(400):
        s = mpmath.sqrt(2)
        return (u_oracle(1 + s) + u_oracle(s)) / s


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
