"""Textual number specifications.

Grammar::

    rat:P/Q                 a rational (Q defaults to 1)
    cf:a0;a1,a2,...         a finite continued fraction
    cf:a0;a1,(p1,...,pk)    eventually periodic; the period comes last
    rec:NAME                a named recurrence (see RECURRENCES)
    file:PATH               entries a_0, a_1, ... one per line
    golden | silver         cf:0;(1) and cf:0;(2)

Entries are decimal naturals or ``2^E``.  Decimal reals are not accepted: a
decimal is a rational whose expansion rarely resembles the number meant.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterator

from .cf import Entry, EntryStream, PowerOfTwo, _entry_str, expand_rational, power_of_two
from .errors import DomainError, SpecParseError

__all__ = [
    "NumberSpec",
    "RECURRENCES",
    "ALIASES",
    "parse_number_spec",
    "format_number_spec",
    "to_stream",
    "parse_entry",
]


def _pow2sq() -> Iterator[Entry]:
    # a_1 = 1, a_i = 2^(a_{i-1}^2)
    yield 0
    a: Entry = 1
    while True:
        yield a
        sq = a * a if isinstance(a, int) else a.squared()
        a = power_of_two(sq)


def _pow2() -> Iterator[Entry]:
    # a_1 = 1, a_i = 2^(a_{i-1})
    yield 0
    a: Entry = 1
    while True:
        yield a
        a = power_of_two(a)


RECURRENCES: dict[str, Callable[[], Iterator[Entry]]] = {
    "pow2sq": _pow2sq,
    "pow2": _pow2,
}

ALIASES = {"golden": "cf:0;(1)", "silver": "cf:0;(2)"}


@dataclass(frozen=True)
class NumberSpec:
    """A parsed specification, already in canonical form."""

    kind: str  # "rational" | "finite-cf" | "periodic-cf" | "named-recurrence" | "entry-file"
    rational: Fraction | None = None
    entries: tuple[Entry, ...] = ()
    period: tuple[Entry, ...] = ()
    name: str = ""
    path: str = ""

    def __str__(self):
        return format_number_spec(self)


_ENTRY = re.compile(r"\s*(?:2\^(\d+)|(\d+))\s*")


def parse_entry(text: str, position: int = 0, source: str | None = None) -> Entry:
    """A decimal natural or ``2^E``."""
    m = _ENTRY.fullmatch(text)
    if not m:
        raise SpecParseError(f"invalid entry {text.strip()!r}", source or text, position)
    if m.group(1) is not None:
        return power_of_two(int(m.group(1)))
    return int(m.group(2))


def _check_positive(a: Entry, text: str, pos: int) -> None:
    if isinstance(a, int) and a < 1:
        raise SpecParseError("entries after a_0 must be at least 1", text, pos)


def _minimal_period(period: list[Entry]) -> list[Entry]:
    n = len(period)
    for d in range(1, n + 1):
        if n % d == 0 and period == period[:d] * (n // d):
            return period[:d]
    return period


def _canonical_periodic(a0: Entry, prefix: list[Entry], period: list[Entry]):
    period = _minimal_period(period)
    while prefix and prefix[-1] == period[-1]:
        period = [prefix.pop()] + period[:-1]
    return a0, prefix, period


def _canonical_finite(items: list[Entry]) -> list[Entry]:
    if len(items) > 1 and items[-1] == 1:
        last = items[-2]
        if not isinstance(last, int):
            raise DomainError("cannot merge a trailing 1 into an exponent-form entry")
        items = items[:-2] + [last + 1]
    return items


def _split_items(body: str, offset: int, text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    for part in body.split(","):
        out.append((part, offset + pos))
        pos += len(part) + 1
    return out


def _parse_cf(body: str, offset: int, text: str) -> NumberSpec:
    head, sep, rest = body.partition(";")
    a0 = parse_entry(head, offset, text) if head.strip() else None
    if a0 is None:
        raise SpecParseError("missing a_0", text, offset)
    if not sep or not rest.strip():
        return NumberSpec("finite-cf", entries=(a0,))
    rest_off = offset + len(head) + 1
    period: list[Entry] = []
    prefix: list[Entry] = []
    open_at = rest.find("(")
    if open_at >= 0:
        close_at = rest.find(")", open_at)
        if close_at < 0:
            raise SpecParseError("unclosed period '('", text, rest_off + open_at)
        if rest[close_at + 1 :].strip():
            raise SpecParseError("the period must come last", text, rest_off + close_at + 1)
        before = rest[:open_at].strip()
        if before and not before.endswith(","):
            raise SpecParseError("expected ',' before the period", text, rest_off + open_at)
        inner = rest[open_at + 1 : close_at]
        if not inner.strip():
            raise SpecParseError("empty period", text, rest_off + open_at)
        for part, pos in _split_items(inner, rest_off + open_at + 1, text):
            a = parse_entry(part, pos, text)
            _check_positive(a, text, pos)
            period.append(a)
        rest = before[:-1] if before else ""
    if rest.strip():
        for part, pos in _split_items(rest, rest_off, text):
            a = parse_entry(part, pos, text)
            _check_positive(a, text, pos)
            prefix.append(a)
    if period:
        a0, prefix, period = _canonical_periodic(a0, prefix, period)
        return NumberSpec("periodic-cf", entries=(a0, *prefix), period=tuple(period))
    return NumberSpec("finite-cf", entries=tuple(_canonical_finite([a0, *prefix])))


def parse_number_spec(text: str) -> NumberSpec:
    if not isinstance(text, str) or not text.strip():
        raise SpecParseError("empty number specification", text or "", 0)
    raw = text
    stripped = text.strip()
    lead = len(text) - len(text.lstrip())
    if stripped in ALIASES:
        return parse_number_spec(ALIASES[stripped])
    scheme, colon, body = stripped.partition(":")
    if not colon:
        raise SpecParseError(
            "expected one of rat:, cf:, rec:, file: or an alias", raw, lead
        )
    offset = lead + len(scheme) + 1
    if scheme == "rat":
        m = re.fullmatch(r"\s*(-?\d+)\s*(?:/\s*(-?\d+)\s*)?", body)
        if not m:
            raise SpecParseError("expected rat:P/Q with integers P and Q", raw, offset)
        p = int(m.group(1))
        q = int(m.group(2)) if m.group(2) is not None else 1
        if q == 0:
            raise SpecParseError("zero denominator", raw, offset + body.find("/") + 1)
        value = Fraction(p, q)
        if value < 0:
            raise SpecParseError("only non-negative numbers are supported", raw, offset)
        return NumberSpec("rational", rational=value)
    if scheme == "cf":
        return _parse_cf(body, offset, raw)
    if scheme == "rec":
        name = body.strip()
        if name not in RECURRENCES:
            known = ", ".join(sorted(RECURRENCES))
            raise SpecParseError(f"unknown recurrence {name!r} (known: {known})", raw, offset)
        return NumberSpec("named-recurrence", name=name)
    if scheme == "file":
        if not body.strip():
            raise SpecParseError("missing file path", raw, offset)
        return NumberSpec("entry-file", path=body.strip())
    raise SpecParseError(f"unknown scheme {scheme!r}", raw, lead)


def format_number_spec(spec: NumberSpec) -> str:
    """Canonical text; ``parse_number_spec`` of it gives back ``spec``."""
    if spec.kind == "rational":
        r = spec.rational
        return f"rat:{r.numerator}/{r.denominator}"
    if spec.kind == "finite-cf":
        a0, *rest = spec.entries
        if not rest:
            return f"cf:{_entry_str(a0)}"
        return f"cf:{_entry_str(a0)};" + ",".join(_entry_str(a) for a in rest)
    if spec.kind == "periodic-cf":
        a0, *rest = spec.entries
        period = "(" + ",".join(_entry_str(a) for a in spec.period) + ")"
        items = [_entry_str(a) for a in rest] + [period]
        return f"cf:{_entry_str(a0)};" + ",".join(items)
    if spec.kind == "named-recurrence":
        return f"rec:{spec.name}"
    if spec.kind == "entry-file":
        return f"file:{spec.path}"
    raise DomainError(f"unknown spec kind {spec.kind!r}")


def _read_entry_file(path: str) -> list[Entry]:
    try:
        lines = Path(path).read_text(encoding="ascii").splitlines()
    except OSError as exc:
        raise OSError(f"cannot read entry file {path!r}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise SpecParseError(f"entry file {path!r} is not ASCII", path, exc.start) from exc
    items: list[Entry] = []
    for lineno, line in enumerate(lines, 1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        try:
            a = parse_entry(body, 0)
        except SpecParseError:
            raise SpecParseError(
                f"invalid entry on line {lineno} of {path!r}: {line.strip()!r}", path, lineno
            ) from None
        if items and isinstance(a, int) and a < 1:
            raise SpecParseError(f"entry on line {lineno} of {path!r} must be at least 1", path, lineno)
        items.append(a)
    if not items:
        raise SpecParseError(f"entry file {path!r} has no entries", path, 0)
    return _canonical_finite(items)


def to_stream(spec: NumberSpec | str) -> EntryStream:
    """Lazy entry stream for a spec (or spec text)."""
    if isinstance(spec, str):
        spec = parse_number_spec(spec)
    label = format_number_spec(spec)
    if spec.kind == "rational":
        s = expand_rational(spec.rational.numerator, spec.rational.denominator)
        s.label = label
        return s
    if spec.kind == "finite-cf":
        return EntryStream.finite(spec.entries, label=label)
    if spec.kind == "periodic-cf":
        return EntryStream.periodic(spec.entries, spec.period, label=label)
    if spec.kind == "named-recurrence":
        return EntryStream(RECURRENCES[spec.name](), label=label, finite=False)
    if spec.kind == "entry-file":
        return EntryStream.finite(_read_entry_file(spec.path), label=label)
    raise DomainError(f"unknown spec kind {spec.kind!r}")
