"""Continued fractions: entries, lazy entry streams, convergents, Gauss map, beta.

A stream stands for ``x = [a_0; a_1, a_2, ...]``.  Entries are Python ints,
or :class:`PowerOfTwo` once they are too large to write down.  Convergents
``p_j / q_j`` follow ``q_{-1} = 0, q_0 = 1, q_j = a_j q_{j-1} + q_{j-2}``.
"""

from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Union

from .errors import DomainError, NotRepresentable, StreamExhausted
from .numerics import (
    BigScalar,
    get_precision,
    get_promotion_bits,
    hull,
    working_precision,
)

__all__ = [
    "PowerOfTwo",
    "Entry",
    "EntryStream",
    "ConvergentPair",
    "entry_scalar",
    "entry_log",
    "entry_int",
    "power_of_two",
    "expand_rational",
    "evaluate",
    "convergents",
    "gauss_step",
    "tail_enclosure",
    "beta",
    "beta_sequence",
    "beta_entry",
    "beta_defect",
    "log_q_sequence",
]

# Powers of two at or above this many bits are kept in exponent form.
INT_ENTRY_BITS = 64


@dataclass(frozen=True)
class PowerOfTwo:
    """The entry ``2**exponent``; the exponent may itself be a ``PowerOfTwo``."""

    exponent: Union[int, "PowerOfTwo"]

    def __post_init__(self):
        e = self.exponent
        if isinstance(e, bool) or not isinstance(e, (int, PowerOfTwo)):
            raise TypeError("exponent must be an int or a PowerOfTwo")
        if isinstance(e, int) and e < 0:
            raise DomainError("exponent must be non-negative")

    @property
    def depth(self) -> int:
        """Number of stacked powers of two."""
        e = self.exponent
        return 1 + (e.depth if isinstance(e, PowerOfTwo) else 0)

    def log(self) -> BigScalar:
        """Natural log, ``exponent * log 2``."""
        e = self.exponent
        if isinstance(e, int):
            return BigScalar.ln2(e.bit_length()) * e
        inner = e.exponent
        extra = inner if isinstance(inner, int) else 0
        return entry_scalar(e) * BigScalar.ln2(extra)

    def scalar(self) -> BigScalar:
        return entry_scalar(self)

    def squared(self) -> "PowerOfTwo":
        """``(2**E)**2 = 2**(2E)``; raises when ``2E`` has no exact form."""
        return PowerOfTwo(_double(self.exponent))

    def __str__(self):
        e = self.exponent
        return f"2^{e}" if isinstance(e, int) else f"2^({e})"


Entry = Union[int, PowerOfTwo]


def _double(e: Entry) -> Entry:
    if isinstance(e, int):
        return 2 * e
    return PowerOfTwo(_increment(e.exponent))


def _increment(e: Entry) -> int:
    try:
        return entry_int(e) + 1
    except NotRepresentable:
        raise NotRepresentable(f"({e}) + 1 has no nested power-of-two form") from None


def power_of_two(exponent: Entry) -> Entry:
    """``2**exponent`` as an int when small, otherwise in exponent form."""
    if isinstance(exponent, int) and exponent < INT_ENTRY_BITS:
        return 1 << exponent
    return PowerOfTwo(exponent)


def entry_int(a: Entry) -> int:
    """Materialize an entry as an int (refuses astronomically large ones)."""
    if isinstance(a, int):
        return a
    e = a.exponent
    if isinstance(e, int) and e <= (1 << 24):
        return 1 << e
    raise NotRepresentable(f"entry {a} is too large to materialize")


def entry_scalar(a: Entry) -> BigScalar:
    if isinstance(a, int):
        return BigScalar(a)
    e = a.exponent
    if isinstance(e, int):
        return BigScalar.pow2(e)
    return BigScalar.from_log(a.log())


def entry_log(a: Entry) -> BigScalar:
    if isinstance(a, int):
        if a < 1:
            raise DomainError("log of an entry below 1")
        return BigScalar(a).log()
    return a.log()


def _entry_ge(a: Entry, b: int) -> bool:
    return not isinstance(a, int) or a >= b


def _entry_str(a: Entry) -> str:
    if isinstance(a, int):
        from decimal import Decimal

        return str(Decimal(a))
    return str(a)


# --- streams -------------------------------------------------------------------


class EntryStream:
    """Lazy, memoized sequence of continued-fraction entries ``a_0, a_1, ...``.

    Expansion of a single stream is serialized by an internal lock, so a
    stream may be shared between threads.  Reading index ``j`` twice always
    returns the same object.
    """

    def __init__(
        self,
        entries: Iterable[Entry],
        *,
        label: str = "",
        finite: bool | None = None,
        value: Fraction | None = None,
    ):
        self._source: Iterator[Entry] | None = iter(entries)
        self._cache: list[Entry] = []
        self._failure: Exception | None = None
        self._lock = threading.Lock()
        self.label = label
        self._declared_finite = finite
        self.value = value

    # construction helpers

    @classmethod
    def finite(cls, entries: Iterable[Entry], *, label: str = "") -> "EntryStream":
        """Finite stream in canonical form (a trailing 1 is merged into its neighbour)."""
        items = list(entries)
        if not items:
            raise DomainError("a continued fraction needs at least one entry")
        if len(items) > 1 and items[-1] == 1:
            items = items[:-2] + [_add_one(items[-2])]
        for j, a in enumerate(items):
            _check_entry(j, a)
        value = None
        if all(isinstance(a, int) for a in items):
            value = _evaluate_ints(items)
        return cls(items, label=label, finite=True, value=value)

    @classmethod
    def periodic(
        cls, prefix: Iterable[Entry], period: Iterable[Entry], *, label: str = ""
    ) -> "EntryStream":
        prefix, period = list(prefix), list(period)
        if not period:
            raise DomainError("period must be non-empty")

        def gen():
            yield from prefix
            while True:
                yield from period

        return cls(gen(), label=label, finite=False)

    @classmethod
    def from_function(
        cls, f: Callable[[int], Entry], *, label: str = "", length: int | None = None
    ) -> "EntryStream":
        def gen():
            j = 0
            while length is None or j < length:
                yield f(j)
                j += 1

        return cls(gen(), label=label, finite=length is not None)

    # access

    def _fill(self, j: int) -> None:
        with self._lock:
            while len(self._cache) <= j:
                if self._failure is not None:
                    raise self._failure
                if self._source is None:
                    raise StreamExhausted(
                        f"stream {self.label or ''} has only {len(self._cache)} entries"
                    )
                try:
                    a = next(self._source)
                except StopIteration:
                    self._source = None
                    continue
                except NotRepresentable as exc:
                    self._failure = exc
                    self._source = None
                    raise
                _check_entry(len(self._cache), a)
                self._cache.append(a)

    def __getitem__(self, j: int) -> Entry:
        if not isinstance(j, int) or j < 0:
            raise IndexError("entry index must be a non-negative int")
        if j >= len(self._cache):
            self._fill(j)
        return self._cache[j]

    def has(self, j: int) -> bool:
        """True if entry ``j`` exists (False past the end of a finite stream)."""
        try:
            self[j]
        except StreamExhausted:
            return False
        return True

    def __iter__(self):
        j = 0
        while True:
            try:
                yield self[j]
            except StreamExhausted:
                return
            j += 1

    def prefix(self, n: int) -> list[Entry]:
        """The first ``n`` entries (fewer if the stream is shorter)."""
        out = []
        for j in range(n):
            if not self.has(j):
                break
            out.append(self[j])
        return out

    @property
    def is_finite(self) -> bool:
        if self._declared_finite is not None:
            return self._declared_finite
        with self._lock:
            return self._source is None and self._failure is None

    def length(self) -> int | None:
        """Number of entries for a finite stream, ``None`` otherwise."""
        if not self.is_finite:
            return None
        j = len(self._cache)
        while self.has(j):
            j += 1
        return j

    def last_index(self) -> int | None:
        n = self.length()
        return None if n is None else n - 1

    def tail(self, k: int) -> "EntryStream":
        """The stream ``[a_k; a_{k+1}, ...]``."""
        parent = self

        def gen():
            j = k
            while True:
                try:
                    yield parent[j]
                except StreamExhausted:
                    return
                j += 1

        return EntryStream(gen(), label=f"{self.label}>>{k}", finite=self._declared_finite)

    def reciprocal(self) -> "EntryStream":
        """Entries of ``1/x``: drop a leading 0, or prepend one."""
        first = self[0]
        if first == 0:
            return self.tail(1)
        parent = self

        def gen():
            yield 0
            j = 0
            while True:
                try:
                    yield parent[j]
                except StreamExhausted:
                    return
                j += 1

        return EntryStream(gen(), label=f"1/({self.label})", finite=self._declared_finite)

    def gauss_shift(self) -> "EntryStream":
        """Entries of ``G(x) = [0; a_2, a_3, ...]`` for ``x = [0; a_1, ...]``."""
        if self[0] != 0:
            raise DomainError("the Gauss map needs x in (0, 1), i.e. a_0 = 0")
        if not self.has(2):
            raise DomainError("G(x) = 0 leaves (0, 1)")
        parent = self

        def gen():
            yield 0
            j = 2
            while True:
                try:
                    yield parent[j]
                except StreamExhausted:
                    return
                j += 1

        return EntryStream(gen(), label=f"G({self.label})", finite=self._declared_finite)

    def __repr__(self):
        shown = ", ".join(_entry_str(a) for a in self._cache[:8])
        more = ", ..." if not self.is_finite or len(self._cache) > 8 else ""
        return f"EntryStream({self.label!r}: [{shown}{more}])"


def _add_one(a: Entry) -> Entry:
    if isinstance(a, int):
        return a + 1
    raise NotRepresentable("cannot add 1 to an exponent-form entry")


def _check_entry(j: int, a) -> None:
    if isinstance(a, bool) or not isinstance(a, (int, PowerOfTwo)):
        raise TypeError(f"entry {j} must be an int or PowerOfTwo, got {type(a).__name__}")
    if isinstance(a, int):
        if j == 0 and a < 0:
            raise DomainError("a_0 must be non-negative")
        if j > 0 and a < 1:
            raise DomainError(f"entry a_{j} = {a} must be at least 1")


def _evaluate_ints(items: list[int]) -> Fraction:
    value = Fraction(items[-1])
    for a in reversed(items[:-1]):
        value = a + 1 / value
    return value


def expand_rational(p: int, q: int) -> EntryStream:
    """Canonical continued fraction of ``p/q`` by the Euclidean algorithm."""
    p, q = int(p), int(q)
    if q == 0:
        raise DomainError("denominator must be non-zero")
    if q < 0:
        p, q = -p, -q
    if p < 0:
        raise DomainError("only non-negative rationals are expanded")
    value = Fraction(p, q)
    items = []
    n, d = value.numerator, value.denominator
    while True:
        a, r = divmod(n, d)
        items.append(a)
        if r == 0:
            break
        n, d = d, r
    stream = EntryStream(items, label=f"{value}", finite=True, value=value)
    return stream


def evaluate(x: EntryStream | Iterable[int], n: int | None = None) -> Fraction:
    """Exact value of a finite CF, or of its ``n``-th convergent."""
    if isinstance(x, EntryStream):
        if n is None:
            if not x.is_finite:
                raise DomainError("an infinite stream needs an explicit convergent index")
            items = list(x)
        else:
            items = x.prefix(n + 1)
    else:
        items = list(x)
        if n is not None:
            items = items[: n + 1]
    if not items:
        raise DomainError("empty continued fraction")
    return _evaluate_ints([entry_int(a) for a in items])


# --- convergents ---------------------------------------------------------------


def _with_precision(func):
    @functools.wraps(func)
    def wrapper(*args, precision: int | None = None, **kwargs):
        if precision is None:
            return func(*args, **kwargs)
        with working_precision(precision):
            return func(*args, **kwargs)

    return wrapper


@dataclass(frozen=True)
class ConvergentPair:
    """``p_j / q_j``; ``p`` and ``q`` are ints when they fit, else enclosures."""

    j: int
    p: int | BigScalar
    q: int | BigScalar

    @property
    def p_scalar(self) -> BigScalar:
        return BigScalar(self.p)

    @property
    def q_scalar(self) -> BigScalar:
        return BigScalar(self.q)

    @property
    def is_exact(self) -> bool:
        return isinstance(self.p, int) and isinstance(self.q, int)

    def fraction(self) -> Fraction:
        if not self.is_exact:
            raise NotRepresentable("convergent is only known as an enclosure")
        return Fraction(self.p, self.q)


def _as_int_or_scalar(v: BigScalar) -> int | BigScalar:
    q = v.exact_value
    if q is not None and q.denominator == 1:
        return int(q)
    return v


def _scalar_convergents(x: EntryStream, n: int) -> list[tuple[BigScalar, BigScalar]]:
    """``(p_j, q_j)`` for ``j = -1 .. n`` (fewer if the stream ends)."""
    out = [(BigScalar(1), BigScalar(0))]
    p_prev, q_prev = BigScalar(1), BigScalar(0)
    p, q = None, None
    for j in range(n + 1):
        if not x.has(j):
            break
        a = entry_scalar(x[j])
        if j == 0:
            p, q = a, BigScalar(1)
        else:
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return out


@_with_precision
def convergents(x: EntryStream, n: int) -> list[ConvergentPair]:
    """Convergents ``j = 0 .. n``; a shorter list if a finite stream ends first."""
    if n < 0:
        raise DomainError("convergent index must be non-negative")
    pairs = _scalar_convergents(x, n)[1:]
    return [
        ConvergentPair(j, _as_int_or_scalar(p), _as_int_or_scalar(q))
        for j, (p, q) in enumerate(pairs)
    ]


# --- Gauss map and tails -------------------------------------------------------


def gauss_step(x):
    """``G(x) = 1/x - floor(1/x)`` for ``0 < x < 1``; exact on rationals."""
    if isinstance(x, BigScalar):
        if x.exact_value is not None:
            return BigScalar(gauss_step(x.exact_value))
        if not (x.certainly_gt(0) and x.certainly_lt(1)):
            raise DomainError("gauss_step needs an enclosure inside (0, 1)")
        r = x.reciprocal()
        return r - r.floor()
    x = Fraction(x)
    if not 0 < x < 1:
        raise DomainError("gauss_step needs 0 < x < 1")
    r = 1 / x
    return r - math.floor(r)


def _log2_size(v: BigScalar) -> float:
    q = v.exact_value
    if q is not None:
        return float(q.numerator.bit_length() - q.denominator.bit_length())
    return float(v.log()) / math.log(2)


def tail_enclosure(x: EntryStream, k: int) -> BigScalar:
    """Enclosure of ``t_k = [0; a_k, a_{k+1}, ...]`` (exact for finite streams).

    Entries are read ahead until the bracketing convergents of the tail are
    closer than the working precision, the stream ends, or an entry cannot
    be represented.
    """
    if k < 1:
        raise DomainError("tail index must be at least 1")
    target = get_precision() + 16
    # convergents of [0; a_k, a_{k+1}, ...]
    p_prev, q_prev = BigScalar(1), BigScalar(0)
    p, q = BigScalar(0), BigScalar(1)
    m = k
    while True:
        try:
            if not x.has(m):
                return p / q
            a = entry_scalar(x[m])
        except NotRepresentable:
            if m == k:
                return BigScalar.interval(0, 1)
            return hull(p / q, (p + p_prev) / (q + q_prev))
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        if 2 * _log2_size(q) > target:
            try:
                if not x.has(m + 1):
                    return p / q
            except NotRepresentable:
                pass
            return hull(p / q, (p + p_prev) / (q + q_prev))
        m += 1


# --- beta and log q ------------------------------------------------------------


def _require_unit_interval(x: EntryStream) -> None:
    if x[0] != 0:
        raise DomainError("beta and criterion quantities need x in (0, 1), i.e. a_0 = 0")


def _beta_from(x: EntryStream, j: int, conv) -> BigScalar:
    # conv[i + 1] = (p_i, q_i)
    if j == -1:
        return BigScalar(1)
    last = x.last_index()
    if last is not None and j >= last:
        raise StreamExhausted(f"beta_{j} needs entry a_{j + 1}, stream ends at a_{last}")
    q_j = conv[j + 1][1]
    q_next = conv[j + 2][1]
    if last is not None and j + 2 > last:
        return BigScalar(1) / q_next
    t = tail_enclosure(x, j + 2)
    if t.sign_or_none() == 1:
        return (q_next + t * q_j).reciprocal()
    # t touches 0 (unknown tail); the denominator is monotone in t
    return hull(q_next + t.lower() * q_j, q_next + t.upper() * q_j).reciprocal()


@_with_precision
def beta(x: EntryStream, j: int) -> BigScalar:
    """``beta_j(x) = prod_{i<=j} G^i(x) = |q_j x - p_j|`` for ``x = [0; a_1, ...]``."""
    if j < -1:
        raise DomainError("beta index must be at least -1")
    _require_unit_interval(x)
    if j == -1:
        return BigScalar(1)
    conv = _scalar_convergents(x, j + 1)
    if len(conv) < j + 3:
        raise StreamExhausted(f"beta_{j} needs entry a_{j + 1}")
    return _beta_from(x, j, conv)


@_with_precision
def beta_sequence(x: EntryStream, n: int) -> list[BigScalar]:
    """``[beta_{-1}, beta_0, ..., beta_n]``, stopping early for finite streams."""
    _require_unit_interval(x)
    conv = _scalar_convergents(x, n + 1)
    out = [BigScalar(1)]
    for j in range(0, n + 1):
        if len(conv) < j + 3:
            break
        out.append(_beta_from(x, j, conv))
    return out


def _tail_after(x: EntryStream, k: int) -> BigScalar:
    """``t_k``, or exactly 0 past the end of a finite stream."""
    last = x.last_index()
    if last is not None and k > last:
        return BigScalar(0)
    return tail_enclosure(x, k)


def _entry_ratios(x: EntryStream, q_prev2: BigScalar, q_prev: BigScalar, j: int):
    """``(A, r, s)``: ``A = a_j``, ``r = q_{j-2} / (A q_{j-1})``, ``s = r + t_{j+1} / A``.

    ``q_j + t_{j+1} q_{j-1} = A q_{j-1} (1 + s)``.
    """
    A = entry_scalar(x[j])
    r = q_prev2 / (A * q_prev)
    t = _tail_after(x, j + 1)
    if t.kind == "exact":
        return A, r, r + t / A
    return A, r, hull(r + t.lower() / A, r + t.upper() / A)


@_with_precision
def beta_entry(x: EntryStream, j: int) -> BigScalar:
    """``beta_{j-1} a_j = 1 / (q_{j-1} (1 + s))`` for ``j >= 1``.

    Formed without multiplying ``beta_{j-1}`` by ``a_j``, which for entries
    like ``2^(2^(2^513))`` cancels beyond any working precision.
    """
    if j < 1:
        raise DomainError("beta_entry needs j >= 1")
    _require_unit_interval(x)
    conv = _scalar_convergents(x, j)
    if len(conv) < j + 2:
        raise StreamExhausted(f"beta_entry at j = {j} needs entry a_{j}")
    q_prev = conv[j][1]
    _, _, s = _entry_ratios(x, conv[j - 1][1], q_prev, j)
    return (q_prev * (1 + s)).reciprocal()


@_with_precision
def beta_defect(x: EntryStream, n: int) -> BigScalar:
    """``e = t_{n+2} q_n / q_{n+1}``, so that ``q_{n+1} beta_n = 1 / (1 + e)``.

    The bracket ``1/2 < q_{n+1} beta_n < 1`` is ``0 < e < 1``; ``e`` stays
    resolvable when ``q_{n+1} beta_n`` is ``1`` minus something far below the
    working precision.
    """
    if n < 0:
        raise DomainError("beta_defect needs n >= 0")
    _require_unit_interval(x)
    conv = _scalar_convergents(x, n + 1)
    if len(conv) < n + 3:
        raise StreamExhausted(f"beta_defect at n = {n} needs entry a_{n + 1}")
    t = _tail_after(x, n + 2)
    ratio = conv[n + 1][1] / conv[n + 2][1]
    if t.kind == "exact":
        return t * ratio
    return hull(t.lower() * ratio, t.upper() * ratio)


@_with_precision
def log_q_sequence(x: EntryStream, n: int) -> list[BigScalar]:
    """Enclosures of ``log q_j`` for ``j = 0 .. n``."""
    if n < 0:
        raise DomainError("index must be non-negative")
    conv = _scalar_convergents(x, n)
    return [q.log() for _, q in conv[1:]]
