"""Approximate renormalization operators on (omega, k, a, A) and the unstable-manifold sum.

States are quadruples ``(omega, k, a, A)``.  The forward maps are

* ``D(omega, k, a, A) = (1/omega - 1, 1/k + 1, A, A + a + u(k))`` on ``0 < omega < 1``,
* ``S(omega, k, a, A) = (omega - 1, k + 1, a, A + a + u(k))`` on ``omega > 1``,

with ``u(k) = log((1 + k)^6 / (2 pi^2 k^3))``.  ``T`` dispatches between them.

Backward orbits of ``k`` come in blocks: from ``K_n = [b_n; b_{n+1}, ...]``
there are ``b_n - 1`` steps of ``S^-1`` and one ``D^-1``, landing on
``K_{n+1}``.  Block ``J = -n`` therefore has length ``m_J = b_{-J-1}``, and
the block markers are ``n_{-n} = -(b_0 + ... + b_{n-1})``.  The sums below
are indexed by ``J = 0, -1, -2, ...`` with ``P_J = prod_{j=-1}^{J} (-1/k_{n_j})``
and ``P_0 = 1``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction

from .cf import (
    Entry,
    EntryStream,
    _with_precision,
    beta,
    beta_entry,
    entry_int,
    entry_scalar,
    tail_enclosure,
)
from .errors import (
    BoundaryError,
    DomainError,
    InsufficientPrecision,
    NotRepresentable,
    RenormCFError,
    StreamExhausted,
)
from .numerics import BigScalar, get_precision, hull, log_gamma, stirling_parts

__all__ = [
    "RenormState",
    "u_val",
    "apply_D",
    "apply_S",
    "apply_T",
    "apply_T_inverse",
    "k0_stream",
    "OrbitStep",
    "OrbitRecord",
    "backward_orbit",
    "block_products",
    "big_U",
    "block_U",
    "nu",
    "block_product_S",
    "SumRow",
    "SumReport",
    "sum_report",
    "direct_partial_sums",
    "reordered_partial_sums",
    "tail_terms",
    "unstable_manifold_residual",
    "DEFAULT_STEP_BUDGET",
]

DEFAULT_STEP_BUDGET = 10_000
# Blocks up to this length are multiplied out; longer ones go through log-gamma.
_DIRECT_PRODUCT_MAX = 64


# --- u and the operators -------------------------------------------------------


@functools.lru_cache(maxsize=32)
def _log_2pi2(prec: int) -> BigScalar:
    return (2 * BigScalar.pi() ** 2).log()


def _c() -> BigScalar:
    """``log(1 / (2 pi^2))``."""
    return -_log_2pi2(get_precision())


def _positive(x: BigScalar, what: str) -> None:
    s = x.sign_or_none()
    if s is None:
        raise InsufficientPrecision(f"{what}: sign undetermined")
    if s <= 0:
        raise DomainError(f"{what} must be positive")


def u_val(k) -> BigScalar:
    """``u(k) = log((1 + k)^6 / (2 pi^2 k^3))`` for ``k > 0``."""
    k = BigScalar(k)
    _positive(k, "u(k) argument")
    return 3 * k.log() + 6 * (1 + k.reciprocal()).log() + _c()


@dataclass(frozen=True)
class RenormState:
    """A point ``(omega, k, a, A)``; ``stream`` optionally backs ``k`` by its CF entries."""

    omega: BigScalar
    k: BigScalar
    a: BigScalar
    A: BigScalar
    stream: EntryStream | None = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("omega", "k", "a", "A"):
            object.__setattr__(self, name, BigScalar(getattr(self, name)))
        if self.omega.sign_or_none() in (0, -1):
            raise DomainError("omega must be positive")
        if self.k.certainly_le(1):
            raise DomainError("k must exceed 1")

    @classmethod
    def from_stream(cls, omega, stream: EntryStream, a=0, A=0) -> "RenormState":
        k0 = k0_stream(stream)
        return cls(omega, _marker_k(k0, 0), a, A, stream=k0)

    def overlaps(self, other: "RenormState") -> bool:
        return all(
            getattr(self, n).overlaps(getattr(other, n)) for n in ("omega", "k", "a", "A")
        )


def _require_gt1(k: BigScalar) -> None:
    if not k.certainly_gt(1):
        if k.certainly_le(1):
            raise DomainError("k must exceed 1")
        raise InsufficientPrecision("cannot certify k > 1")


def apply_D(s: RenormState) -> RenormState:
    w = s.omega
    if w == 1:
        raise BoundaryError("omega = 1 is outside the domain of D")
    if not (w.certainly_gt(0) and w.certainly_lt(1)):
        if w.certainly_ge(1) or w.certainly_le(0):
            raise DomainError("D needs 0 < omega < 1")
        raise InsufficientPrecision("cannot certify 0 < omega < 1")
    _require_gt1(s.k)
    w2 = w.reciprocal() - 1
    if w2 == 1:
        raise BoundaryError("D maps omega = 1/2 onto the boundary omega = 1")
    return RenormState(w2, s.k.reciprocal() + 1, s.A, s.A + s.a + u_val(s.k))


def apply_S(s: RenormState) -> RenormState:
    w = s.omega
    if w == 1:
        raise BoundaryError("omega = 1 is outside the domain of S")
    if not w.certainly_gt(1):
        if w.certainly_le(1):
            raise DomainError("S needs omega > 1")
        raise InsufficientPrecision("cannot certify omega > 1")
    _require_gt1(s.k)
    return RenormState(w - 1, s.k + 1, s.a, s.A + s.a + u_val(s.k))


def apply_T(s: RenormState) -> RenormState:
    """``D`` on ``0 < omega < 1``, ``S`` on ``omega > 1``."""
    w = s.omega
    if w == 1:
        raise BoundaryError("T is undefined at omega = 1")
    if w.certainly_lt(1):
        return apply_D(s)
    if w.certainly_gt(1):
        return apply_S(s)
    raise InsufficientPrecision("omega enclosure contains 1")


def apply_T_inverse(s: RenormState) -> tuple[RenormState, str]:
    """``S^-1`` when ``k > 2``, ``D^-1`` when ``1 < k < 2``; returns the branch tag."""
    k = s.k
    if k == 2:
        raise BoundaryError(
            "k = 2 is ambiguous: [1; 1] and [2] name the same number, so neither branch applies"
        )
    if k.certainly_gt(2):
        k1 = k - 1
        return RenormState(s.omega + 1, k1, s.a, s.A - s.a - u_val(k1)), "S^-1"
    if k.certainly_lt(2):
        _require_gt1(k)
        k1 = (k - 1).reciprocal()
        w1 = (s.omega + 1).reciprocal()
        return RenormState(w1, k1, s.A - s.a - u_val(k1), s.a), "D^-1"
    raise InsufficientPrecision("k enclosure contains the branch boundary 2")


# --- block quantities ----------------------------------------------------------


def _block_lambda(mm: BigScalar, f: BigScalar) -> BigScalar:
    """``log S / (m - 1)`` for a long block, from the Stirling parts of ``log Gamma(f + m)``.

    ``log S = log Gamma(f+m) - log Gamma(f+1) + 2 log(f+m) - 2 log(f+1)``.  With
    ``z = f + m`` and ``log Gamma(z) = z (log z - 1) + R`` the leading part is
    divided by ``m - 1`` before anything is added, so entries like
    ``2^(2^(2^513))`` keep the ``log m`` factor that separates ``m log m`` from ``m``.
    """
    z = f + mm
    lz, rest = stirling_parts(z)
    m1 = mm - 1
    small = rest - log_gamma(f + 1) + 2 * lz - 2 * (f + 1).log()
    return (1 + (f + 1) / m1) * (lz - 1) + small / m1


def _is_short(m: Entry) -> bool:
    return isinstance(m, int) and m <= _DIRECT_PRODUCT_MAX


def _log_block_product(m: Entry, f: BigScalar) -> BigScalar:
    """``log S`` with ``S = prod_{i=1}^{m-1} (f + i + 1)^2 / (f + i)``."""
    if isinstance(m, int) and m < 1:
        raise DomainError("block length must be at least 1")
    if m == 1:
        return BigScalar(0)
    if _is_short(m):
        s = BigScalar(1)
        for i in range(1, m):
            s = s * (f + i + 1) ** 2 / (f + i)
        return s.log()
    mm = entry_scalar(m)
    return (mm - 1) * _block_lambda(mm, f)


def block_U(m: Entry, f) -> BigScalar:
    """``U`` for the chain ``f + 1, ..., f + m - 1``: ``(m - 1) c + 3 log S``.

    This is ``U(k)`` for ``k = m + f``; it takes the integer and fractional
    parts separately so that huge blocks never need ``floor``.
    """
    f = BigScalar(f)
    if m == 1:
        return BigScalar(0)
    if _is_short(m):
        return (m - 1) * _c() + 3 * _log_block_product(m, f)
    mm = entry_scalar(m)
    return (mm - 1) * (_c() + 3 * _block_lambda(mm, f))


def _split(k: BigScalar) -> tuple[int, BigScalar]:
    _require_gt1(k)
    m = k.floor()
    f = k - m
    if f == 0:
        raise BoundaryError("U is undefined at integer k: the chain lands on 1")
    return m, f


def big_U(k) -> BigScalar:
    """``U(k) = u(k-1) + ... + u(k-n)`` with ``k - n`` in ``(1, 2)``; zero on ``(1, 2)``."""
    m, f = _split(BigScalar(k))
    return block_U(m, f)


def nu(k) -> BigScalar:
    """``nu(k) = u(k) - U(k) / k``."""
    k = BigScalar(k)
    return u_val(k) - big_U(k) / k


def block_product_S(x, a: Entry) -> tuple[BigScalar, bool]:
    """``S = (x+1)^-1 (x+2) ... (x+a-1) (x+a)^2`` and whether ``a a!/2 <= S <= (a+1)(a+1)!``.

    Written as ``prod_{i=1}^{a-1} (x+i+1)^2 / (x+i)``, which is 1 for ``a = 1``.
    For long blocks the value comes back in log-space through log-gamma.
    """
    x = BigScalar(x)
    log_s = _log_block_product(a, x)
    s = log_s.exp()
    aa = entry_scalar(a)
    if isinstance(a, int) and a <= 1000:
        import math

        lo = BigScalar(Fraction(a * math.factorial(a), 2))
        hi = BigScalar((a + 1) * math.factorial(a + 1))
        ok = lo.certainly_le(s) and s.certainly_le(hi)
    else:
        log_lo = aa.log() - BigScalar(2).log() + log_gamma(aa + 1)
        log_hi = (aa + 1).log() + log_gamma(aa + 2)
        ok = log_lo.certainly_le(log_s) and log_s.certainly_le(log_hi)
    return s, ok


# --- backward orbit ------------------------------------------------------------


def k0_stream(x: EntryStream) -> EntryStream:
    """Entries of ``k0`` for a supplied number.

    A number above 1 is ``k0`` itself.  A number ``x`` in ``(0, 1)`` is taken
    as ``k_{n_{-1}}^{-1}``, the argument of the criterion, which gives
    ``k0 = [1; a_1(x), a_2(x), ...]``.  Integers are rejected: their orbit
    hits ``k = 2`` at once.
    """
    if not x.has(1):
        raise DomainError("k0 must not be an integer (its orbit starts on the k = 2 boundary)")
    if x[0] != 0:
        return x
    parent = x

    def gen():
        yield 1
        j = 1
        while True:
            try:
                yield parent[j]
            except StreamExhausted:
                return
            j += 1

    return EntryStream(gen(), label=f"1+({x.label})", finite=x._declared_finite)


def _marker_k(b: EntryStream, n: int) -> BigScalar:
    """``K_n = k_{n_{-n}} = [b_n; b_{n+1}, ...]``."""
    return entry_scalar(b[n]) + _tail(b, n + 1)


def _tail(b: EntryStream, n: int) -> BigScalar:
    return tail_enclosure(b, n)


@dataclass(frozen=True)
class OrbitStep:
    v: int
    k: BigScalar
    branch: str  # "start", "S^-1" or "D^-1"
    block: int  # J of the block the step belongs to


@dataclass
class OrbitRecord:
    """Block structure of the backward orbit of ``k0``.

    ``K[n]`` encloses ``k`` at the marker ``n_{-n}`` and ``m[n]`` is ``m_{-(n+1)} = b_n``.
    ``markers[n]`` is ``n_{-n}`` (``None`` once it is too large to write).
    ``steps`` lists every ``k_v`` for blocks no longer than the step budget.
    """

    stream: EntryStream
    K: list[BigScalar]
    m: list[Entry]
    markers: list[int | None]
    steps: list[OrbitStep]
    skipped_blocks: list[int]
    terminated: bool = False
    error: str | None = None

    @property
    def depth(self) -> int:
        return len(self.K) - 1

    def block_length(self, J: int) -> Entry:
        """``m_J = n_{J+1} - n_J`` for ``J < 0``."""
        return self.m[-J - 1]


@_with_precision
def backward_orbit(
    k0: EntryStream, depth: int, step_budget: int = DEFAULT_STEP_BUDGET
) -> OrbitRecord:
    """Backward orbit of ``k0`` through ``depth`` blocks.

    Stops early (``terminated``) when a finite ``k0`` runs out of entries,
    and records ``error`` when an enclosure or entry gives out.
    """
    if depth < 0:
        raise DomainError("depth must be non-negative")
    b = k0_stream(k0)
    rec = OrbitRecord(b, [], [], [0], [], [])
    try:
        rec.K.append(_marker_k(b, 0))
        rec.steps.append(OrbitStep(0, rec.K[0], "start", 0))
        for n in range(depth):
            if not b.has(n + 1):
                rec.terminated = True
                break
            m = b[n]
            K_next = _marker_k(b, n + 1)
            start = rec.markers[n]
            within = isinstance(m, int) and m <= step_budget and start is not None
            if within:
                t = _tail(b, n + 1)
                for i in range(1, m):
                    rec.steps.append(OrbitStep(start - i, (m - i) + t, "S^-1", -n))
                rec.steps.append(OrbitStep(start - m, K_next, "D^-1", -n))
            else:
                rec.skipped_blocks.append(-n - 1)
            try:
                rec.markers.append(None if start is None else start - entry_int(m))
            except NotRepresentable:
                rec.markers.append(None)
            rec.m.append(m)
            rec.K.append(K_next)
    except RenormCFError as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


@_with_precision
def block_products(k0: EntryStream, depth: int) -> list[BigScalar]:
    """``P_J = prod_{j=-1}^{J} (-1/k_{n_j})`` for ``J = 0, -1, ..., -depth`` from the orbit."""
    rec = backward_orbit(k0, depth, step_budget=0)
    if rec.error:
        raise InsufficientPrecision(rec.error)
    out = [BigScalar(1)]
    for n in range(1, len(rec.K)):
        out.append(-out[-1] / rec.K[n])
    return out


# --- sums ----------------------------------------------------------------------


@dataclass
class SumRow:
    """One row ``J`` of the sum report; brackets are ``None`` when not certified."""

    J: int
    direct: BigScalar | None
    reordered: BigScalar | None
    tail_u: BigScalar | None
    tail_U: BigScalar | None
    direct_bracket: BigScalar | None = None
    reordered_bracket: BigScalar | None = None


@dataclass
class SumReport:
    """Partial sums of the unstable-manifold series, row ``J = 0, -1, ...``.

    ``direct`` sums blocks ``J' = 0 .. J`` of the defining series.
    ``reordered`` is ``U(k_{n_0}) + sum_{J'=-1}^{J} P_{J'+1} nu(k_{n_{J'}})``.
    Brackets are ``hull(S_J, S_{J-1})``; they enclose the limit when the
    remaining terms keep alternating with decreasing size, which is checked
    on the next term only.  For finite ``k0`` the sums end and ``complete`` is
    set; both totals are then exact sums of the same finitely many terms.
    """

    rows: list[SumRow]
    depth: int
    precision: int
    label: str
    complete: bool = False
    error: str | None = None

    @property
    def final(self) -> SumRow:
        return self.rows[-1]

    def limit_enclosure(self, which: str = "direct") -> BigScalar | None:
        """Best certified enclosure of the limit from the last row."""
        row = self.final
        if self.complete:
            return row.direct if which == "direct" else row.reordered
        return row.direct_bracket if which == "direct" else row.reordered_bracket


class _Blocks:
    """Lazily computed block data for ``k0 = [b_0; b_1, ...]`` (index ``n = -J``)."""

    def __init__(self, b: EntryStream):
        self.b = b
        self._K: dict[int, BigScalar] = {}
        self._U: dict[int, BigScalar] = {}
        self._u: dict[int, BigScalar] = {}
        self._P: list[BigScalar] = [BigScalar(1)]
        self.last = b.last_index()

    def exists(self, n: int) -> bool:
        return self.last is None or n <= self.last

    def K(self, n: int) -> BigScalar:
        if n not in self._K:
            self._K[n] = _marker_k(self.b, n)
        return self._K[n]

    def f(self, n: int) -> BigScalar:
        return _tail(self.b, n + 1)

    def U(self, n: int) -> BigScalar:
        # the terminal marker of a finite k0 closes no block: U := 0 there
        if n not in self._U:
            if self.last is not None and n == self.last:
                self._U[n] = BigScalar(0)
            else:
                self._U[n] = block_U(self.b[n], self.f(n))
        return self._U[n]

    def u(self, n: int) -> BigScalar:
        if n not in self._u:
            self._u[n] = u_val(self.K(n))
        return self._u[n]

    def P(self, n: int) -> BigScalar:
        while len(self._P) <= n:
            i = len(self._P)
            self._P.append(-self._P[-1] / self.K(i))
        return self._P[n]


def _direct_term(blk: _Blocks, n: int) -> BigScalar | None:
    """Block ``J = -n`` of the defining series: ``P_J (u(k_{n_{J-1}}) + U(k_{n_J}))``."""
    if not blk.exists(n + 1):
        return None
    return blk.P(n) * (blk.u(n + 1) + blk.U(n))


def _reordered_term(blk: _Blocks, n: int) -> BigScalar | None:
    """``n = 0``: ``U(k_{n_0})``; ``n >= 1``: ``P_{-n+1} nu(k_{n_{-n}})``."""
    if n == 0:
        return blk.U(0)
    if not blk.exists(n):
        return None
    nu_n = blk.u(n) - blk.U(n) / blk.K(n)
    return blk.P(n - 1) * nu_n


def _bracket(s_prev, s_next, t_next, t_after) -> BigScalar | None:
    """``hull(s_prev, s_next)`` if the tail after ``s_prev`` is certifiably Leibniz-like."""
    if s_prev is None or s_next is None or t_next is None:
        return None
    if t_after is None:
        return None
    sn, sa = t_next.sign_or_none(), t_after.sign_or_none()
    if sn is None or sa is None or sn == 0 or sn == sa:
        return None
    if not abs(t_after).certainly_lt(abs(t_next)):
        return None
    return hull(s_prev, s_next)


def _spec_label(k0: EntryStream) -> str:
    return k0.label


@_with_precision
def sum_report(k0: EntryStream, J_min: int, *, direct: bool = True, reordered: bool = True) -> SumReport:
    """Direct and reordered partial sums for rows ``J = 0 .. J_min``, plus tail terms.

    Errors stop the computation; rows computed so far are kept and the
    message is stored in ``error``.
    """
    if J_min > 0:
        raise DomainError("J_min must be a non-positive block index")
    depth = -J_min
    b = k0_stream(k0)
    blk = _Blocks(b)
    rep = SumReport([], depth, get_precision(), _spec_label(k0))
    d_terms: list[BigScalar | None] = []
    r_terms: list[BigScalar | None] = []
    d_sums: list[BigScalar | None] = []
    r_sums: list[BigScalar | None] = []

    def add(terms, sums, fn, n):
        t = fn(blk, n)
        terms.append(t)
        if t is None:
            sums.append(sums[-1] if sums else None)
        else:
            sums.append(t if not sums else sums[-1] + t)

    try:
        # two extra terms feed the brackets of the last requested row
        for n in range(depth + 3):
            if direct:
                add(d_terms, d_sums, _direct_term, n)
            if reordered:
                add(r_terms, r_sums, _reordered_term, n)
            if blk.last is not None and n >= blk.last + 1:
                break
    except RenormCFError as exc:
        rep.error = f"{type(exc).__name__}: {exc}"
    last = blk.last
    if last is not None:
        depth = min(depth, last)
        rep.complete = rep.error is None
    count = depth + 1
    if direct:
        count = min(count, len(d_sums))
    if reordered:
        count = min(count, len(r_sums))
    for n in range(count):
        row = SumRow(
            -n,
            d_sums[n] if direct else None,
            r_sums[n] if reordered else None,
            None,
            None,
        )
        try:
            row.tail_u = abs(blk.P(n)) * blk.u(n + 1) if blk.exists(n + 1) else BigScalar(0)
            row.tail_U = abs(blk.P(n)) * blk.U(n)
        except RenormCFError:
            pass
        if rep.complete and n == depth:
            row.direct_bracket, row.reordered_bracket = row.direct, row.reordered
        else:
            if direct:
                row.direct_bracket = _bracket(
                    d_sums[n], _get(d_sums, n + 1), _get(d_terms, n + 1), _get(d_terms, n + 2)
                )
            if reordered:
                row.reordered_bracket = _bracket(
                    r_sums[n], _get(r_sums, n + 1), _get(r_terms, n + 1), _get(r_terms, n + 2)
                )
        rep.rows.append(row)
    return rep


def _get(seq, i):
    return seq[i] if i < len(seq) else None


def direct_partial_sums(k0: EntryStream, J_min: int, precision: int | None = None) -> SumReport:
    """Partial sums ``sum_{J=0}^{J_min} P_J sum_{n_{J-1} <= v < n_J} u(k_v)``.

    The inner block sum is ``u(k_{n_{J-1}}) + U(k_{n_J})``, so long blocks are
    never stepped through.
    """
    return sum_report(k0, J_min, reordered=False, precision=precision)


def reordered_partial_sums(k0: EntryStream, J_min: int, precision: int | None = None) -> SumReport:
    """Partial sums ``U(k_{n_0}) + sum_{J=-1}^{J_min} P_{J+1} nu(k_{n_J})``."""
    return sum_report(k0, J_min, direct=False, precision=precision)


def _U_per_entry(m: Entry, f: BigScalar) -> BigScalar:
    """``U / m`` for the block ``(m, f)``, without forming ``U`` for long blocks."""
    if m == 1:
        return BigScalar(0)
    if _is_short(m):
        return block_U(m, f) / m
    mm = entry_scalar(m)
    return (1 - mm.reciprocal()) * (_c() + 3 * _block_lambda(mm, f))


@_with_precision
def tail_terms(k0: EntryStream, J: int) -> tuple[BigScalar, BigScalar]:
    """``|P_J| u(k_{n_{J-1}})`` and ``|P_J| U(k_{n_J})`` with ``|P_J|`` taken as a beta value.

    ``|P_J| = beta_{-J-1}(k_{n_{-1}}^{-1})``, computed from the continued
    fraction of ``k_{n_{-1}}^{-1} = [0; b_1, b_2, ...]``.  The second term is
    ``(beta_{n-1} b_n) (U_n / b_n)`` so huge blocks never meet their own
    reciprocal in log-space.
    """
    if J > 0:
        raise DomainError("block index J must be non-positive")
    b = k0_stream(k0)
    n = -J
    x = _x_stream(b)
    blk = _Blocks(b)
    mag = beta(x, n - 1)
    first = mag * blk.u(n + 1) if blk.exists(n + 1) else BigScalar(0)
    if n == 0 or n == blk.last:
        return first, mag * blk.U(n)
    second = beta_entry(x, n) * _U_per_entry(b[n], blk.f(n))
    return first, second


def _x_stream(b: EntryStream) -> EntryStream:
    """``k_{n_{-1}}^{-1} = [0; b_1, b_2, ...]``."""
    parent = b

    def gen():
        yield 0
        j = 1
        while True:
            try:
                yield parent[j]
            except StreamExhausted:
                return
            j += 1

    return EntryStream(gen(), label=f"1/k_n-1({b.label})", finite=b._declared_finite)


@_with_precision
def unstable_manifold_residual(s: RenormState, J_min: int, limit: bool = False) -> BigScalar:
    """``A_0 - k a_0 - (partial sum to J_min)`` for a state whose ``k`` is CF-backed.

    With ``limit=True`` the certified limit bracket replaces the partial sum
    (or the full sum for finite ``k0``).
    """
    if s.stream is None:
        raise DomainError("the residual needs a state whose k carries its continued fraction")
    rep = sum_report(s.stream, J_min, reordered=False)
    if rep.error and not rep.rows:
        raise InsufficientPrecision(rep.error)
    total = rep.limit_enclosure("direct") if limit else rep.final.direct
    if total is None:
        raise InsufficientPrecision("no certified limit enclosure at this depth")
    return s.A - s.k * s.a - total
