"""Finite-depth diagnostics for the convergence criterion ``log q_{j+1} / q_j -> 0``.

Every quantity here depends only on the entries ``a_1, a_2, ...``; a stream
with ``a_0 != 0`` is treated as its fractional part.  Sequences are indexed
from ``j = 1`` with ``q_0 = 1``.  Nothing in this module decides a limit:
:func:`classify` only reports the trend of a finite prefix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cf import (
    EntryStream,
    _entry_ratios,
    _scalar_convergents,
    _with_precision,
    entry_log,
    entry_scalar,
)
from .errors import InsufficientPrecision, RenormCFError, StreamExhausted
from .numerics import BigScalar

__all__ = [
    "TraceRecord",
    "CriterionTrace",
    "SandwichResult",
    "ClassifyPolicy",
    "TrendReport",
    "criterion_sequence",
    "brjuno_terms",
    "brjuno_partial",
    "FINITE_VERDICT",
    "lemma_sequences",
    "sandwich_check",
    "classify",
]

FINITE_VERDICT = "finite CF — criterion vacuous"


def _unit(x: EntryStream) -> EntryStream:
    """``x - a_0``: same entries from index 1 on, with ``a_0 = 0``."""
    if x[0] == 0:
        return x
    parent = x

    def gen():
        yield 0
        j = 1
        while True:
            try:
                yield parent[j]
            except StreamExhausted:
                return
            j += 1

    return EntryStream(gen(), label=f"frac({x.label})", finite=x._declared_finite)


def _q_list(x: EntryStream, n: int) -> list[BigScalar]:
    """``[q_0, ..., q_n]`` (shorter if the stream ends)."""
    return [q for _, q in _scalar_convergents(x, n)[1:]]


def _criterion_values(qs: list[BigScalar], n: int) -> list[BigScalar]:
    out = []
    for j in range(1, n + 1):
        if j + 1 >= len(qs):
            break
        out.append(qs[j + 1].log() / qs[j])
    return out


@_with_precision
def criterion_sequence(x: EntryStream, n: int) -> list[BigScalar]:
    """``[log q_{j+1} / q_j for j = 1 .. n]``; shorter when a finite stream ends."""
    x = _unit(x)
    return _criterion_values(_q_list(x, n + 1), n)


@_with_precision
def brjuno_terms(x: EntryStream, n: int) -> list[BigScalar]:
    """``[log q_{j+1} / q_j for j = 0 .. n]``; shorter when a finite stream ends."""
    x = _unit(x)
    qs = _q_list(x, n + 1)
    return [qs[j + 1].log() / qs[j] for j in range(0, n + 1) if j + 1 < len(qs)]


@_with_precision
def brjuno_partial(x: EntryStream, n: int) -> BigScalar:
    """``sum_{j=0}^{n} log q_{j+1} / q_j`` (terms past the end of a finite stream are absent).

    The ``j = 0`` term is ``log q_1``; it is what makes ``[0; a]`` a one-term sum.
    """
    total = BigScalar(0)
    for term in brjuno_terms(x, n):
        total = total + term
    return total


@dataclass
class TraceRecord:
    """Quantities at index ``j``; ``None`` where the stream gives out."""

    j: int
    criterion: BigScalar | None
    beta_log_next: BigScalar | None  # beta_{j-1} log a_{j+1}
    beta_a_log_a: BigScalar | None  # beta_{j-1} a_j log a_j
    beta_a: BigScalar | None  # beta_{j-1} a_j
    sandwich_lower: BigScalar | None
    sandwich_upper: BigScalar | None


@dataclass
class CriterionTrace:
    records: list[TraceRecord]
    trend: str
    error: str | None = None


def _sandwich_bounds(qs, j):
    # lower = (1/4) [log q_j / q_{j-1} - (log q_{j-1} + log 2) / q_{j-1}], upper = log q_j / q_{j-1}
    upper = qs[j].log() / qs[j - 1]
    lower = (upper - (qs[j - 1].log() + BigScalar(2).log()) / qs[j - 1]) / 4
    return lower, upper


@_with_precision
def lemma_sequences(x: EntryStream, n: int) -> CriterionTrace:
    """Records ``j = 1 .. n`` of the criterion and the three equivalent sequences."""
    x = _unit(x)
    records: list[TraceRecord] = []
    error = None
    try:
        qs = _q_list(x, n + 1)
    except RenormCFError as exc:
        return CriterionTrace([], "inconclusive", f"{type(exc).__name__}: {exc}")
    crit = _criterion_values(qs, n)
    last = x.last_index()
    for j in range(1, n + 1):
        if not x.has(j):
            break
        try:
            a_j = x[j]
            log_a = entry_log(a_j)
            beta_a = beta_a_log = beta_log_next = None
            if last is None or j - 1 < last:
                beta_a = _beta_entry(x, qs, j)
                beta_a_log = beta_a * log_a
                if x.has(j + 1):
                    # beta_{j-1} log a_{j+1} = (beta_{j-1} a_j) log a_{j+1} / a_j
                    beta_log_next = beta_a * entry_log(x[j + 1]) / entry_scalar(a_j)
            lower = upper = None
            if j >= 2:
                lower, upper = _sandwich_bounds(qs, j)
            records.append(
                TraceRecord(
                    j,
                    crit[j - 1] if j - 1 < len(crit) else None,
                    beta_log_next,
                    beta_a_log,
                    beta_a,
                    lower,
                    upper,
                )
            )
        except RenormCFError as exc:
            error = f"{type(exc).__name__}: {exc}"
            break
    values = [r.criterion for r in records if r.criterion is not None]
    trend = _trend(values, ClassifyPolicy(), x.is_finite)
    return CriterionTrace(records, trend.verdict, error)


@dataclass
class SandwichResult:
    """``lower < value < upper`` for ``value = beta_{j-1} a_j log a_j``.

    ``ok`` is the validated verdict.  When ``a_j = 1`` the value is exactly 0
    and the lower bound is ``<= 0`` because ``q_j <= 2 q_{j-1}``; it is exactly
    0 when ``q_j = 2 q_{j-1}``.  In that case ``ok`` accepts equality on the
    left and ``strict`` is False.  ``termwise`` certifies
    ``beta_{j-1} a_j < 1 / q_{j-1}``.
    """

    lower: BigScalar
    value: BigScalar
    upper: BigScalar
    ok: bool
    strict: bool
    termwise: bool = False
    gap_lower: BigScalar | None = None  # value - lower
    gap_upper: BigScalar | None = None  # upper - value

    def __iter__(self):
        return iter((self.lower, self.value, self.upper, self.ok))


def _ratio_terms(x: EntryStream, qs: list[BigScalar], j: int):
    return _entry_ratios(x, qs[j - 2] if j >= 2 else BigScalar(0), qs[j - 1], j)


def _beta_entry(x: EntryStream, qs: list[BigScalar], j: int) -> BigScalar:
    """``beta_{j-1} a_j`` from already computed ``q``'s."""
    _, _, s = _ratio_terms(x, qs, j)
    return (qs[j - 1] * (1 + s)).reciprocal()


@_with_precision
def sandwich_check(x: EntryStream, j: int) -> SandwichResult:
    if j < 2:
        raise ValueError("the sandwich bounds need j >= 2")
    x = _unit(x)
    qs = _q_list(x, j)
    if len(qs) <= j:
        raise StreamExhausted(f"sandwich at j = {j} needs q_{j}")
    last = x.last_index()
    if last is not None and j - 1 >= last:
        raise StreamExhausted(f"sandwich at j = {j} needs beta_{j - 1}")
    a_j = x[j]
    _, r, s = _ratio_terms(x, qs, j)
    beta_a = (qs[j - 1] * (1 + s)).reciprocal()
    value = beta_a * entry_log(a_j)
    lower, upper = _sandwich_bounds(qs, j)
    zero = BigScalar(0)
    # both gaps are sums of non-negative terms, so their signs are decidable
    log1r = (1 + r).log()
    gap_upper = (qs[j - 1].log() + log1r) / qs[j - 1] + value * s
    gap_lower = (value * (3 - s) + (BigScalar(2).log() - log1r) / qs[j - 1]) / 4
    termwise = s.certainly_gt(zero)
    right = gap_upper.certainly_gt(zero)
    if a_j == 1:
        q_j, q_prev = qs[j].exact_value, qs[j - 1].exact_value
        if q_j is not None and q_prev is not None:
            # log(q_j / q_{j-1}) <= log 2  <=>  q_j <= 2 q_{j-1}
            left = q_j <= 2 * q_prev
            strict = q_j < 2 * q_prev and gap_lower.certainly_gt(zero)
            return SandwichResult(
                lower, value, upper, left and right, strict and right, termwise, gap_lower, gap_upper
            )
    left = gap_lower.certainly_gt(zero)
    if not left and not gap_lower.certainly_le(zero):
        raise InsufficientPrecision(f"sandwich lower bound undecided at j = {j}")
    if not right and not gap_upper.certainly_le(zero):
        raise InsufficientPrecision(f"sandwich upper bound undecided at j = {j}")
    ok = left and right
    return SandwichResult(lower, value, upper, ok, ok, termwise, gap_lower, gap_upper)


@dataclass(frozen=True)
class ClassifyPolicy:
    """Thresholds for the finite-depth trend heuristic.

    ``window`` trailing criterion values must be certifiably monotone; the
    last one must be below ``vanish_tol`` (vanishing) or at least
    ``diverge_min`` (diverging).
    """

    window: int = 3
    vanish_tol: float = 1e-3
    diverge_min: float = 1.0


@dataclass
class TrendReport:
    verdict: str
    depth: int
    values: list[BigScalar] = field(default_factory=list)
    increasing: bool = False
    decreasing: bool = False
    error: str | None = None


def _trend(values: list[BigScalar], policy: ClassifyPolicy, finite: bool) -> TrendReport:
    depth = len(values)
    if finite:
        return TrendReport(FINITE_VERDICT, depth, values)
    rep = TrendReport("inconclusive", depth, values)
    if depth < max(policy.window, 1):
        return rep
    tail = values[-policy.window :]
    rep.increasing = all(b.certainly_gt(a) for a, b in zip(tail, tail[1:]))
    rep.decreasing = all(b.certainly_lt(a) for a, b in zip(tail, tail[1:]))
    last = tail[-1]
    if rep.increasing and last.certainly_ge(BigScalar(policy.diverge_min)):
        rep.verdict = f"diverging at depth {depth}"
    elif rep.decreasing and last.certainly_lt(BigScalar(policy.vanish_tol)):
        rep.verdict = f"vanishing at depth {depth}"
    return rep


@_with_precision
def classify(x: EntryStream, n: int, policy: ClassifyPolicy | None = None) -> TrendReport:
    """Trend of the criterion sequence up to ``n`` (or as far as it can be computed).

    This is a heuristic on a finite prefix, never a statement about the limit.
    """
    policy = policy or ClassifyPolicy()
    x = _unit(x)
    values: list[BigScalar] = []
    error = None
    try:
        values = criterion_sequence(x, n)
    except RenormCFError as exc:
        error = f"{type(exc).__name__}: {exc}"
        # keep whatever prefix is computable
        for m in range(n - 1, 0, -1):
            try:
                values = criterion_sequence(x, m)
                break
            except RenormCFError:
                continue
    rep = _trend(values, policy, x.is_finite)
    rep.error = error
    return rep
