"""Tabular reports behind the command-line subcommands.

Every enclosure becomes two columns, ``<name>_lo`` and ``<name>_hi``, holding
outward-rounded decimal strings.  CSV and JSON carry the same strings.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .cf import EntryStream, _entry_str, entry_scalar
from .criterion import brjuno_terms, classify, lemma_sequences, sandwich_check, _unit
from .errors import (
    DomainError,
    InsufficientPrecision,
    NotRepresentable,
    RenormCFError,
    SpecParseError,
    StreamExhausted,
)
from .numerics import BigScalar, get_precision
from .numspec import format_number_spec, parse_number_spec, to_stream
from .renorm import _marker_k, backward_orbit, k0_stream, sum_report

__all__ = [
    "Report",
    "COLUMNS",
    "SUBCOMMANDS",
    "build_report",
    "to_csv",
    "to_json",
    "exit_status",
]

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECISION = 3


def _pair(name: str) -> list[str]:
    return [f"{name}_lo", f"{name}_hi"]


COLUMNS: dict[str, list[str]] = {
    "expand": ["j", "a", "convergent", *_pair("p"), *_pair("q")],
    "criterion": ["j", "a", *_pair("criterion")],
    "brjuno": ["j", *_pair("term"), *_pair("partial_sum")],
    "lemma": [
        "j",
        "a",
        *_pair("criterion"),
        *_pair("beta_log_next"),
        *_pair("beta_a_log_a"),
        *_pair("beta_a"),
        *_pair("sandwich_lower"),
        *_pair("sandwich_upper"),
        "sandwich_ok",
    ],
    "orbit": ["J", "marker", "block_length", *_pair("k")],
    "orbit-steps": ["v", "block", "branch", *_pair("k")],
    "sum": [
        "J",
        *_pair("direct"),
        *_pair("reordered"),
        *_pair("direct_bracket"),
        *_pair("reordered_bracket"),
        *_pair("tail_u"),
        *_pair("tail_U"),
        *_pair("residual"),
    ],
}

SUBCOMMANDS = ("expand", "criterion", "brjuno", "lemma", "orbit", "sum")


@dataclass
class Report:
    subcommand: str
    columns: list[str]
    rows: list[list[str]] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    error: RenormCFError | None = None


def _enc(v: BigScalar | None) -> list[str]:
    if v is None:
        return ["", ""]
    return list(v.bounds_str())


def _exact_str(v: BigScalar) -> str:
    q = v.exact_value
    if q is None or q.denominator != 1 or q.numerator.bit_length() > 4000:
        return ""
    return str(q.numerator)


def exit_status(error: BaseException | None) -> int:
    """0, 2 for bad input, 3 when precision (or representability) runs out."""
    if error is None:
        return EXIT_OK
    if isinstance(error, (SpecParseError, DomainError)):
        return EXIT_PARSE
    return EXIT_PRECISION


def _expand(x: EntryStream, depth: int, rep: Report) -> None:
    # (p, q) starts at index -1, (p_prev, q_prev) at -2
    p_prev, q_prev = BigScalar(0), BigScalar(1)
    p, q = BigScalar(1), BigScalar(0)
    for j in range(depth + 1):
        if not x.has(j):
            break
        a = entry_scalar(x[j])
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        ps, qs = _exact_str(p), _exact_str(q)
        frac = f"{ps}/{qs}" if ps and qs else ""
        rep.rows.append([str(j), _entry_str(x[j]), frac, *_enc(p), *_enc(q)])


def _criterion(x: EntryStream, depth: int, rep: Report) -> None:
    trend = classify(x, depth)
    u = _unit(x)
    for j, v in enumerate(trend.values, 1):
        rep.rows.append([str(j), _entry_str(u[j]), *_enc(v)])
    rep.metadata["verdict"] = trend.verdict
    if trend.error:
        rep.metadata["error"] = trend.error
        raise InsufficientPrecision(trend.error)


def _brjuno(x: EntryStream, depth: int, rep: Report) -> None:
    total = BigScalar(0)
    for j, term in enumerate(brjuno_terms(x, depth)):
        total = total + term
        rep.rows.append([str(j), *_enc(term), *_enc(total)])


def _lemma(x: EntryStream, depth: int, rep: Report) -> None:
    trace = lemma_sequences(x, depth)
    u = _unit(x)
    for r in trace.records:
        ok = ""
        if r.j >= 2:
            try:
                ok = "true" if sandwich_check(u, r.j).ok else "false"
            except RenormCFError:
                ok = "undecided"
        rep.rows.append(
            [
                str(r.j),
                _entry_str(u[r.j]),
                *_enc(r.criterion),
                *_enc(r.beta_log_next),
                *_enc(r.beta_a_log_a),
                *_enc(r.beta_a),
                *_enc(r.sandwich_lower),
                *_enc(r.sandwich_upper),
                ok,
            ]
        )
    rep.metadata["verdict"] = trace.trend
    if trace.error:
        raise InsufficientPrecision(trace.error)


def _orbit(x: EntryStream, depth: int, rep: Report, steps: bool) -> None:
    rec = backward_orbit(x, depth)
    if steps:
        for st in rec.steps:
            rep.rows.append([str(st.v), str(st.block), st.branch, *_enc(st.k)])
        if rec.skipped_blocks:
            rep.metadata["skipped_blocks"] = rec.skipped_blocks
    else:
        for n, K in enumerate(rec.K):
            marker = rec.markers[n] if n < len(rec.markers) else None
            length = _entry_str(rec.m[n]) if n < len(rec.m) else ""
            rep.rows.append([str(-n), "" if marker is None else str(marker), length, *_enc(K)])
    rep.metadata["terminated"] = rec.terminated
    if rec.error:
        raise InsufficientPrecision(rec.error)


def _sum(x: EntryStream, depth: int, rep: Report, a0: Fraction, A0: Fraction) -> None:
    res = sum_report(x, -depth)
    k = _marker_k(k0_stream(x), 0)
    shift = BigScalar(A0) - k * BigScalar(a0)
    for row in res.rows:
        residual = None if row.direct is None else shift - row.direct
        rep.rows.append(
            [
                str(row.J),
                *_enc(row.direct),
                *_enc(row.reordered),
                *_enc(row.direct_bracket),
                *_enc(row.reordered_bracket),
                *_enc(row.tail_u),
                *_enc(row.tail_U),
                *_enc(residual),
            ]
        )
    rep.metadata["complete"] = res.complete
    if res.error:
        raise InsufficientPrecision(res.error)


def build_report(
    subcommand: str,
    spec_text: str,
    depth: int,
    *,
    steps: bool = False,
    a0: Fraction = Fraction(0),
    A0: Fraction = Fraction(0),
    version: str = "",
) -> Report:
    """Run one subcommand; errors are stored on the report with the rows computed so far."""
    if subcommand not in SUBCOMMANDS:
        raise DomainError(f"unknown subcommand {subcommand!r}")
    key = "orbit-steps" if subcommand == "orbit" and steps else subcommand
    rep = Report(subcommand, list(COLUMNS[key]))
    rep.metadata = {
        "subcommand": subcommand,
        "spec": spec_text,
        "depth": depth,
        "precision": get_precision(),
        "version": version,
    }
    try:
        spec = parse_number_spec(spec_text)
        rep.metadata["spec"] = format_number_spec(spec)
        x = to_stream(spec)
        if subcommand == "expand":
            _expand(x, depth, rep)
        elif subcommand == "criterion":
            _criterion(x, depth, rep)
        elif subcommand == "brjuno":
            _brjuno(x, depth, rep)
        elif subcommand == "lemma":
            _lemma(x, depth, rep)
        elif subcommand == "orbit":
            _orbit(x, depth, rep, steps)
        else:
            if a0 or A0:
                rep.metadata["a0"] = str(a0)
                rep.metadata["A0"] = str(A0)
            _sum(x, depth, rep, a0, A0)
    except StreamExhausted:
        # a finite number simply has fewer rows
        pass
    except (RenormCFError, OSError) as exc:
        if isinstance(exc, OSError):
            exc = DomainError(str(exc))
        rep.error = exc
        rep.metadata.setdefault("error", f"{type(exc).__name__}: {exc}")
    return rep


def to_csv(rep: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(rep.columns)
    w.writerows(rep.rows)
    return buf.getvalue()


def to_json(rep: Report) -> str:
    return json.dumps(
        {"metadata": rep.metadata, "columns": rep.columns, "rows": rep.rows}, indent=2
    ) + "\n"


def error_payload(rep_or_exc) -> dict:
    exc = rep_or_exc.error if isinstance(rep_or_exc, Report) else rep_or_exc
    out = {
        "error": type(exc).__name__,
        "message": str(exc),
        "exit_status": exit_status(exc),
    }
    if isinstance(exc, SpecParseError):
        out["position"] = exc.position
    if isinstance(exc, NotRepresentable):
        out["hint"] = "an entry is beyond the nested exponent form"
    return out
