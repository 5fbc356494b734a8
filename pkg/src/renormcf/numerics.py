"""Validated scalars that survive astronomically large continued-fraction data.

A :class:`BigScalar` is one of three things:

* an exact rational (``Fraction``), kept while numerator and denominator fit
  in the promotion threshold (default ``2**16`` bits);
* an outward-rounded interval with binary floating-point endpoints;
* a log-space magnitude ``sign * exp(L)`` where ``L`` is itself a
  ``BigScalar``.  Nesting gives as many levels of ``exp`` as a value needs,
  so ``2**(2**(2**513))`` is stored as ``exp(exp(L))`` with ``L`` a plain
  interval.

Every operation returns an enclosure of the true result.  Endpoints are
computed with mpmath's directed-rounding interval primitives.  For values
above 1 the working precision is raised by the binary exponent of the value,
which keeps logarithms accurate in the absolute sense; that in turn keeps
``exp(L)`` accurate in the relative sense at every level.

Precision and the promotion threshold live in context variables, so they
are per-thread and per-task.  Use :func:`working_precision` and
:func:`promotion_threshold` to change them.
"""

from __future__ import annotations

import math
import os
from contextlib import contextmanager
from contextvars import ContextVar
from decimal import MAX_EMAX, MIN_EMIN, ROUND_CEILING, ROUND_FLOOR, Context, Decimal
from fractions import Fraction

from mpmath.libmp import (
    fzero,
    from_float,
    from_int,
    from_man_exp,
    from_rational,
    mpf_abs,
    mpf_floor,
    mpf_le,
    mpf_div,
    mpf_ln2,
    mpf_lt,
    mpf_mul,
    mpf_neg,
    mpf_sub,
    to_float,
)
from mpmath.libmp.libmpi import (
    mpi_add,
    mpi_div,
    mpi_exp,
    mpi_log,
    mpi_mul,
    mpi_neg,
    mpi_pi,
    mpi_pow_int,
    mpi_sqrt,
    mpi_sub,
)

from .errors import DomainError, InsufficientPrecision

__all__ = [
    "BigScalar",
    "Enclosure",
    "DEFAULT_PRECISION",
    "DEFAULT_PROMOTION_BITS",
    "get_precision",
    "get_promotion_bits",
    "working_precision",
    "promotion_threshold",
    "hull",
    "log_gamma",
    "stirling_parts",
]

DEFAULT_PRECISION = 256
DEFAULT_PROMOTION_BITS = 1 << 16
_GUARD = 8
_ZERO_EXP = -(1 << 62)

_precision: ContextVar[int | None] = ContextVar("renormcf_precision", default=None)
_promotion: ContextVar[int] = ContextVar(
    "renormcf_promotion_bits", default=DEFAULT_PROMOTION_BITS
)


def get_precision() -> int:
    """Working precision in bits (``RENORM_CF_PRECISION`` supplies the default)."""
    bits = _precision.get()
    if bits is None:
        bits = int(os.environ.get("RENORM_CF_PRECISION", DEFAULT_PRECISION))
    return bits


def get_promotion_bits() -> int:
    return _promotion.get()


@contextmanager
def working_precision(bits: int):
    if int(bits) < 16:
        raise DomainError(f"precision must be at least 16 bits, got {bits}")
    token = _precision.set(int(bits))
    try:
        yield int(bits)
    finally:
        _precision.reset(token)


@contextmanager
def promotion_threshold(bits: int):
    """Temporarily change the size (in bits) above which exact values go inexact."""
    if int(bits) < 8:
        raise DomainError(f"promotion threshold must be at least 8 bits, got {bits}")
    token = _promotion.set(int(bits))
    try:
        yield int(bits)
    finally:
        _promotion.reset(token)


# --- raw interval layer -------------------------------------------------------
# An interval is a pair (lo, hi) of raw mpmath mpf tuples.


def _exp2(x) -> int:
    # |x| < 2**_exp2(x)
    if not x[1]:
        return _ZERO_EXP
    return x[2] + x[3]


def _top(iv) -> int:
    return max(_exp2(iv[0]), _exp2(iv[1]))


def _bot(iv) -> int:
    # lower bound on the binary exponent of the smallest |endpoint| (sign-definite iv)
    near = iv[0] if iv[0][0] == 0 else iv[1]
    return _exp2(near) - 1


def _eff(extra: int) -> int:
    cap = 2 * _promotion.get()
    return get_precision() + _GUARD + min(max(extra, 0), cap)


def _iadd(a, b):
    return mpi_add(a, b, _eff(max(_top(a), _top(b)) + 1))


def _isub(a, b):
    return mpi_sub(a, b, _eff(max(_top(a), _top(b)) + 1))


def _imul(a, b):
    return mpi_mul(a, b, _eff(_top(a) + _top(b)))


def _idiv(a, b):
    return mpi_div(a, b, _eff(_top(a) - _bot(b) + 1))


def _ilog(a):
    e = max(abs(_top(a)), abs(_bot(a)))
    return mpi_log(a, _eff(e.bit_length() + 1))


def _iexp(a):
    return mpi_exp(a, _eff(0))


def _isqrt(a):
    return mpi_sqrt(a, _eff((_top(a) + 1) // 2))


def _iabs(a):
    lo, hi = a
    if lo[0] == 0:
        return a
    if hi[0] == 1 or hi == fzero:
        return (mpf_neg(hi), mpf_neg(lo))
    return (fzero, _mpf_max(mpf_abs(lo), hi))


def _mpf_max(x, y):
    return y if mpf_lt(x, y) else x


def _mpf_min(x, y):
    return x if mpf_lt(x, y) else y


def _frac_iv(q: Fraction):
    n, d = q.numerator, q.denominator
    if d == 1:
        v = from_int(n)
        return (v, v)
    p = _eff(n.bit_length() - d.bit_length() + 1)
    return (from_rational(n, d, p, "f"), from_rational(n, d, p, "c"))


def _mpf_fraction(x) -> Fraction:
    sign, man, exp, _ = x
    man = int(man)
    if sign:
        man = -man
    if exp >= 0:
        return Fraction(man << exp)
    return Fraction(man, 1 << -exp)


def _iv_sign(iv) -> int | None:
    lo, hi = iv
    if lo == fzero and hi == fzero:
        return 0
    if lo[0] == 0 and lo[1]:
        return 1
    if hi[0] == 1:
        return -1
    return None


def _log_threshold():
    # T * ln 2, only used to choose a representation, never for a bound
    return from_float(_promotion.get() * 0.6931471805599453)


def _to_raw(value, rounding: str):
    if isinstance(value, BigScalar):
        iv = value._as_iv()
        if iv is None:
            raise DomainError("log-space value cannot be used as an interval endpoint")
        return iv[0] if rounding == "f" else iv[1]
    if hasattr(value, "_mpf_"):
        return value._mpf_
    q = Fraction(value)
    iv = _frac_iv(q)
    return iv[0] if rounding == "f" else iv[1]


# --- the scalar ----------------------------------------------------------------


class BigScalar:
    """Exact rational, outward-rounded interval, or nested log-space magnitude.

    Construct exact values with ``BigScalar(3)`` or ``BigScalar(Fraction(1, 3))``,
    intervals with :meth:`interval`, and log-space values with :meth:`from_log`.

    Equality (``==``) is exact equality and only holds between exact values;
    use :meth:`certainly_lt`, :meth:`overlaps` and friends for enclosures.
    """

    __slots__ = ("_q", "_iv", "_sign", "_log")

    def __new__(cls, value=0):
        if isinstance(value, BigScalar):
            return value
        if hasattr(value, "_mpf_"):
            return cls._raw_iv((value._mpf_, value._mpf_))
        return cls._of_fraction(Fraction(value))

    # -- raw constructors

    @classmethod
    def _blank(cls):
        self = object.__new__(cls)
        self._q = None
        self._iv = None
        self._sign = None
        self._log = None
        return self

    @classmethod
    def _raw_exact(cls, q: Fraction):
        self = cls._blank()
        self._q = q
        return self

    @classmethod
    def _raw_iv(cls, iv):
        self = cls._blank()
        self._iv = iv
        return self

    @classmethod
    def _raw_log(cls, sign: int, log: BigScalar):
        self = cls._blank()
        self._sign = sign
        self._log = log
        return self

    @classmethod
    def _of_fraction(cls, q: Fraction):
        limit = _promotion.get()
        if max(q.numerator.bit_length(), q.denominator.bit_length()) <= limit:
            return cls._raw_exact(q)
        return cls._from_iv(_frac_iv(q))

    @classmethod
    def _from_iv(cls, iv):
        s = _iv_sign(iv)
        if s is None or s == 0:
            return cls._raw_iv(iv)
        limit = _promotion.get()
        mag = iv if s > 0 else mpi_neg(iv)
        if _bot(mag) > limit or _top(mag) < -limit:
            return cls._raw_log(s, cls._from_iv(_ilog(mag)))
        return cls._raw_iv(iv)

    # -- public constructors

    @classmethod
    def exact(cls, value) -> BigScalar:
        return cls._of_fraction(Fraction(value))

    @classmethod
    def interval(cls, lo, hi) -> BigScalar:
        """Enclosure ``[lo, hi]``; endpoints are rounded outward if needed."""
        iv = (_to_raw(lo, "f"), _to_raw(hi, "c"))
        if mpf_lt(iv[1], iv[0]):
            raise DomainError("interval lower endpoint exceeds upper endpoint")
        return cls._from_iv(iv)

    @classmethod
    def from_log(cls, log, sign: int = 1) -> BigScalar:
        """The value ``sign * exp(log)``."""
        L = _coerce(log)
        if sign not in (1, -1):
            raise DomainError("sign must be +1 or -1")
        if L._q is not None and L._q == 0:
            return cls._raw_exact(Fraction(sign))
        iv = L._as_iv()
        if iv is not None:
            bound = _log_threshold()
            if mpf_le(iv[1], bound) and mpf_le(mpf_neg(bound), iv[0]):
                e = _iexp(iv)
                return cls._raw_iv(e if sign > 0 else mpi_neg(e))
        return cls._raw_log(sign, L)

    @classmethod
    def pow2(cls, e: int) -> BigScalar:
        """Exactly ``2**e`` (log-space once past the promotion threshold)."""
        if abs(e) <= _promotion.get():
            return cls._raw_exact(Fraction(2) ** e)
        v = from_man_exp(1, e)
        return cls._from_iv((v, v))

    @classmethod
    def pi(cls) -> BigScalar:
        return cls._raw_iv(mpi_pi(_eff(2)))

    @classmethod
    def ln2(cls, scale_bits: int = 0) -> BigScalar:
        """ln 2, with ``scale_bits`` extra bits for callers about to multiply it up."""
        p = _eff(scale_bits)
        return cls._raw_iv((mpf_ln2(p, "f"), mpf_ln2(p, "c")))

    # -- inspection

    @property
    def kind(self) -> str:
        if self._q is not None:
            return "exact"
        if self._iv is not None:
            return "interval"
        return "log"

    @property
    def is_exact(self) -> bool:
        return self._q is not None

    @property
    def exact_value(self) -> Fraction | None:
        return self._q

    @property
    def level(self) -> int:
        """Number of nested ``exp`` layers in the representation."""
        return 0 if self._log is None else 1 + self._log.level

    @property
    def log_part(self) -> BigScalar | None:
        return self._log

    def is_zero(self) -> bool:
        if self._q is not None:
            return self._q == 0
        return self._iv is not None and _iv_sign(self._iv) == 0

    def sign_or_none(self) -> int | None:
        if self._q is not None:
            return (self._q > 0) - (self._q < 0)
        if self._iv is not None:
            return _iv_sign(self._iv)
        return self._sign

    def sign(self) -> int:
        s = self.sign_or_none()
        if s is None:
            raise InsufficientPrecision("sign of enclosure is undetermined")
        return s

    def _as_iv(self):
        if self._q is not None:
            return _frac_iv(self._q)
        return self._iv

    def _polar(self):
        """(sign, log|x|) for sign-definite values; (None, log max|x|) otherwise."""
        if self._log is not None:
            return self._sign, self._log
        s = self.sign_or_none()
        if s == 0:
            raise DomainError("log of zero")
        if self._q is not None:
            return s, _log_exact(abs(self._q))
        if s is None:
            top = _mpf_max(mpf_abs(self._iv[0]), mpf_abs(self._iv[1]))
            return None, BigScalar._from_iv(_ilog((top, top)))
        mag = self._iv if s > 0 else mpi_neg(self._iv)
        return s, BigScalar._from_iv(_ilog(mag))

    # -- arithmetic

    def __neg__(self):
        if self._q is not None:
            return BigScalar._raw_exact(-self._q)
        if self._iv is not None:
            return BigScalar._raw_iv(mpi_neg(self._iv))
        return BigScalar._raw_log(-self._sign, self._log)

    def __pos__(self):
        return self

    def __abs__(self):
        if self._q is not None:
            return BigScalar._raw_exact(abs(self._q))
        if self._iv is not None:
            return BigScalar._raw_iv(_iabs(self._iv))
        return BigScalar._raw_log(1, self._log)

    def __add__(self, other):
        other = _coerce(other)
        if self._q is not None and other._q is not None:
            return BigScalar._of_fraction(self._q + other._q)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        a, b = self._as_iv(), other._as_iv()
        if a is not None and b is not None:
            return BigScalar._from_iv(_iadd(a, b))
        return _add_log(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if self._q is not None and other._q is not None:
            return BigScalar._of_fraction(self._q * other._q)
        if self.is_zero() or other.is_zero():
            return BigScalar._raw_exact(Fraction(0))
        a, b = self._as_iv(), other._as_iv()
        if a is not None and b is not None:
            return BigScalar._from_iv(_imul(a, b))
        return _mul_log(self, other)

    __rmul__ = __mul__

    def reciprocal(self):
        if self._q is not None:
            if self._q == 0:
                raise ZeroDivisionError("reciprocal of exact zero")
            return BigScalar._of_fraction(1 / self._q)
        if self._iv is not None:
            s = _iv_sign(self._iv)
            if s == 0:
                raise ZeroDivisionError("reciprocal of zero")
            if s is None:
                raise InsufficientPrecision("reciprocal of an enclosure containing zero")
            one = from_int(1)
            return BigScalar._from_iv(_idiv((one, one), self._iv))
        return BigScalar.from_log(-self._log, self._sign)

    def __truediv__(self, other):
        other = _coerce(other)
        if self._q is not None and other._q is not None:
            if other._q == 0:
                raise ZeroDivisionError("division by exact zero")
            return BigScalar._of_fraction(self._q / other._q)
        a, b = self._as_iv(), other._as_iv()
        if a is not None and b is not None:
            s = _iv_sign(b)
            if s == 0:
                raise ZeroDivisionError("division by zero")
            if s is None:
                raise InsufficientPrecision("division by an enclosure containing zero")
            return BigScalar._from_iv(_idiv(a, b))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported; use exp/log")
        if n < 0:
            return self.reciprocal() ** (-n)
        if n == 0:
            return BigScalar._raw_exact(Fraction(1))
        if self._q is not None:
            return BigScalar._of_fraction(self._q**n)
        if self._iv is not None:
            return BigScalar._from_iv(mpi_pow_int(self._iv, n, _eff(_top(self._iv) * n)))
        return BigScalar.from_log(self._log * n, self._sign**n)

    def log(self) -> BigScalar:
        s = self.sign_or_none()
        if s is None:
            raise InsufficientPrecision("log of an enclosure that may be non-positive")
        if s <= 0:
            raise DomainError("log of a non-positive value")
        return self._polar()[1]

    def exp(self) -> BigScalar:
        return BigScalar.from_log(self, 1)

    def sqrt(self) -> BigScalar:
        s = self.sign_or_none()
        if s is None or s < 0:
            raise DomainError("sqrt of a possibly negative value")
        if self._q is not None:
            n, d = self._q.numerator, self._q.denominator
            rn, rd = math.isqrt(n), math.isqrt(d)
            if rn * rn == n and rd * rd == d:
                return BigScalar._raw_exact(Fraction(rn, rd))
            return BigScalar._from_iv(_isqrt(_frac_iv(self._q)))
        if self._iv is not None:
            return BigScalar._from_iv(_isqrt(self._iv))
        return BigScalar.from_log(self._log / 2, 1)

    def floor(self) -> int:
        """The integer part, when the enclosure determines it."""
        if self._q is not None:
            return math.floor(self._q)
        if self._iv is None:
            raise InsufficientPrecision("floor of a log-space value is not materializable")
        lo = _mpf_fraction(mpf_floor(self._iv[0]))
        hi = _mpf_fraction(mpf_floor(self._iv[1]))
        if lo != hi:
            raise InsufficientPrecision("enclosure straddles an integer")
        return int(lo)

    # -- bounds and comparison

    def lower(self) -> BigScalar:
        if self._q is not None:
            return self
        if self._iv is not None:
            return BigScalar._raw_iv((self._iv[0], self._iv[0]))
        if self._sign > 0:
            return BigScalar.from_log(self._log.lower(), 1)
        return BigScalar.from_log(self._log.upper(), -1)

    def upper(self) -> BigScalar:
        if self._q is not None:
            return self
        if self._iv is not None:
            return BigScalar._raw_iv((self._iv[1], self._iv[1]))
        if self._sign > 0:
            return BigScalar.from_log(self._log.upper(), 1)
        return BigScalar.from_log(self._log.lower(), -1)

    def _cmp(self, other) -> int | None:
        """-1 / 1 when the order is certain, 0 for identical points, None otherwise."""
        other = _coerce(other)
        if self._q is not None and other._q is not None:
            return (self._q > other._q) - (self._q < other._q)
        a, b = self._as_iv(), other._as_iv()
        if a is not None and b is not None:
            if mpf_lt(a[1], b[0]):
                return -1
            if mpf_lt(b[1], a[0]):
                return 1
            if a[0] == a[1] == b[0] == b[1]:
                return 0
            return None
        sx, sy = self.sign_or_none(), other.sign_or_none()
        if sx is not None and sy is not None:
            if sx != sy:
                return -1 if sx < sy else 1
            if sx == 0:
                return 0
            c = self._polar()[1]._cmp(other._polar()[1])
            return None if c is None else sx * c
        # one side straddles zero and is a plain interval; the other is log-space
        if sx is None:
            _, up = self._polar()
            return -sy if _certainly_lt(up, other._polar()[1]) else None
        _, up = other._polar()
        return sx if _certainly_lt(up, self._polar()[1]) else None

    def certainly_lt(self, other) -> bool:
        return self._cmp(other) == -1

    def certainly_gt(self, other) -> bool:
        return self._cmp(other) == 1

    def certainly_le(self, other) -> bool:
        other = _coerce(other)
        if self._q is not None and other._q is not None:
            return self._q <= other._q
        a, b = self._as_iv(), other._as_iv()
        if a is not None and b is not None:
            return mpf_le(a[1], b[0])
        return self._cmp(other) in (-1, 0)

    def certainly_ge(self, other) -> bool:
        return _coerce(other).certainly_le(self)

    def compare(self, other) -> int:
        """Validated three-way comparison; raises when the enclosures overlap."""
        c = self._cmp(other)
        if c is None:
            raise InsufficientPrecision("enclosures overlap; comparison undecided")
        return c

    def overlaps(self, other) -> bool:
        c = self._cmp(other)
        return c is None or c == 0

    def contains(self, other) -> bool:
        """True when ``other`` (a point or an enclosure) certainly lies inside."""
        other = _coerce(other)
        return self.lower().certainly_le(other.lower()) and other.upper().certainly_le(
            self.upper()
        )

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._q is not None and self._q == other
        if isinstance(other, BigScalar):
            return self._q is not None and other._q is not None and self._q == other._q
        return NotImplemented

    __hash__ = None

    # -- size of the enclosure

    def width(self) -> BigScalar:
        """Upper bound on ``hi - lo``."""
        if self._q is not None:
            return BigScalar._raw_exact(Fraction(0))
        if self._iv is not None:
            w = mpf_sub(self._iv[1], self._iv[0], _eff(_top(self._iv)), "c")
            return BigScalar._of_fraction(_mpf_fraction(w))
        return (self.upper() - self.lower()).upper()

    def relative_width(self) -> float:
        """Upper bound on ``(hi - lo) / min|x|`` as a float (``inf`` if unbounded)."""
        if self._q is not None:
            return 0.0
        if self._iv is not None:
            s = _iv_sign(self._iv)
            if s is None:
                return math.inf
            if s == 0:
                return 0.0
            mag = self._iv if s > 0 else mpi_neg(self._iv)
            w = mpf_sub(mag[1], mag[0], _eff(_top(mag)), "c")
            return to_float(mpf_div(w, mag[0], 64, "c"), rnd="u")
        L = self._log
        if L._log is not None:
            return math.inf
        w = float(L.width().upper())
        return math.inf if w > 700 else math.expm1(w) * (1 + 1e-12)

    # -- conversion

    def __float__(self):
        if self._q is not None:
            try:
                return float(self._q)
            except OverflowError:
                return math.copysign(math.inf, self._q)
        if self._iv is not None:
            return (to_float(self._iv[0]) + to_float(self._iv[1])) / 2
        L = float(self._log)
        if L > 709.0:
            return self._sign * math.inf
        if L < -745.0:
            return self._sign * 0.0
        return self._sign * math.exp(L)

    def bounds_str(self, digits: int | None = None) -> tuple[str, str]:
        """Decimal strings for the endpoints, rounded outward.

        Log-space values print as ``exp(...)`` around their log bounds, so the
        strings stay short and still order correctly.
        """
        if digits is None:
            digits = math.ceil(get_precision() * math.log10(2)) + 6
        if self._q is not None:
            if self._q.denominator == 1 and self._q.numerator.bit_length() < 3.3 * digits:
                s = str(self._q.numerator)
                return s, s
            iv = _frac_iv(self._q)
            return _dec(iv[0], digits, ROUND_FLOOR), _dec(iv[1], digits, ROUND_CEILING)
        if self._iv is not None:
            return (
                _dec(self._iv[0], digits, ROUND_FLOOR),
                _dec(self._iv[1], digits, ROUND_CEILING),
            )
        lo, hi = self._log.bounds_str(digits)
        if self._sign > 0:
            return f"exp({lo})", f"exp({hi})"
        return f"-exp({hi})", f"-exp({lo})"

    def __repr__(self):
        if self._q is not None:
            return f"BigScalar({self._q})"
        lo, hi = self.bounds_str(20)
        return f"BigScalar([{lo}, {hi}])"


Enclosure = BigScalar
"""An inexact :class:`BigScalar`; the names are interchangeable."""


def _coerce(x) -> BigScalar:
    if isinstance(x, BigScalar):
        return x
    return BigScalar(x)


def _certainly_lt(x: BigScalar, y: BigScalar) -> bool:
    return x._cmp(y) == -1


def _log_exact(q: Fraction) -> BigScalar:
    if q == 1:
        return BigScalar._raw_exact(Fraction(0))
    return BigScalar._from_iv(_ilog(_frac_iv(q)))


def _dec(x, digits: int, rounding) -> str:
    sign, man, exp, _ = x
    if not man:
        return "0"
    man = int(man)
    if sign:
        man = -man
    ctx = Context(prec=digits, rounding=rounding, Emax=MAX_EMAX, Emin=MIN_EMIN)
    if exp >= 0:
        d = ctx.create_decimal(man << exp)
    else:
        d = ctx.divide(Decimal(man), Decimal(1 << -exp))
    return str(d)


def _pow2_bound(x: BigScalar) -> int:
    """An exponent m with |x| <= 2**m, for log-space x below 1."""
    floor_m = -4 * _promotion.get()
    iv = x._log._as_iv()
    if iv is None:
        return floor_m
    p = _eff(0)
    q = mpf_div(iv[1], mpf_ln2(p, "c"), p, "c")
    m = int(_mpf_fraction(mpf_floor(q))) + 2
    return max(m, floor_m)


def _tiny_iv(x: BigScalar):
    m = _pow2_bound(x)
    bound = from_man_exp(1, m)
    return (fzero, bound) if x._sign > 0 else (mpf_neg(bound), fzero)


def _is_tiny(x: BigScalar) -> bool:
    return x._log is not None and x._log.certainly_lt(0)


def _add_log(x: BigScalar, y: BigScalar) -> BigScalar:
    for a, b in ((x, y), (y, x)):
        if _is_tiny(a) and b._log is None:
            return BigScalar._from_iv(_iadd(_tiny_iv(a), b._as_iv()))
    sa, La = x._polar()
    sb, Lb = y._polar()
    if sa is not None and _certainly_lt(Lb, La):
        return _shifted_sum(sa, La, sb, Lb)
    if sb is not None and _certainly_lt(La, Lb):
        return _shifted_sum(sb, Lb, sa, La)
    if sa is None or sb is None:
        raise InsufficientPrecision("sum of a log-space value and an interval around zero")
    if sa != sb:
        raise InsufficientPrecision("cancellation between overlapping log-space magnitudes")
    return BigScalar.from_log(La + (1 + (Lb - La).exp()).log(), sa)


def _shifted_sum(sa, La, sb, Lb) -> BigScalar:
    # a + b = a * (1 + b/a) with |b/a| < 1
    r = (Lb - La).exp()
    if sb is None:
        w = hull(1 - r, 1 + r)
    elif sb == sa:
        w = 1 + r
    else:
        w = 1 - r
    return BigScalar.from_log(La + w.log(), sa)


def _mul_log(x: BigScalar, y: BigScalar) -> BigScalar:
    sa, La = x._polar()
    sb, Lb = y._polar()
    if sa is None or sb is None:
        up, (s, L) = (La, (sb, Lb)) if sa is None else (Lb, (sa, La))
        if s is not None and L.certainly_lt(0):
            bound = (up + L).exp()
            if bound._log is None:
                b = bound._as_iv()[1]
            else:
                b = from_man_exp(1, _pow2_bound(bound))
            return BigScalar._raw_iv((mpf_neg(b), b))
        raise InsufficientPrecision("product of a huge value and an interval around zero")
    return BigScalar.from_log(La + Lb, sa * sb)


def hull(*values) -> BigScalar:
    """Smallest representable enclosure containing all arguments."""
    xs = [_coerce(v) for v in values]
    if not xs:
        raise ValueError("hull of nothing")
    if all(x._q is not None for x in xs) and len({x._q for x in xs}) == 1:
        return xs[0]
    ivs = [x._as_iv() for x in xs]
    if any(iv is not None for iv in ivs):
        ivs = [_tiny_iv(x) if iv is None and _is_tiny(x) else iv for x, iv in zip(xs, ivs)]
    if all(iv is not None for iv in ivs):
        lo = ivs[0][0]
        hi = ivs[0][1]
        for iv in ivs[1:]:
            lo = _mpf_min(lo, iv[0])
            hi = _mpf_max(hi, iv[1])
        return BigScalar._from_iv((lo, hi))
    signs = {x.sign_or_none() for x in xs}
    if len(signs) == 1 and signs <= {1, -1}:
        s = signs.pop()
        return BigScalar.from_log(hull(*[x._polar()[1] for x in xs]), s)
    raise InsufficientPrecision("hull mixes signs across log-space values")


# --- log-gamma -----------------------------------------------------------------


def _bernoulli(n: int) -> Fraction:
    from mpmath import bernfrac

    p, q = bernfrac(n)
    return Fraction(int(p), int(q))


def _stirling_start() -> int:
    return get_precision() // 5 + 10


def stirling_parts(z) -> tuple[BigScalar, BigScalar]:
    """``(log z, R)`` with ``log Gamma(z) = z (log z - 1) + R`` for ``z >= prec/5 + 10``.

    ``R = -log(z)/2 + log(2 pi)/2 + (Bernoulli series)`` is tiny next to the
    leading part, so callers can divide the leading part by ``z`` without
    first forming (and cancelling) ``log Gamma(z)``.
    """
    z = _coerce(z)
    if not z.certainly_ge(_stirling_start()):
        raise DomainError("stirling_parts needs a large argument")
    prec = get_precision()
    target = BigScalar(Fraction(1, 1 << (prec + 10)))
    lz = z.log()
    rest = (2 * BigScalar.pi()).log() / 2 - lz / 2
    zsq = z * z
    power = z
    k = 1
    while True:
        term = BigScalar(_bernoulli(2 * k) / (2 * k * (2 * k - 1))) / power
        if k > 1 and abs(term).certainly_lt(target) or k > 4 * prec:
            # the remainder has the sign of the first omitted term and is smaller
            rest = rest + hull(0, term)
            break
        rest = rest + term
        power = power * zsq
        k += 1
    return lz, rest


def log_gamma(z) -> BigScalar:
    """Enclosure of ``log Gamma(z)`` for ``z > 0`` via Stirling's series.

    Small arguments are shifted up with ``Gamma(z) = Gamma(z + n) / (z (z+1) ... (z+n-1))``
    first.  The series is cut where its terms drop below the working precision;
    for real ``z > 0`` the remainder has the sign of the first omitted term
    and is smaller in magnitude, so that term's hull with 0 encloses it.
    """
    z = _coerce(z)
    if not z.certainly_gt(0):
        raise DomainError("log_gamma needs z > 0")
    start = _stirling_start()
    shift = BigScalar(0)
    if z.certainly_lt(start):
        n = start - math.floor(float(z.lower()))
        prod = BigScalar(1)
        for i in range(n):
            prod = prod * (z + i)
        shift = prod.log()
        z = z + n
    lz, rest = stirling_parts(z)
    # z (log z - 1) rather than z log z - z: no cancellation for huge z
    return z * (lz - 1) + rest - shift
