"""Certified arbitrary-precision numeric kernel.

Exact rationals (via `fractions.Fraction`), outward-rounded interval
enclosures with dyadic endpoints, exactly-representable target expressions
(rational, sqrt of rational, log of rational), and comparisons that are
either certified or refuse to answer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from math import isqrt

import gmpy2

Rational = Fraction

DEFAULT_INITIAL_BITS = 256
DEFAULT_CAP_BITS = 1 << 20


class DomainError(ValueError):
    """Argument outside the mathematical domain (sqrt of negative, log of nonpositive)."""


class PrecisionExhaustedError(ArithmeticError):
    """A certified decision could not be reached within the bit budget."""

    def __init__(self, message: str, bits: int):
        super().__init__(message)
        self.bits = bits


class Comparison(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1
    UNDECIDED = 2


def scale_floor(x: Fraction, bits: int) -> int:
    """floor(x * 2**bits), exact."""
    return (x.numerator << bits) // x.denominator


def scale_ceil(x: Fraction, bits: int) -> int:
    """ceil(x * 2**bits), exact."""
    return -((-x.numerator << bits) // x.denominator)


@dataclass(frozen=True)
class PrecisionInterval:
    """A certified enclosure [lo, hi] of a real value.

    `bits` records the precision the enclosure was requested at; after an
    eval at `bits` the width satisfies hi - lo <= 2**(1-bits) * max(1, |hi|).
    Arithmetic between intervals is exact on the rational endpoints, so it
    can only preserve or grow enclosures, never lose containment.
    """

    lo: Fraction
    hi: Fraction
    bits: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"inverted interval: {self.lo} > {self.hi}")

    @classmethod
    def point(cls, value: Fraction | int, bits: int = 0) -> "PrecisionInterval":
        v = Fraction(value)
        return cls(v, v, bits)

    @classmethod
    def from_scaled(cls, lo: int, hi: int, scale_bits: int, bits: int) -> "PrecisionInterval":
        """Build from integer bounds lo..hi in units of 2**-scale_bits."""
        d = 1 << scale_bits
        return cls(Fraction(lo, d), Fraction(hi, d), bits)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: Fraction | int) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "PrecisionInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def overlaps(self, other: "PrecisionInterval") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def __add__(self, other: "PrecisionInterval") -> "PrecisionInterval":
        return PrecisionInterval(self.lo + other.lo, self.hi + other.hi,
                                 min(self.bits, other.bits))

    def __sub__(self, other: "PrecisionInterval") -> "PrecisionInterval":
        return PrecisionInterval(self.lo - other.hi, self.hi - other.lo,
                                 min(self.bits, other.bits))

    def __neg__(self) -> "PrecisionInterval":
        return PrecisionInterval(-self.hi, -self.lo, self.bits)

    def __mul__(self, other: "PrecisionInterval") -> "PrecisionInterval":
        prods = [self.lo * other.lo, self.lo * other.hi,
                 self.hi * other.lo, self.hi * other.hi]
        return PrecisionInterval(min(prods), max(prods), min(self.bits, other.bits))

    def __truediv__(self, other: "PrecisionInterval") -> "PrecisionInterval":
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("divisor interval contains zero")
        quots = [self.lo / other.lo, self.lo / other.hi,
                 self.hi / other.lo, self.hi / other.hi]
        return PrecisionInterval(min(quots), max(quots), min(self.bits, other.bits))

    def abs(self) -> "PrecisionInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return PrecisionInterval(Fraction(0), max(-self.lo, self.hi), self.bits)

    def scale_rational(self, c: Fraction) -> "PrecisionInterval":
        if c >= 0:
            return PrecisionInterval(self.lo * c, self.hi * c, self.bits)
        return PrecisionInterval(self.hi * c, self.lo * c, self.bits)


_TARGET_RE = re.compile(r"^(sqrt|log)\((.+)\)$", re.IGNORECASE)


@dataclass(frozen=True)
class TargetExpr:
    """An exactly-representable real target: p/q, sqrt(p/q) or log(p/q)."""

    kind: str          # 'rational' | 'sqrt' | 'log'
    arg: Fraction      # the rational itself, the radicand, or the log argument

    def __post_init__(self):
        if self.kind not in ("rational", "sqrt", "log"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if self.kind == "sqrt" and self.arg < 0:
            raise DomainError("sqrt of negative rational")
        if self.kind == "log" and self.arg <= 0:
            raise DomainError("log of nonpositive rational")

    @classmethod
    def rational(cls, value) -> "TargetExpr":
        return cls("rational", Fraction(value))

    @classmethod
    def sqrt_of(cls, value) -> "TargetExpr":
        return cls("sqrt", Fraction(value))

    @classmethod
    def log_of(cls, value) -> "TargetExpr":
        return cls("log", Fraction(value))

    @classmethod
    def parse(cls, text: str) -> "TargetExpr":
        s = re.sub(r"\s+", "", text)
        if not s:
            raise ValueError("empty target expression")
        m = _TARGET_RE.match(s)
        if m:
            fn, inner = m.group(1).lower(), m.group(2)
            return cls(("sqrt" if fn == "sqrt" else "log"), _parse_rational(inner))
        return cls("rational", _parse_rational(s))

    def __str__(self) -> str:
        if self.kind == "rational":
            return str(self.arg)
        return f"{self.kind}({self.arg})"

    def is_rational(self) -> bool:
        return self.kind == "rational" or (self.kind == "sqrt" and _exact_sqrt(self.arg) is not None) \
            or (self.kind == "log" and self.arg == 1)

    def rational_value(self) -> Fraction:
        """Exact value, if the target happens to be rational."""
        if self.kind == "rational":
            return self.arg
        if self.kind == "log" and self.arg == 1:
            return Fraction(0)
        if self.kind == "sqrt":
            r = _exact_sqrt(self.arg)
            if r is not None:
                return r
        raise ValueError(f"{self} is irrational")


def _parse_rational(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse rational {s!r}") from exc


def _exact_sqrt(r: Fraction) -> Fraction | None:
    """sqrt(r) if it is rational, else None."""
    p, q = r.numerator, r.denominator
    sp, sq = isqrt(p), isqrt(q)
    if sp * sp == p and sq * sq == q:
        return Fraction(sp, sq)
    return None


def sqrt_enclosure(r: Fraction, bits: int) -> PrecisionInterval:
    """Certified enclosure of sqrt(r) via scaled integer square root."""
    if r < 0:
        raise DomainError("sqrt of negative rational")
    exact = _exact_sqrt(r)
    if exact is not None:
        return PrecisionInterval(exact, exact, bits)
    p, q = r.numerator, r.denominator
    b = bits + 4
    # sqrt(p/q) = sqrt(p*q)/q; s <= sqrt(p*q*4^b) < s+1
    s = isqrt(p * q << (2 * b))
    den = q << b
    return PrecisionInterval(Fraction(s, den), Fraction(s + 1, den), bits)


def log_enclosure(r: Fraction, bits: int) -> PrecisionInterval:
    """Certified enclosure of log(r) via MPFR with directed rounding."""
    if r <= 0:
        raise DomainError("log of nonpositive rational")
    if r == 1:
        return PrecisionInterval.point(0, bits)
    q = gmpy2.mpq(r.numerator, r.denominator)
    prec = bits + 16
    while True:
        # log is increasing, so rounding the argument and the log in the
        # same direction yields a true directed bound.
        with gmpy2.context(precision=prec, round=gmpy2.RoundDown):
            lo = gmpy2.log(gmpy2.mpfr(q))
        with gmpy2.context(precision=prec, round=gmpy2.RoundUp):
            hi = gmpy2.log(gmpy2.mpfr(q))
        flo = _mpfr_to_fraction(lo)
        fhi = _mpfr_to_fraction(hi)
        iv = PrecisionInterval(flo, fhi, bits)
        if iv.width <= Fraction(1, 1 << (bits - 1)) * max(1, abs(fhi)):
            return iv
        prec += 32


def _mpfr_to_fraction(x) -> Fraction:
    n, d = x.as_integer_ratio()
    return Fraction(int(n), int(d))


def eval_target(t: TargetExpr, bits: int) -> PrecisionInterval:
    """Certified enclosure of the target's value at `bits` significant bits."""
    if bits < 2:
        raise ValueError("bits must be >= 2")
    if t.kind == "rational":
        return PrecisionInterval.point(t.arg, bits)
    if t.kind == "sqrt":
        return sqrt_enclosure(t.arg, bits)
    return log_enclosure(t.arg, bits)


def cmp_rational_vs_target(a: Fraction, t: TargetExpr,
                           max_bits: int = DEFAULT_CAP_BITS) -> Comparison:
    """Exact ordering of the rational `a` versus the real value of `t`.

    sqrt targets are decided by exact squaring; log targets by precision
    escalation (which terminates: log of a rational != 1 is irrational).
    """
    a = Fraction(a)
    if t.kind == "rational":
        v = t.arg
        return Comparison.LESS if a < v else Comparison.GREATER if a > v else Comparison.EQUAL
    if t.kind == "sqrt":
        r = t.arg
        if r == 0:
            return (Comparison.LESS if a < 0 else
                    Comparison.GREATER if a > 0 else Comparison.EQUAL)
        if a <= 0:
            return Comparison.LESS          # sqrt(r) > 0 here
        a2 = a * a
        return (Comparison.LESS if a2 < r else
                Comparison.GREATER if a2 > r else Comparison.EQUAL)
    # log
    if t.arg == 1:
        return (Comparison.LESS if a < 0 else
                Comparison.GREATER if a > 0 else Comparison.EQUAL)
    bits = DEFAULT_INITIAL_BITS
    while bits <= max_bits:
        iv = log_enclosure(t.arg, bits)
        if a < iv.lo:
            return Comparison.LESS
        if a > iv.hi:
            return Comparison.GREATER
        bits *= 2
    raise PrecisionExhaustedError(
        f"cannot separate {a} from {t} within {max_bits} bits", max_bits)


def cmp_interval_vs_target(a: PrecisionInterval, t: TargetExpr,
                           budget: int = DEFAULT_CAP_BITS) -> Comparison:
    """Certified ordering of an enclosure against a target.

    LESS/GREATER only when the enclosures are provably disjoint; UNDECIDED
    once the budget is exhausted while they still overlap (which includes
    the equality-candidate case of identical values).
    """
    bits = max(a.bits, DEFAULT_INITIAL_BITS // 4, 8)
    while True:
        tv = eval_target(t, bits)
        if a.hi < tv.lo:
            return Comparison.LESS
        if a.lo > tv.hi:
            return Comparison.GREATER
        if tv.is_point() and a.is_point():
            return Comparison.UNDECIDED     # equality candidate
        if bits >= budget:
            return Comparison.UNDECIDED
        bits = min(bits * 2, budget)
