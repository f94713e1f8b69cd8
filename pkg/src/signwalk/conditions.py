"""Executable checks of the hypotheses behind the convergence guarantees.

Window inequalities x_j <= x_{j+1} + ... + x_{j+ell} (exact where the terms
are rational, certified enclosures otherwise), the literal bookkeeping
inequality from the level-counting argument (diagnostic only), and certified
enclosures of the total reachable sum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

from .exactnum import (DEFAULT_CAP_BITS, PrecisionExhaustedError,
                       PrecisionInterval)
from .moments import (SequenceSpec, band_start, diff, gamma_ratio_rational,
                      term)


@dataclass
class DiamondReport:
    """Result of the uniform window-inequality scan over j = 1..j_max."""

    spec: str
    ell: int
    j_max: int
    first_failure: int | None
    failures: list[int]

    @property
    def all_hold(self) -> bool:
        return not self.failures

    def to_json(self) -> str:
        return json.dumps({
            "spec": self.spec, "ell": self.ell, "j_max": self.j_max,
            "first_failure": self.first_failure, "failures": self.failures,
        })


def _rational_proxy(spec: SequenceSpec) -> Callable[[int], Fraction] | None:
    """A positive-scale-equivalent rational term function, if one exists.

    Window inequalities are invariant under a common positive factor, so the
    gamma-ratio kind can drop its 1/sqrt(pi) and compare rational parts.
    """
    if spec.kind == "gammaratio":
        return gamma_ratio_rational
    if spec.kind == "diff":
        inner = _rational_proxy(spec.inner)
        if inner is None:
            return None
        order = spec.order

        def diffed(n: int, inner=inner, order=order) -> Fraction:
            from math import comb
            return sum((-1) ** i * comb(order, i) * inner(n + i)
                       for i in range(order + 1))
        return diffed
    if spec.is_exact:
        return lambda n: term(spec, n)
    return None


def diamond_window(spec: SequenceSpec, j: int, ell: int,
                   cap_bits: int = DEFAULT_CAP_BITS) -> bool:
    """Exact truth value of x_j <= x_{j+1} + ... + x_{j+ell}."""
    if j < 1 or ell < 1:
        raise ValueError("j and ell must be >= 1")
    proxy = _rational_proxy(spec)
    if proxy is not None:
        return proxy(j) <= sum(proxy(j + i) for i in range(1, ell + 1))
    bits = 128
    while bits <= cap_bits:
        xj = term(spec, j, bits)
        s_lo = Fraction(0)
        s_hi = Fraction(0)
        for i in range(1, ell + 1):
            t = term(spec, j + i, bits)
            if isinstance(t, Fraction):
                s_lo += t
                s_hi += t
            else:
                s_lo += t.lo
                s_hi += t.hi
        if isinstance(xj, Fraction):
            xj = PrecisionInterval.point(xj, bits)
        if xj.hi <= s_lo:
            return True
        if xj.lo > s_hi:
            return False
        bits *= 2
    raise PrecisionExhaustedError(
        f"window inequality undecided for {spec} at j={j}, ell={ell}", cap_bits)


def diamond_uniform(spec: SequenceSpec, j_max: int, ell: int) -> DiamondReport:
    """Scan j = 1..j_max for failures of the window inequality."""
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    failures = [j for j in range(1, j_max + 1)
                if not diamond_window(spec, j, ell)]
    return DiamondReport(spec=str(spec), ell=ell, j_max=j_max,
                         first_failure=failures[0] if failures else None,
                         failures=failures)


def section33_inequality(n: int, k: int) -> tuple[Fraction, Fraction, bool]:
    """Literal evaluation of 1/N^k <= (1/5) * sum_{m=1}^{10} 1/(N+m)^(k+1).

    Diagnostic only: as printed the right side is ~2/N^(k+1), so the
    inequality fails for every N >= 1. It never gates the engine.
    """
    if n < 1 or k < 1:
        raise ValueError("N and k must be >= 1")
    lhs = Fraction(1, n ** k)
    rhs = Fraction(1, 5) * sum(Fraction(1, (n + m) ** (k + 1))
                               for m in range(1, 11))
    return lhs, rhs, lhs <= rhs


_MAX_SUM_BITS = 40   # direct-summation budget: partial length ~ 2**(bits/2)

ReachableResult = Union[PrecisionInterval, str]


def reachable_sum(spec: SequenceSpec, bits: int = 24) -> ReachableResult:
    """Certified enclosure of sum_{n>=1} x_n, or the string "divergent".

    Divergence is decided from the known decay exponent (alpha <= 1 means a
    comparison with the harmonic series). Convergent sums combine an exact
    or certified partial sum with an integral tail bound; difference
    sequences telescope to a closed form. Width goals beyond 2**-40 are
    clamped (direct summation only).
    """
    alpha = spec.known_alpha
    if spec.kind == "primes":
        return "divergent"     # sum 1/p_n diverges (Euler)
    if alpha is None:
        raise ValueError(f"no known decay exponent for {spec}")
    if spec.kind != "diff" and not alpha > 1:
        return "divergent"
    bits = min(bits, _MAX_SUM_BITS)
    if spec.kind == "diff":
        return _telescoped_sum(spec, bits)
    if spec.kind == "invsq":
        return _invsq_sum(bits)
    return _banded_sum(spec, bits)


def _invsq_sum(bits: int) -> PrecisionInterval:
    """sum 1/n^2 = partial to M + tail in [1/(M+1), 2/(2M+1)] (convexity:
    f(n) >= int_n^{n+1} f and f(n) <= int_{n-1/2}^{n+1/2} f)."""
    m = 1 << ((bits + 3) // 2)
    work = bits + 16
    one = 1 << work
    s_lo = s_hi = 0
    for n in range(1, m + 1):
        nn = n * n
        s_lo += one // nn
        s_hi += -((-one) // nn)
    lo = Fraction(s_lo, one) + Fraction(1, m + 1)
    hi = Fraction(s_hi, one) + Fraction(2, 2 * m + 1)
    return PrecisionInterval(lo, hi, bits)


def _telescoped_sum(spec: SequenceSpec, bits: int) -> ReachableResult:
    """sum_{n>=1} diff^j(y)(n) = diff^{j-1}(y)(1) since moment sequences
    (and their iterated gaps) tend to a limit that the outermost forward
    difference removes; for the kinds here the limit is 0."""
    inner = spec.inner
    if spec.order == 1:
        base = inner
    else:
        base = diff(inner, spec.order - 1)
    t = term(base, 1, bits + 8)
    if isinstance(t, Fraction):
        return PrecisionInterval.point(t, bits)
    return t


def _banded_sum(spec: SequenceSpec, bits: int) -> PrecisionInterval:
    """Generic alpha > 1 fallback: certified partial sum plus the
    factor-2-band integral tail x_n <= 2c/n^alpha for n past band_start."""
    alpha = spec.known_alpha
    c = spec.known_c
    if c is None or isinstance(alpha, float):
        raise ValueError(f"no certified asymptotic band for {spec}")
    n0 = band_start(spec, 2)
    m = max(n0, 1 << ((bits + 3) // 2))
    s_lo = Fraction(0)
    s_hi = Fraction(0)
    work = bits + 16
    for n in range(1, m + 1):
        t = term(spec, n, work)
        if isinstance(t, Fraction):
            s_lo += t
            s_hi += t
        else:
            s_lo += t.lo
            s_hi += t.hi
    c_rat, tag = c
    if tag is not None or (alpha - 1).denominator != 1:
        raise ValueError(f"no rational asymptotic tail bound for {spec}")
    # tail <= int_M^inf 2c/t^alpha dt = 2c M^(1-alpha) / (alpha - 1)
    tail_hi = 2 * c_rat * Fraction(1, m) ** (alpha - 1) / (alpha - 1)
    return PrecisionInterval(s_lo, s_hi + tail_hi, bits)
