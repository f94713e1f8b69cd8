"""Catalog of step-sequence generators.

Moment sequences (harmonic, 1/n^2, Gamma-ratio, Wigner, Cantor), the
prime-reciprocal non-moment control, forward differences, asymptotics
estimation and the factor-2 asymptotic band finder.

Index convention: the built-ins are indexed so the n-th greedy step of the
harmonic kind is exactly 1/n (a shift by one of the Lebesgue moments,
which is itself still a moment sequence). The other kinds use their
displayed closed forms verbatim.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, isqrt

import gmpy2

from .exactnum import PrecisionInterval, scale_ceil, scale_floor, sqrt_enclosure

MOMENT_KINDS = ("harmonic", "invsq", "gammaratio", "wigner", "cantor")
ALL_KINDS = MOMENT_KINDS + ("primes",)

LOG2_OVER_LOG3 = math.log(2) / math.log(3)


# ---------------------------------------------------------------------------
# prime cache

_prime_lock = threading.Lock()
_primes: list[int] = [2, 3, 5, 7, 11, 13]


def nth_prime(n: int) -> int:
    """The n-th prime, 1-indexed (nth_prime(1) == 2). Cached, deterministic sieve."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n <= len(_primes):
        return _primes[n - 1]
    with _prime_lock:
        while n > len(_primes):
            _extend_primes(max(2 * n, 32))
    return _primes[n - 1]


def _extend_primes(count: int) -> None:
    # upper bound on p_count (Rosser), valid for count >= 6
    m = max(count, 6)
    limit = int(m * (math.log(m) + math.log(math.log(m)))) + 10
    sieve = bytearray([1]) * (limit + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p:: p] = bytearray(len(sieve[p * p:: p]))
    _primes.clear()
    _primes.extend(i for i in range(limit + 1) if sieve[i])


# ---------------------------------------------------------------------------
# Cantor measure moments

def cantor_moments(count: int) -> list[Fraction]:
    """First `count` moments of the middle-third Cantor measure, exact.

    Uses the self-similarity recurrence
        m_n = sum_{k<n} C(n,k) 2^(n-k) m_k / (2*(3^n - 1)),   m_0 = 1.
    Quadratic in `count`; intended for moderate counts.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    m = [Fraction(1)]
    pow3 = 1
    for n in range(1, count):
        pow3 *= 3
        s = sum(comb(n, k) * (1 << (n - k)) * m[k] for k in range(n))
        m.append(Fraction(s, 2 * pow3 - 2))
    return m


class _CantorTable:
    """Certified fixed-point enclosures of the Cantor moments.

    Entry n holds integers lo <= m_n * 2^scale <= hi. Rows are computed with
    the self-similarity recurrence restricted to a Hoeffding window around
    k = n/3 (the weights are the Binomial(n, 1/3) pmf); the discarded tail
    mass is below 2^-102 and is added to the upper bound.
    """

    def __init__(self, scale: int = 160):
        self.scale = scale
        one = 1 << scale
        self.lo = [one]
        self.hi = [one]
        self._pow3 = [1]
        # exact binomial frontier C(fn, fk), advanced monotonically in n
        self._fn = 0
        self._fk = 0
        self._fc = 1
        self._lock = threading.Lock()

    def ensure(self, n: int) -> None:
        if n < len(self.lo):
            return
        with self._lock:
            while len(self.lo) <= n:
                self._extend()

    def interval(self, n: int, bits: int) -> PrecisionInterval:
        self.ensure(n)
        return PrecisionInterval.from_scaled(self.lo[n], self.hi[n], self.scale, bits)

    def _frontier(self, n: int, k0: int) -> int:
        """Advance the exact C(fn, fk) frontier to C(n, k0); all steps are
        exact integer divisions."""
        c, fn, fk = self._fc, self._fn, self._fk
        while fn < n:
            fn += 1
            c = c * fn // (fn - fk)
        while fk < k0:
            c = c * (fn - fk) // (fk + 1)
            fk += 1
        while fk > k0:
            c = c * fk // (fn - fk + 1)
            fk -= 1
        self._fc, self._fn, self._fk = c, fn, fk
        return c

    def _extend(self) -> None:
        n = len(self.lo)
        self._pow3.append(self._pow3[-1] * 3)
        pow3n = self._pow3[n]
        t = 6 * isqrt(n) + 8
        k0 = max(0, n // 3 - t)
        k1 = min(n - 1, n // 3 + t)
        windowed = k0 > 0 or k1 < n - 1
        c0 = self._frontier(n, k0)
        # weights w_k = C(n,k) * 2^(n-k), truncated to ~240-bit mantissas
        # with directed rounding: w_k in [wlo, wlo + g] * 2^shift
        shift = max(0, c0.bit_length() + (n - k0) - 240)
        wlo = (c0 << (n - k0)) >> shift
        g = 1 if shift else 0
        acc = 0      # sum of wlo * m_lo
        err = 0      # upper bound of (sum of w_hi * m_hi) - acc
        lo, hi = self.lo, self.hi
        if shift == 0:
            # weights stay exact: the ratio update divides evenly
            for k in range(k0, k1 + 1):
                ml = lo[k]
                err += wlo * (hi[k] - ml)
                acc += wlo * ml
                wlo = (wlo * (n - k)) // (2 * (k + 1))
        else:
            for k in range(k0, k1 + 1):
                ml = lo[k]
                h = hi[k] - ml
                acc += wlo * ml
                err += wlo * h + g * (ml + h)
                nk = n - k
                kk = 2 * (k + 1)
                g = (g * nk) // kk + 2
                wlo = (wlo * nk) // kk
        num_lo = acc << shift
        num_hi = (acc + err) << shift
        if windowed:
            # Hoeffding: mass outside |k - n/3| >= 6 sqrt(n) is below
            # 2*exp(-72) < 2^-102, and m_k <= 1
            num_hi += ((pow3n << self.scale) >> 102) + 1
        d = 2 * pow3n - 2
        self.lo.append(num_lo // d)
        self.hi.append(-((-num_hi) // d))


_cantor_table = _CantorTable()


# ---------------------------------------------------------------------------
# Gamma-ratio rational part, computed incrementally

class _GammaRatioFrontier:
    """r_n = n! * 2^(n+1) / (2n+1)!!  so that x_n = r_n / sqrt(pi).

    Keeps one unreduced (n, num, den) frontier; sequential access is O(1)
    per step, random access restarts from the nearest anchor below.
    """

    def __init__(self):
        self.n = 1
        self.num = 4          # 1! * 2^2
        self.den = 3          # 3!!
        self._lock = threading.Lock()

    def at(self, n: int) -> tuple[int, int]:
        with self._lock:
            if n < self.n:
                self.n, self.num, self.den = 1, 4, 3
            while self.n < n:
                m = self.n + 1
                self.num *= 2 * m
                self.den *= 2 * m + 1
                self.n = m
            return self.num, self.den


_gamma_frontier = _GammaRatioFrontier()


def gamma_ratio_rational(n: int) -> Fraction:
    """Exact rational r_n with x_n(gammaratio) = r_n / sqrt(pi)."""
    num, den = _gamma_frontier.at(n)
    return Fraction(num, den)


def _inv_sqrt_pi(bits: int) -> PrecisionInterval:
    with gmpy2.context(precision=bits + 16, round=gmpy2.RoundDown):
        pi_lo = gmpy2.const_pi()
    with gmpy2.context(precision=bits + 16, round=gmpy2.RoundUp):
        pi_hi = gmpy2.const_pi()
    flo = Fraction(*(int(v) for v in pi_lo.as_integer_ratio()))
    fhi = Fraction(*(int(v) for v in pi_hi.as_integer_ratio()))
    inv_lo = sqrt_enclosure(1 / fhi, bits + 8)
    inv_hi = sqrt_enclosure(1 / flo, bits + 8)
    return PrecisionInterval(inv_lo.lo, inv_hi.hi, bits)


# ---------------------------------------------------------------------------
# SequenceSpec

@dataclass(frozen=True)
class SequenceSpec:
    """A generator of step terms x_n with known decay asymptotics.

    kind is one of harmonic | invsq | gammaratio | wigner | cantor | primes
    | diff; diff wraps an inner spec with a forward-difference order.
    """

    kind: str
    inner: "SequenceSpec | None" = None
    order: int = 0

    def __post_init__(self):
        if self.kind == "diff":
            if self.inner is None or self.order < 1:
                raise ValueError("diff requires an inner spec and order >= 1")
        elif self.kind not in ALL_KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}")

    # -- registry ----------------------------------------------------------

    @classmethod
    def parse(cls, text: str) -> "SequenceSpec":
        s = text.strip().lower().replace(" ", "")
        if s.startswith("diff(") and s.endswith(")"):
            body = s[5:-1]
            depth = 0
            for i in range(len(body) - 1, -1, -1):
                ch = body[i]
                if ch == ")":
                    depth += 1
                elif ch == "(":
                    depth -= 1
                elif ch == "," and depth == 0:
                    return cls("diff", inner=cls.parse(body[:i]), order=int(body[i + 1:]))
            raise ValueError(f"cannot parse sequence spec {text!r}")
        if s in ALL_KINDS:
            return cls(s)
        raise ValueError(f"unknown sequence spec {text!r}")

    def __str__(self) -> str:
        if self.kind == "diff":
            return f"diff({self.inner},{self.order})"
        return self.kind

    # -- asymptotics -------------------------------------------------------

    @property
    def is_moment(self) -> bool:
        if self.kind == "diff":
            return self.inner.is_moment
        return self.kind in MOMENT_KINDS

    @property
    def is_exact(self) -> bool:
        """True when term() yields exact rationals."""
        if self.kind == "diff":
            return self.inner.is_exact
        return self.kind in ("harmonic", "invsq", "wigner", "primes")

    @property
    def known_alpha(self) -> Fraction | float | None:
        base = {"harmonic": Fraction(1), "invsq": Fraction(2),
                "gammaratio": Fraction(1, 2), "wigner": Fraction(1, 2),
                "cantor": LOG2_OVER_LOG3, "primes": None}
        if self.kind == "diff":
            a = self.inner.known_alpha
            return None if a is None else a + self.order
        return base[self.kind]

    @property
    def known_c(self) -> "tuple[Fraction, str | None] | None":
        """Leading constant as (rational multiplier, irrational tag)."""
        base = {"harmonic": (Fraction(1), None), "invsq": (Fraction(1), None),
                "gammaratio": (Fraction(1), None),
                "wigner": (Fraction(1), "inv_sqrt_pi"),
                "cantor": None, "primes": None}
        if self.kind == "diff":
            c = self.inner.known_c
            a = self.inner.known_alpha
            if c is None or a is None or isinstance(a, float):
                return None
            mult = Fraction(1)
            for i in range(self.order):
                mult *= a + i
            return (c[0] * mult, c[1])
        return base[self.kind]

    @property
    def known_c_float(self) -> float | None:
        c = self.known_c
        if c is None:
            return None
        mult, tag = c
        v = float(mult)
        if tag == "inv_sqrt_pi":
            v /= math.sqrt(math.pi)
        return v


def diff(spec: SequenceSpec, order: int) -> SequenceSpec:
    """Forward-difference spec of the given order; composes structurally."""
    if order < 1:
        raise ValueError("order must be >= 1")
    return SequenceSpec("diff", inner=spec, order=order)


def term(spec: SequenceSpec, n: int, bits: int = 64):
    """The n-th step term: exact Fraction for rational kinds, a certified
    PrecisionInterval for gammaratio and cantor."""
    if n < 1 and spec.kind != "cantor":
        raise ValueError("n must be >= 1")
    if n < 0:
        raise ValueError("n must be >= 0")
    k = spec.kind
    if k == "harmonic":
        return Fraction(1, n)
    if k == "invsq":
        return Fraction(1, n * n)
    if k == "wigner":
        return Fraction(comb(2 * n + 1, n + 1), 1 << (2 * n + 1))
    if k == "primes":
        return Fraction(1, nth_prime(n))
    if k == "gammaratio":
        return _inv_sqrt_pi(bits + 8).scale_rational(gamma_ratio_rational(n))
    if k == "cantor":
        if _cantor_table.scale < bits:
            raise ValueError(f"cantor table scale {_cantor_table.scale} < requested bits")
        return _cantor_table.interval(n, bits)
    # diff
    j = spec.order
    total = None
    for i in range(j + 1):
        t = term(spec.inner, n + i, bits)
        coeff = Fraction((-1) ** i * comb(j, i))
        piece = t * coeff if isinstance(t, Fraction) else t.scale_rational(coeff)
        total = piece if total is None else total + piece
    return total


# ---------------------------------------------------------------------------
# scaled-term streams for the greedy engine

def scaled_term_stream(spec: SequenceSpec, scale_bits: int):
    """Return f(n) -> (lo, hi) integer bounds of x_n in units of 2^-scale_bits."""
    b = scale_bits
    one = 1 << b
    k = spec.kind
    if k == "harmonic":
        return lambda n: (one // n, -((-one) // n))
    if k == "invsq":
        return lambda n: (one // (n * n), -((-one) // (n * n)))
    if k == "primes":
        def f(n):
            p = nth_prime(n)
            return one // p, -((-one) // p)
        return f

    def generic(n):
        t = term(spec, n, bits=b + 8)
        if isinstance(t, Fraction):
            return scale_floor(t, b), scale_ceil(t, b)
        return scale_floor(t.lo, b), scale_ceil(t.hi, b)
    return generic


# ---------------------------------------------------------------------------
# complete-monotonicity scan

def first_negative_diff(spec: SequenceSpec, order: int, n_max: int) -> int | None:
    """Smallest n <= n_max with term(diff(spec, order), n) < 0, or None.

    Uses exact integer sign tests per kind (certified interval bounds for
    cantor). Raises if a cantor sign cannot be certified at table scale.
    """
    j = order
    co = [(-1) ** i * comb(j, i) for i in range(j + 1)]
    k = spec.kind
    if k in ("harmonic", "invsq"):
        power = 1 if k == "harmonic" else 2
        for n in range(1, n_max + 1):
            vals = [(n + i) ** power for i in range(j + 1)]
            prod = math.prod(vals)
            s = sum(co[i] * (prod // vals[i]) for i in range(j + 1))
            if s < 0:
                return n
        return None
    if k == "wigner":
        # incremental central-binomial numerators C_m = comb(2m+1, m+1)
        cm = [comb(2 * (1 + i) + 1, (1 + i) + 1) for i in range(j + 1)]
        n = 1
        while n <= n_max:
            s = sum(co[i] * cm[i] * (1 << (2 * (j - i))) for i in range(j + 1))
            if s < 0:
                return n
            n += 1
            # shift window: drop cm[0], extend at m = n + j
            m = n + j
            cm = cm[1:] + [cm[-1] * (2 * m) * (2 * m + 1) // (m * (m + 1))]
        return None
    if k == "gammaratio":
        # factor out num_n and the shared double-factorial prefix
        for n in range(1, n_max + 1):
            u = []
            for i in range(j + 1):
                a = math.prod(2 * (n + l) for l in range(1, i + 1))
                c = math.prod(2 * n + 2 * l + 1 for l in range(i + 1, j + 1))
                u.append(a * c)
            s = sum(co[i] * u[i] for i in range(j + 1))
            if s < 0:
                return n
        return None
    if k == "cantor":
        _cantor_table.ensure(n_max + j)
        lo, hi = _cantor_table.lo, _cantor_table.hi
        for n in range(1, n_max + 1):
            lower = sum(co[i] * (lo[n + i] if co[i] > 0 else hi[n + i])
                        for i in range(j + 1))
            if lower >= 0:
                continue
            upper = sum(co[i] * (hi[n + i] if co[i] > 0 else lo[n + i])
                        for i in range(j + 1))
            if upper < 0:
                return n
            raise ArithmeticError(
                f"cantor diff sign at n={n}, order={j} not certified at "
                f"table scale {_cantor_table.scale}")
        return None
    # generic (primes, diff-of-diff): exact rational evaluation
    d = diff(spec, j)
    for n in range(1, n_max + 1):
        t = term(d, n)
        v = t if isinstance(t, Fraction) else None
        if v is None:
            if t.hi < 0:
                return n
            if t.lo < 0:
                raise ArithmeticError(f"sign not certified at n={n}")
        elif v < 0:
            return n
    return None


# ---------------------------------------------------------------------------
# asymptotics estimation

def _log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def estimate_asymptotics(spec: SequenceSpec, n_lo: int, n_hi: int,
                         max_points: int = 400) -> tuple[float, float]:
    """Least-squares fit of log x_n = log c - alpha log n over [n_lo, n_hi].

    Returns point estimates (c_hat, alpha_hat). Raises on non-positive terms.
    """
    if not (n_hi >= 2 * n_lo >= 2):
        raise ValueError("need n_hi >= 2*n_lo >= 2")
    span = n_hi - n_lo + 1
    if span <= max_points:
        ns = list(range(n_lo, n_hi + 1))
    else:
        ratio = (n_hi / n_lo) ** (1 / (max_points - 1))
        ns = sorted({min(n_hi, round(n_lo * ratio ** i)) for i in range(max_points)})
    xs, ys = [], []
    for n in ns:
        t = term(spec, n, bits=96)
        v = t if isinstance(t, Fraction) else t.midpoint
        if v <= 0:
            raise ValueError(f"non-positive term at n={n}; cannot take log")
        xs.append(math.log(n))
        ys.append(_log_fraction(v))
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    slope = sxy / sxx
    alpha_hat = -slope
    c_hat = math.exp(my + alpha_hat * mx)
    return c_hat, alpha_hat


# ---------------------------------------------------------------------------
# factor-2 asymptotic band

def band_start(spec: SequenceSpec, k: int, cap: int = 4096) -> int:
    """Smallest N (searched up to `cap`) such that for all n in [N, 4N] and
    each difference order j <= k, the j-th difference lies in the factor-2
    band [c_j/2 / n^(alpha+j), 2 c_j / n^(alpha+j)].
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    c = spec.known_c
    alpha = spec.known_alpha
    if c is None or alpha is None or isinstance(alpha, float):
        raise ValueError(f"{spec} has no exact known (c, alpha)")

    checkers = []
    for j in range(k + 1):
        cj = c[0]
        for i in range(j):
            cj *= alpha + i
        checkers.append((diff(spec, j) if j else spec, cj, c[1], alpha + j))

    memo: dict[int, bool] = {}

    def good(n: int) -> bool:
        if n not in memo:
            memo[n] = all(_in_band(d, cj, tag, a, n) for d, cj, tag, a in checkers)
        return memo[n]

    for big_n in range(1, cap + 1):
        if all(good(n) for n in range(big_n, 4 * big_n + 1)):
            return big_n
    raise ArithmeticError(f"band not found below cap {cap}")


def _in_band(d: SequenceSpec, cj: Fraction, tag: str | None, a: Fraction, n: int) -> bool:
    t = term(d, n, bits=128)
    if isinstance(t, Fraction):
        t_iv = PrecisionInterval.point(t)
    else:
        t_iv = t
    denom = a.denominator
    # n^(a+j) with rational exponent p/q: compare q-th powers, exactly.
    p = a.numerator
    npow_num = n ** p            # n^(p/q): handle via q-th power comparison
    if tag is None and denom == 1:
        lo_bound = cj / 2 / npow_num
        hi_bound = 2 * cj / npow_num
        return lo_bound <= t_iv.lo and t_iv.hi <= hi_bound
    # irrational constant or exponent: certified comparison via q-th powers
    # and, if needed, a sqrt(pi) enclosure
    return _in_band_irrational(t_iv, cj, tag, a, n)


def _in_band_irrational(t_iv: PrecisionInterval, cj: Fraction, tag: str | None,
                        a: Fraction, n: int) -> bool:
    bits = 160
    with gmpy2.context(precision=bits, round=gmpy2.RoundDown):
        np_lo = gmpy2.mpfr(n) ** gmpy2.mpq(a.numerator, a.denominator)
        c_lo = gmpy2.mpfr(gmpy2.mpq(cj.numerator, cj.denominator))
        if tag == "inv_sqrt_pi":
            c_lo = c_lo / _pi_sqrt(bits, up=True)
    with gmpy2.context(precision=bits, round=gmpy2.RoundUp):
        np_hi = gmpy2.mpfr(n) ** gmpy2.mpq(a.numerator, a.denominator)
        c_hi = gmpy2.mpfr(gmpy2.mpq(cj.numerator, cj.denominator))
        if tag == "inv_sqrt_pi":
            c_hi = c_hi / _pi_sqrt(bits, up=False)
    with gmpy2.context(precision=bits, round=gmpy2.RoundUp):
        upper_lo_bound = c_hi / (2 * np_lo)      # upper enclosure of c_j/2/n^a
    with gmpy2.context(precision=bits, round=gmpy2.RoundDown):
        lower_hi_bound = (2 * c_lo) / np_hi      # lower enclosure of 2 c_j/n^a
    lo_ok = Fraction(*(int(v) for v in upper_lo_bound.as_integer_ratio())) <= t_iv.lo
    hi_ok = t_iv.hi <= Fraction(*(int(v) for v in lower_hi_bound.as_integer_ratio()))
    return lo_ok and hi_ok


def _pi_sqrt(bits: int, up: bool):
    rnd = gmpy2.RoundUp if up else gmpy2.RoundDown
    with gmpy2.context(precision=bits, round=rnd):
        return gmpy2.sqrt(gmpy2.const_pi())
