"""Convergence statistics over greedy traces.

Certified superpolynomial-hit detection, the running-min (log error)/(log n)^2
statistic, level densities, Thue-Morse window matching, alternation
detection with reconstruction, and the level-wait predictor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .exactnum import PrecisionInterval, TargetExpr, scale_ceil, scale_floor
from .greedy import GreedyTrace, error_at, first_crossing, _scaled_target
from .moments import SequenceSpec, scaled_term_stream

_LOG2 = math.log(2.0)


@dataclass
class HitRecord:
    """Certified indices n with |x - a_n| <= n^-k."""

    k: int
    indices: list[int]
    ambiguous: list[int] = field(default_factory=list)


def hits(trace: GreedyTrace, k: int, n_min: int = 1,
         refine_bits: int | None = None) -> HitRecord:
    """Scan the trace's checkpoints for certified level-k hits.

    An index counts only when the certified error upper bound is at or
    below n^-k. Enclosures straddling the threshold are refined by
    recomputation at doubled precision; if still straddling they are
    reported as ambiguous, never coerced.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    rec = HitRecord(k=k, indices=[])
    ck = trace.checkpoints
    for i in range(len(ck)):
        n = ck.ns[i]
        if n < n_min:
            continue
        thr_log2 = -k * math.log2(n) if n > 1 else 0.0
        hi_m, hi_e = ck.hi_m[i], ck.hi_e[i]
        lo_m, lo_e = ck.lo_m[i], ck.lo_e[i]
        hi_log2 = (math.log2(hi_m) + hi_e) if hi_m else -math.inf
        lo_log2 = (math.log2(lo_m) + lo_e) if lo_m else -math.inf
        # fast float prefilter with a safety margin, exact check near the edge
        if hi_log2 <= thr_log2 - 1e-6:
            rec.indices.append(n)
            continue
        if lo_log2 >= thr_log2 + 1e-6:
            continue
        cls = _classify_vs_threshold(trace, i, n, k, refine_bits)
        if cls is True:
            rec.indices.append(n)
        elif cls is None:
            rec.ambiguous.append(n)
    return rec


def _classify_vs_threshold(trace: GreedyTrace, i: int, n: int, k: int,
                           refine_bits: int | None) -> bool | None:
    """Exact classification of checkpoint i against n^-k; True = hit,
    False = miss, None = ambiguous after refinement."""
    ck = trace.checkpoints
    nk = n ** k
    def hit(m, e):
        # m * 2^e <= n^-k  <=>  m * nk <= 2^-e
        return m * nk <= (1 << -e) if e < 0 else (m << e) * nk <= 1
    def miss(m, e):
        return (m * nk > (1 << -e)) if e < 0 else (m << e) * nk > 1
    if hit(ck.hi_m[i], ck.hi_e[i]):
        return True
    if miss(ck.lo_m[i], ck.lo_e[i]):
        return False
    bits = refine_bits or 2 * ck.bits[i]
    iv = error_at(trace, n, bits)
    thr = Fraction(1, nk)
    if iv.hi <= thr:
        return True
    if iv.lo > thr:
        return False
    return None


def liminf_stat(trace: GreedyTrace, n_min: int = 3) -> list[tuple[int, float]]:
    """Running minimum of log|x - a_n| / (log n)^2 over checkpoints n >= n_min.

    Uses the certified error upper bound, which understates the depth and
    never overstates it. Enclosures with relative width >= 10% that would
    move the minimum are refined first. Raising n_min discards the startup
    transient (tiny indices can land on continued-fraction convergents and
    dominate the minimum forever).
    """
    if n_min < 3:
        raise ValueError("n_min must be >= 3")
    out: list[tuple[int, float]] = []
    runmin = math.inf
    ck = trace.checkpoints
    for i in range(len(ck)):
        n = ck.ns[i]
        if n < n_min:
            continue
        hi_m, hi_e = ck.hi_m[i], ck.hi_e[i]
        if hi_m == 0:
            runmin = -math.inf
            out.append((n, runmin))
            continue
        denom = math.log(n) ** 2
        val = (math.log(hi_m) + hi_e * _LOG2) / denom
        if val < runmin:
            lo_m, lo_e = ck.lo_m[i], ck.lo_e[i]
            wide = lo_m == 0 or (math.log2(hi_m) + hi_e) - (math.log2(lo_m) + lo_e) \
                > math.log2(1.1)
            if wide:
                iv = error_at(trace, n, 2 * ck.bits[i])
                if iv.hi > 0:
                    val = _log_fraction(iv.hi) / denom
            runmin = min(runmin, val)
        out.append((n, runmin))
    return out


def _log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


@dataclass
class DensityReport:
    fraction: float
    hits: int
    total: int
    ambiguous: int


def level_density(trace: GreedyTrace, beta: float, c: float, n_horizon: int) -> DensityReport:
    """Fraction of observed indices n <= n_horizon with |x - a_n| <= c * n^-beta.

    Classification is certified from the stored enclosures; indices whose
    enclosure straddles the threshold are counted as ambiguous. Index n = 1
    is excluded: 1^-beta = 1 for every beta, so it carries no level
    information and would register as a spurious hit for any C >= |x - a_1|.
    """
    ck = trace.checkpoints
    hits_n = total = ambiguous = 0
    log2c = math.log2(c)
    for i in range(len(ck)):
        n = ck.ns[i]
        if n < 2:
            continue
        if n > n_horizon:
            break
        total += 1
        thr_log2 = log2c - beta * math.log2(n)
        hi_m, hi_e = ck.hi_m[i], ck.hi_e[i]
        hi_log2 = (math.log2(hi_m) + hi_e) if hi_m else -math.inf
        if hi_log2 <= thr_log2:
            hits_n += 1
            continue
        lo_m, lo_e = ck.lo_m[i], ck.lo_e[i]
        lo_log2 = (math.log2(lo_m) + lo_e) if lo_m else -math.inf
        if lo_log2 > thr_log2:
            continue
        ambiguous += 1
    frac = hits_n / total if total else 0.0
    return DensityReport(fraction=frac, hits=hits_n, total=total, ambiguous=ambiguous)


# ---------------------------------------------------------------------------
# Thue-Morse

def thue_morse_prefix(length: int) -> list[int]:
    """First `length` entries; t_n = parity of ones in binary(n)."""
    if length < 1:
        raise ValueError("length must be >= 1")
    tm = [0]
    while len(tm) < length:
        tm.extend([1 - b for b in tm])
    return tm[:length]


def tm_match(trace: GreedyTrace, start: int) -> int:
    """Longest L such that the signs after position `start` reproduce the
    Thue-Morse prefix of length L (or its complement, depending on which
    phase the first sign lands on; - maps to 0 anchored at t_0 = 0)."""
    if start >= len(trace.signs):
        raise ValueError("start beyond end of trace")
    window = [1 if s > 0 else 0 for s in trace.signs[start:]]
    if not window:
        return 0
    tm = thue_morse_prefix(len(window))
    flip = window[0]  # first sign +: compare against the complemented prefix
    n = 0
    for b, t in zip(window, tm):
        if b != (t ^ flip):
            break
        n += 1
    return n


@dataclass
class AlternationReport:
    alternating: bool
    start: int | None    # first step index (1-based) of the alternating tail
    note: str = ""


def alternation_tail(trace: GreedyTrace, window: int) -> AlternationReport:
    """Do the final `window` signs strictly alternate?

    A positive answer flags the target as a suspected member of the
    exceptional set for this sequence.
    """
    if window < 2:
        raise ValueError("window must be >= 2")
    s = trace.signs
    if len(s) < window:
        return AlternationReport(False, None, "insufficient data")
    i = len(s) - 1
    while i > 0 and s[i - 1] != s[i]:
        i -= 1
    # s[i:] is the maximal alternating suffix
    alternating = len(s) - i >= window
    return AlternationReport(alternating, i + 1 if alternating else None)


def reconstruct_from_alternation(spec: SequenceSpec, m: int, a_m: Fraction,
                                 terms: int, bits: int = 256) -> PrecisionInterval:
    """Enclosure of x = a_m + x_{m+1} - x_{m+2} + x_{m+3} - ... from `terms`
    terms of the alternating tail; the bracketing is monotone, so the
    enclosure is [last even partial, last odd partial]."""
    if terms < 2:
        raise ValueError("terms must be >= 2")
    work = bits + terms.bit_length() + 8
    term_f = scaled_term_stream(spec, work)
    s_lo = scale_floor(Fraction(a_m), work)
    s_hi = scale_ceil(Fraction(a_m), work)
    odd_hi = None
    even_lo = None
    for ell in range(1, terms + 1):
        tl, th = term_f(m + ell)
        if ell % 2 == 1:
            s_lo += tl
            s_hi += th
            odd_hi = s_hi
        else:
            s_lo -= th
            s_hi -= tl
            even_lo = s_lo
    lo = Fraction(even_lo, 1 << work)
    hi = Fraction(odd_hi, 1 << work)
    return PrecisionInterval(lo, hi, bits)


def predict_level_wait(n: int, alpha: float | Fraction) -> int:
    """Worst-case index by which the next approximation level is reached:
    ceil(2^(1 + 1/alpha) * n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    alpha = Fraction(alpha)
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    expo = 1 + 1 / alpha
    if expo.denominator == 1 and expo.numerator >= 0:
        return n << expo.numerator
    return math.ceil(n * 2.0 ** float(expo))


# ---------------------------------------------------------------------------
# trace invariants

@dataclass
class InvariantReport:
    first_crossing: int | None
    closeness_checked: int = 0
    closeness_violations: list[int] = field(default_factory=list)
    closeness_ambiguous: list[int] = field(default_factory=list)
    patterns_checked: int = 0
    pattern_violations: list[int] = field(default_factory=list)
    pattern_ambiguous: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.closeness_violations and not self.pattern_violations


def verify_trace_invariants(trace: GreedyTrace) -> InvariantReport:
    """Single-pass certified check of the closeness-persistence invariant
    (|x - a_n| <= x_n past the first crossing) and of the bracket implied
    by every (-,+,+) / (+,-,-) sign pattern."""
    fc = first_crossing(trace)
    rep = InvariantReport(first_crossing=fc)
    if fc is None:
        return rep
    cfg = trace.cfg
    bits = max(trace.final_bits, cfg.prec_init)
    term_f = scaled_term_stream(cfg.spec, bits)
    t_lo, t_hi = _scaled_target(cfg.target, bits)
    signs = trace.signs
    total = len(signs)
    s_lo = s_hi = 0
    # ring buffer of partial-sum enclosures a_{n-3}..a_n
    ring: list[tuple[int, int]] = [(0, 0)] * 4
    for n in range(1, total + 1):
        tl, th = term_f(n)
        if signs[n - 1] > 0:
            s_lo += tl
            s_hi += th
        else:
            s_lo -= th
            s_hi -= tl
        ring[n & 3] = (s_lo, s_hi)
        if n > fc:
            rep.closeness_checked += 1
            e_hi = max(t_hi - s_lo, s_hi - t_lo, 0)
            if e_hi > tl:
                e_lo = max(t_lo - s_hi, s_lo - t_hi, 0)
                if e_lo > th:
                    rep.closeness_violations.append(n)
                else:
                    iv = error_at(trace, n, 2 * bits)
                    xv = _term_interval(cfg.spec, n, 2 * bits)
                    if iv.hi <= xv.lo:
                        pass
                    elif iv.lo > xv.hi:
                        rep.closeness_violations.append(n)
                    else:
                        rep.closeness_ambiguous.append(n)
        m = n - 3
        if m >= fc and m >= 0:
            trip = (signs[m], signs[m + 1], signs[m + 2])
            if trip == (-1, 1, 1) or trip == (1, -1, -1):
                rep.patterns_checked += 1
                am_lo, am_hi = ring[m & 3]
                t1l, t1h = term_f(m + 1)
                t2l, t2h = term_f(m + 2)
                if trip[0] == -1:
                    # a_m - (x_{m+1} - x_{m+2}) <= x < a_m
                    ok = (am_hi - (t1l - t2h) <= t_lo) and (t_hi < am_lo)
                else:
                    # a_m <= x < a_m + (x_{m+1} - x_{m+2})
                    ok = (am_hi <= t_lo) and (t_hi < am_lo + (t1l - t2h))
                if not ok:
                    rep.pattern_ambiguous.append(m)
    return rep


def _term_interval(spec: SequenceSpec, n: int, bits: int) -> PrecisionInterval:
    from .moments import term
    t = term(spec, n, bits)
    if isinstance(t, Fraction):
        return PrecisionInterval.point(t, bits)
    return t
