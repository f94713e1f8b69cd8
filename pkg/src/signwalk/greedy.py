"""Greedy sign-selection engine with deterministic trace recording.

The recursion: a_0 = 0 and a_n = a_{n-1} + x_n if a_{n-1} <= x, else
a_{n-1} - x_n. Every sign decision is certified: either by exact rational
arithmetic, or by disjoint enclosures of the partial sum and the target,
escalating the working precision (and replaying the already-certified
sign prefix) whenever a comparison is undecided.
"""

from __future__ import annotations

import csv
import json
from array import array
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from math import log10
from typing import NamedTuple

from .exactnum import (DEFAULT_CAP_BITS, DEFAULT_INITIAL_BITS, PrecisionInterval,
                       PrecisionExhaustedError, TargetExpr, eval_target,
                       scale_ceil, scale_floor)
from .moments import SequenceSpec, scaled_term_stream, term

TRACE_FORMAT_VERSION = 1

# above this step count, exact rational partial sums get too expensive
DEFAULT_EXACT_THRESHOLD = 512

# once escalation passes this precision with a fully rational problem,
# settle the comparison by one exact replay instead of doubling further
_EXACT_FALLBACK_BITS = 4096

_MANT_BITS = 62


class GreedyPrecisionError(PrecisionExhaustedError):
    """Precision cap exhausted mid-run; carries the stuck index."""

    def __init__(self, message: str, bits: int, index: int):
        super().__init__(message, bits)
        self.index = index


@dataclass(frozen=True)
class GreedyRun:
    """Configuration of one greedy run."""

    target: TargetExpr
    spec: SequenceSpec
    max_steps: int
    checkpoint_stride: int = 1
    prec_init: int = DEFAULT_INITIAL_BITS
    prec_cap: int = DEFAULT_CAP_BITS
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.checkpoint_stride < 1:
            raise ValueError("checkpoint_stride must be >= 1")


class Checkpoint(NamedTuple):
    n: int
    lo_m: int
    lo_e: int
    hi_m: int
    hi_e: int
    bits: int

    @property
    def lo(self) -> Fraction:
        return _unpack(self.lo_m, self.lo_e)

    @property
    def hi(self) -> Fraction:
        return _unpack(self.hi_m, self.hi_e)

    def interval(self) -> PrecisionInterval:
        return PrecisionInterval(self.lo, self.hi, self.bits)


def _pack_down(v: int, scale_bits: int) -> tuple[int, int]:
    if v <= 0:
        return 0, 0
    bl = v.bit_length()
    if bl <= _MANT_BITS:
        return v, -scale_bits
    s = bl - _MANT_BITS
    return v >> s, s - scale_bits


def _pack_up(v: int, scale_bits: int) -> tuple[int, int]:
    if v <= 0:
        return 0, 0
    bl = v.bit_length()
    if bl <= _MANT_BITS:
        return v, -scale_bits
    s = bl - _MANT_BITS
    return -((-v) >> s), s - scale_bits


def _unpack(m: int, e: int) -> Fraction:
    if e >= 0:
        return Fraction(m << e)
    return Fraction(m, 1 << -e)


class CheckpointTable:
    """Column store of certified error enclosures |x - a_n| at checkpoints.

    Enclosures are kept as outward-rounded (mantissa, exponent) pairs so a
    million-row table stays compact while every row is still a true
    enclosure, never a float approximation.
    """

    __slots__ = ("ns", "lo_m", "lo_e", "hi_m", "hi_e", "bits")

    def __init__(self):
        self.ns = array("q")
        self.lo_m = array("q")
        self.lo_e = array("q")
        self.hi_m = array("q")
        self.hi_e = array("q")
        self.bits = array("q")

    def append_scaled(self, n: int, lo: int, hi: int, scale_bits: int, bits: int) -> None:
        lm, le = _pack_down(lo, scale_bits)
        hm, he = _pack_up(hi, scale_bits)
        self.ns.append(n)
        self.lo_m.append(lm)
        self.lo_e.append(le)
        self.hi_m.append(hm)
        self.hi_e.append(he)
        self.bits.append(bits)

    def __len__(self) -> int:
        return len(self.ns)

    def row(self, i: int) -> Checkpoint:
        return Checkpoint(self.ns[i], self.lo_m[i], self.lo_e[i],
                          self.hi_m[i], self.hi_e[i], self.bits[i])

    def __iter__(self):
        for i in range(len(self.ns)):
            yield self.row(i)

    def index_of(self, n: int) -> int | None:
        i = bisect_left(self.ns, n)
        if i < len(self.ns) and self.ns[i] == n:
            return i
        return None


@dataclass
class GreedyTrace:
    """Deterministic record of a greedy run."""

    cfg: GreedyRun
    signs: list[int]                  # entries +1 / -1; signs[k] is eps_{k+1}
    checkpoints: CheckpointTable
    final_bits: int
    exact_mode: bool
    _crossings: list[int] | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.signs)

    @property
    def crossings(self) -> list[int]:
        """Indices m with x between a_m and a_{m+1} (sign change at m+2)."""
        if self._crossings is None:
            s = self.signs
            self._crossings = [m for m in range(len(s) - 1) if s[m] != s[m + 1]]
        return self._crossings

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        bits = 0
        for i, s in enumerate(self.signs):
            if s > 0:
                bits |= 1 << i
        ck = self.checkpoints
        return {
            "version": TRACE_FORMAT_VERSION,
            "target": str(self.cfg.target),
            "spec": str(self.cfg.spec),
            "max_steps": self.cfg.max_steps,
            "checkpoint_stride": self.cfg.checkpoint_stride,
            "prec_init": self.cfg.prec_init,
            "prec_cap": self.cfg.prec_cap,
            "final_bits": self.final_bits,
            "exact_mode": self.exact_mode,
            "num_signs": len(self.signs),
            "signs_hex": format(bits, "x"),
            "checkpoints": {
                "n": list(ck.ns), "lo_m": list(ck.lo_m), "lo_e": list(ck.lo_e),
                "hi_m": list(ck.hi_m), "hi_e": list(ck.hi_e), "bits": list(ck.bits),
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GreedyTrace":
        if d.get("version") != TRACE_FORMAT_VERSION:
            raise ValueError(f"unsupported trace version {d.get('version')!r}")
        cfg = GreedyRun(
            target=TargetExpr.parse(d["target"]),
            spec=SequenceSpec.parse(d["spec"]),
            max_steps=d["max_steps"],
            checkpoint_stride=d["checkpoint_stride"],
            prec_init=d["prec_init"],
            prec_cap=d["prec_cap"],
        )
        n = d["num_signs"]
        bits = int(d["signs_hex"], 16)
        signs = [1 if (bits >> i) & 1 else -1 for i in range(n)]
        ck = CheckpointTable()
        c = d["checkpoints"]
        ck.ns.extend(c["n"])
        ck.lo_m.extend(c["lo_m"])
        ck.lo_e.extend(c["lo_e"])
        ck.hi_m.extend(c["hi_m"])
        ck.hi_e.extend(c["hi_e"])
        ck.bits.extend(c["bits"])
        return cls(cfg=cfg, signs=signs, checkpoints=ck,
                   final_bits=d["final_bits"], exact_mode=d["exact_mode"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "GreedyTrace":
        return cls.from_dict(json.loads(s))

    def write_csv(self, fh) -> None:
        """CSV rows (n, sign, log10_error_lo, log10_error_hi) at checkpoints."""
        w = csv.writer(fh)
        w.writerow(["n", "sign", "log10_error_lo", "log10_error_hi"])
        for row in self.checkpoints:
            sign = self.signs[row.n - 1]
            w.writerow([row.n, sign, _log10_str(row.lo_m, row.lo_e),
                        _log10_str(row.hi_m, row.hi_e)])


def _log10_str(m: int, e: int) -> str:
    if m == 0:
        return "-inf"
    return f"{log10(m) + e * 0.30102999566398120:.12f}"


# ---------------------------------------------------------------------------
# the engine

def run(cfg: GreedyRun) -> GreedyTrace:
    """Execute the greedy recursion and record the full trace.

    The tie a_{n-1} == x takes the + branch. Rational target with rational
    terms and a small step count runs in exact arithmetic; everything else
    uses certified scaled-integer enclosures with escalation replay.
    """
    if _can_run_exact(cfg):
        return _run_exact(cfg)
    return _run_interval(cfg)


def _can_run_exact(cfg: GreedyRun) -> bool:
    return (cfg.spec.is_exact and cfg.target.is_rational()
            and cfg.max_steps <= cfg.exact_threshold)


def _run_exact(cfg: GreedyRun) -> GreedyTrace:
    x = cfg.target.rational_value()
    a = Fraction(0)
    signs: list[int] = []
    ck = CheckpointTable()
    scale = cfg.prec_init
    for n in range(1, cfg.max_steps + 1):
        eps = 1 if a <= x else -1
        signs.append(eps)
        a = a + term(cfg.spec, n) * eps
        if n % cfg.checkpoint_stride == 0:
            err = abs(x - a)
            lo = scale_floor(err, scale)
            hi = scale_ceil(err, scale)
            ck.append_scaled(n, lo, hi, scale, cfg.prec_init)
    return GreedyTrace(cfg=cfg, signs=signs, checkpoints=ck,
                       final_bits=cfg.prec_init, exact_mode=True)


def _scaled_target(t: TargetExpr, scale_bits: int) -> tuple[int, int]:
    if t.is_rational():
        v = t.rational_value()
        return scale_floor(v, scale_bits), scale_ceil(v, scale_bits)
    iv = eval_target(t, scale_bits + 8)
    return scale_floor(iv.lo, scale_bits), scale_ceil(iv.hi, scale_bits)


def _replay_scaled(signs: list[int], term_f, upto: int) -> tuple[int, int]:
    lo = hi = 0
    for k in range(1, upto + 1):
        tl, th = term_f(k)
        if signs[k - 1] > 0:
            lo += tl
            hi += th
        else:
            lo -= th
            hi -= tl
    return lo, hi


def _run_interval(cfg: GreedyRun) -> GreedyTrace:
    bits = cfg.prec_init
    term_f = scaled_term_stream(cfg.spec, bits)
    t_lo, t_hi = _scaled_target(cfg.target, bits)
    rational_problem = cfg.spec.is_exact and cfg.target.is_rational()
    stride = cfg.checkpoint_stride
    signs: list[int] = []
    ck = CheckpointTable()
    sum_lo = sum_hi = 0
    for n in range(1, cfg.max_steps + 1):
        while True:
            if sum_hi <= t_lo:
                eps = 1
                break
            if sum_lo > t_hi:
                eps = -1
                break
            if rational_problem and bits >= _EXACT_FALLBACK_BITS:
                eps = _exact_sign(cfg, signs, n)
                break
            bits *= 2
            if bits > cfg.prec_cap:
                raise GreedyPrecisionError(
                    f"precision cap {cfg.prec_cap} exhausted at step {n}",
                    cfg.prec_cap, n)
            term_f = scaled_term_stream(cfg.spec, bits)
            t_lo, t_hi = _scaled_target(cfg.target, bits)
            sum_lo, sum_hi = _replay_scaled(signs, term_f, n - 1)
        signs.append(eps)
        tl, th = term_f(n)
        if eps > 0:
            sum_lo += tl
            sum_hi += th
        else:
            sum_lo -= th
            sum_hi -= tl
        if n % stride == 0:
            d_lo = t_lo - sum_hi
            d_hi = t_hi - sum_lo
            if d_lo >= 0:
                e_lo, e_hi = d_lo, d_hi
            elif d_hi <= 0:
                e_lo, e_hi = -d_hi, -d_lo
            else:
                e_lo, e_hi = 0, max(-d_lo, d_hi)
            ck.append_scaled(n, e_lo, e_hi, bits, bits)
    return GreedyTrace(cfg=cfg, signs=signs, checkpoints=ck,
                       final_bits=bits, exact_mode=False)


def _exact_sign(cfg: GreedyRun, signs: list[int], n: int) -> int:
    """Settle an undecided comparison by one exact rational replay."""
    x = cfg.target.rational_value()
    a = Fraction(0)
    for k in range(1, n):
        a += term(cfg.spec, k) * signs[k - 1]
    return 1 if a <= x else -1


# ---------------------------------------------------------------------------
# trace queries

def error_at(trace: GreedyTrace, n: int, bits: int) -> PrecisionInterval:
    """Certified enclosure of |x - a_n|, recomputed from the sign prefix."""
    if not 0 <= n <= len(trace.signs):
        raise ValueError(f"n={n} outside trace of length {len(trace.signs)}")
    cfg = trace.cfg
    if trace.exact_mode:
        x = cfg.target.rational_value()
        a = sum((term(cfg.spec, k) * trace.signs[k - 1] for k in range(1, n + 1)),
                Fraction(0))
        return PrecisionInterval.point(abs(x - a), bits)
    work = bits + (n + 2).bit_length() + 8
    term_f = scaled_term_stream(cfg.spec, work)
    t_lo, t_hi = _scaled_target(cfg.target, work)
    s_lo, s_hi = _replay_scaled(trace.signs, term_f, n)
    d_lo = t_lo - s_hi
    d_hi = t_hi - s_lo
    if d_lo >= 0:
        e_lo, e_hi = d_lo, d_hi
    elif d_hi <= 0:
        e_lo, e_hi = -d_hi, -d_lo
    else:
        e_lo, e_hi = 0, max(-d_lo, d_hi)
    return PrecisionInterval.from_scaled(e_lo, e_hi, work, bits)


def first_crossing(trace: GreedyTrace) -> int | None:
    """Smallest m with min(a_m, a_{m+1}) <= x <= max(a_m, a_{m+1}), or None."""
    s = trace.signs
    for m in range(len(s) - 1):
        if s[m] != s[m + 1]:
            return m
    return None
