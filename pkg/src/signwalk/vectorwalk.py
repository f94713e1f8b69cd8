"""Greedy signed planar walks: pick the sign of each step vector that moves
the partial sum closer to the origin, and export the trajectory.

Components use fixed high-precision floats (default 128 bits), not certified
intervals: this is an exploratory point-cloud generator, with determinism as
the only hard guarantee. The tie ||x+v|| = ||x-v|| takes +.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Union

import gmpy2

from .exactnum import TargetExpr, eval_target

DEFAULT_WALK_BITS = 128


@dataclass(frozen=True)
class PlanarVector:
    x: object    # gmpy2.mpfr
    y: object

    def norm_sq(self) -> object:
        return self.x * self.x + self.y * self.y

    def __iter__(self):
        return iter((self.x, self.y))


@dataclass(frozen=True)
class Rotation:
    """v_n = (cos 2*pi*n*alpha, sin 2*pi*n*alpha)."""

    alpha: TargetExpr

    @classmethod
    def of(cls, alpha) -> "Rotation":
        return cls(_as_target(alpha))


@dataclass(frozen=True)
class NearestIntPhase:
    """v_n = (cos 2*pi*||beta*n||, sin 2*pi*||beta*n||) with ||t|| the
    distance from t to the nearest integer."""

    beta: TargetExpr

    @classmethod
    def of(cls, beta) -> "NearestIntPhase":
        return cls(_as_target(beta))


@dataclass(frozen=True)
class Explicit:
    """A literal list of step vectors."""

    vectors: tuple[tuple[Fraction, Fraction], ...]

    @classmethod
    def of(cls, pairs: Iterable[tuple]) -> "Explicit":
        return cls(tuple((Fraction(a), Fraction(b)) for a, b in pairs))


Generator = Union[Rotation, NearestIntPhase, Explicit]


def _as_target(v) -> TargetExpr:
    if isinstance(v, TargetExpr):
        return v
    if isinstance(v, str):
        return TargetExpr.parse(v)
    return TargetExpr.rational(Fraction(v))


@dataclass(frozen=True)
class WalkSpec:
    generator: Generator
    steps: int
    bits: int = DEFAULT_WALK_BITS

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if isinstance(self.generator, Explicit) and \
                len(self.generator.vectors) < self.steps:
            raise ValueError("explicit generator shorter than steps")


@dataclass
class WalkTrace:
    spec: WalkSpec
    points: list[PlanarVector] = field(default_factory=list)

    def write_csv(self, path: str) -> None:
        """Atomic write of columns n,x,y with a fixed 25-significant-digit
        rendering, so identical walks produce byte-identical files."""
        d = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as f:
                f.write("n,x,y\n")
                for n, p in enumerate(self.points, 1):
                    f.write(f"{n},{_fmt(p.x)},{_fmt(p.y)}\n")
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def _fmt(v) -> str:
    return f"{v:.25g}"


def _phase_fractions(target: TargetExpr, steps: int, bits: int,
                     nearest_int: bool) -> Iterator[Fraction]:
    """Phases for step n = 1..steps as exact fractions in [0, 1).

    One high-precision enclosure of the base value is computed up front;
    its error times n stays below the working precision for every step.
    """
    prec = bits + steps.bit_length() + 24
    base = eval_target(target, prec).midpoint
    for n in range(1, steps + 1):
        t = base * n
        f = t - (t.numerator // t.denominator)
        if nearest_int:
            f = min(f, 1 - f)     # ||t||: distance to the nearest integer
        yield f


def _step_vectors(spec: WalkSpec):
    gen = spec.generator
    two_pi = 2 * gmpy2.const_pi()
    if isinstance(gen, Explicit):
        for a, b in gen.vectors[:spec.steps]:
            yield gmpy2.mpfr(a), gmpy2.mpfr(b)
        return
    nearest = isinstance(gen, NearestIntPhase)
    target = gen.beta if nearest else gen.alpha
    for f in _phase_fractions(target, spec.steps, spec.bits, nearest):
        ang = two_pi * gmpy2.mpfr(f)
        yield gmpy2.cos(ang), gmpy2.sin(ang)


def walk(spec: WalkSpec) -> WalkTrace:
    """Run the greedy walk: x_n = x_{n-1} + s*v_n with s = + iff
    <x_{n-1}, v_n> <= 0 (the sign whose result is nearer the origin)."""
    trace = WalkTrace(spec=spec)
    with gmpy2.context(precision=spec.bits):
        x = gmpy2.mpfr(0)
        y = gmpy2.mpfr(0)
        for vx, vy in _step_vectors(spec):
            s = 1 if x * vx + y * vy <= 0 else -1
            x = x + s * vx
            y = y + s * vy
            trace.points.append(PlanarVector(x, y))
    return trace
