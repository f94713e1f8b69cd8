import io
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from signwalk.exactnum import TargetExpr, eval_target
from signwalk.moments import SequenceSpec, term
from signwalk.greedy import (GreedyRun, GreedyTrace, error_at, first_crossing,
                             run)

HARM = SequenceSpec.parse("harmonic")


def _signs_by_float(target: float, steps: int) -> list[int]:
    """Float reference oracle, valid while errors stay far above 1e-12."""
    a = 0.0
    out = []
    for n in range(1, steps + 1):
        s = 1 if a <= target else -1
        a += s / n
        out.append(s)
    return out


class TestRecursion:
    def test_matches_float_oracle_early(self):
        tr = run(GreedyRun(TargetExpr.parse("sqrt(2)"), HARM, 50))
        assert tr.signs == _signs_by_float(2 ** 0.5, 50)

    def test_tie_takes_plus(self):
        # target 1, harmonic: a_1 = 1 hits the target exactly; tie -> +
        tr = run(GreedyRun(TargetExpr.parse("1"), HARM, 3))
        assert tr.signs[0] == 1 and tr.signs[1] == 1

    def test_first_step_is_plus_from_zero(self):
        tr = run(GreedyRun(TargetExpr.parse("sqrt(2)"), HARM, 1))
        assert tr.signs == [1]

    def test_exact_and_interval_modes_agree(self):
        cfg_e = GreedyRun(TargetExpr.parse("3/7"), HARM, 400, exact_threshold=512)
        cfg_i = GreedyRun(TargetExpr.parse("3/7"), HARM, 400, exact_threshold=0)
        te, ti = run(cfg_e), run(cfg_i)
        assert te.exact_mode and not ti.exact_mode
        assert te.signs == ti.signs


class TestDeterminism:
    def test_identical_runs(self, sqrt2_harmonic_1e4):
        again = run(sqrt2_harmonic_1e4.cfg)
        assert again.signs == sqrt2_harmonic_1e4.signs

    def test_precision_insensitive(self):
        base = GreedyRun(TargetExpr.parse("sqrt(2)"), HARM, 2000)
        doubled = GreedyRun(TargetExpr.parse("sqrt(2)"), HARM, 2000,
                            prec_init=2 * base.prec_init)
        assert run(base).signs == run(doubled).signs


class TestCheckpoints:
    def test_stride(self):
        tr = run(GreedyRun(TargetExpr.parse("sqrt(2)"), HARM, 100,
                           checkpoint_stride=10))
        assert list(tr.checkpoints.ns) == list(range(10, 101, 10))

    def test_enclosures_contain_true_error(self):
        tr = run(GreedyRun(TargetExpr.parse("sqrt(2)"), HARM, 200))
        x = eval_target(tr.cfg.target, 512)
        a = Fraction(0)
        for i, s in enumerate(tr.signs, 1):
            a += s * Fraction(1, i)
            row = tr.checkpoints.row(tr.checkpoints.index_of(i))
            err_lo = abs(a - x.hi) if a > x.hi else abs(x.lo - a) if a < x.lo else Fraction(0)
            err_hi = max(abs(a - x.lo), abs(x.hi - a))
            assert Fraction(row.lo_m, 1) * Fraction(2) ** row.lo_e <= err_hi
            assert Fraction(row.hi_m, 1) * Fraction(2) ** row.hi_e >= err_lo

    def test_error_at_refinement_containment(self, sqrt2_harmonic_1e4):
        coarse = error_at(sqrt2_harmonic_1e4, 3858, 128)
        fine = error_at(sqrt2_harmonic_1e4, 3858, 512)
        assert coarse.lo <= fine.lo and fine.hi <= coarse.hi


class TestSerialization:
    def test_json_round_trip(self, sqrt2_harmonic_1e4):
        tr = sqrt2_harmonic_1e4
        back = GreedyTrace.from_json(tr.to_json())
        assert back.signs == tr.signs
        assert list(back.checkpoints.ns) == list(tr.checkpoints.ns)
        assert back.to_json() == tr.to_json()

    def test_csv_header_and_rows(self):
        tr = run(GreedyRun(TargetExpr.parse("sqrt(2)"), HARM, 10))
        buf = io.StringIO()
        tr.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "n,sign,log10_error_lo,log10_error_hi"
        assert len(lines) == 11

    def test_version_rejected(self, sqrt2_harmonic_1e4):
        d = sqrt2_harmonic_1e4.to_dict()
        d["version"] = 999
        with pytest.raises(ValueError):
            GreedyTrace.from_dict(d)


class TestCrossings:
    def test_first_crossing_sqrt2(self, sqrt2_harmonic_1e4):
        # a_1 = 1 < sqrt(2) < 1.5 = a_2: x is bracketed at m = 1
        assert first_crossing(sqrt2_harmonic_1e4) == 1

    def test_crossings_are_sign_changes(self, sqrt2_harmonic_1e4):
        s = sqrt2_harmonic_1e4.signs
        for m in sqrt2_harmonic_1e4.crossings[:100]:
            assert s[m] != s[m + 1]


@given(st.fractions(min_value=0, max_value=2, max_denominator=97),
       st.integers(min_value=5, max_value=120))
@settings(max_examples=30, deadline=None)
def test_invariant_vs_exact_replay(target, steps):
    """Interval engine signs equal an exact rational replay for rational
    targets."""
    cfg = GreedyRun(TargetExpr.rational(target), HARM, steps, exact_threshold=0)
    tr = run(cfg)
    a = Fraction(0)
    for n, s in enumerate(tr.signs, 1):
        assert s == (1 if a <= target else -1)
        a += s * Fraction(1, n)
