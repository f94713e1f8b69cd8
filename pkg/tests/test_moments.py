import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from signwalk.exactnum import PrecisionInterval
from signwalk.moments import (SequenceSpec, band_start, cantor_moments, diff,
                              estimate_asymptotics, first_negative_diff,
                              gamma_ratio_rational, nth_prime, term)

HARM = SequenceSpec.parse("harmonic")
INVSQ = SequenceSpec.parse("invsq")
WIG = SequenceSpec.parse("wigner")
GAM = SequenceSpec.parse("gammaratio")
CAN = SequenceSpec.parse("cantor")
PRIMES = SequenceSpec.parse("primes")


class TestParsing:
    def test_round_trip_names(self):
        for name in ("harmonic", "invsq", "gammaratio", "wigner", "cantor",
                     "primes"):
            assert str(SequenceSpec.parse(name)) == name

    def test_diff_nesting(self):
        s = SequenceSpec.parse("diff(diff(harmonic,1),2)")
        assert s.kind == "diff" and s.order == 2
        assert s.inner.kind == "diff" and s.inner.inner.kind == "harmonic"

    def test_rejects_unknown(self):
        with pytest.raises(ValueError):
            SequenceSpec.parse("fibonacci")


class TestBaseTerms:
    def test_harmonic(self):
        assert term(HARM, 7) == Fraction(1, 7)

    def test_invsq(self):
        assert term(INVSQ, 5) == Fraction(1, 25)

    def test_wigner_values(self):
        # binomial mass C(2n+1, n+1) / 2^(2n+1)
        assert term(WIG, 1) == Fraction(3, 8)
        assert term(WIG, 2) == Fraction(10, 32)

    def test_primes(self):
        assert term(PRIMES, 1) == Fraction(1, 2)
        assert term(PRIMES, 4) == Fraction(1, 7)
        assert nth_prime(25) == 97

    def test_gammaratio_rational_part(self):
        # n! 2^(n+1) / (2n+1)!!
        assert gamma_ratio_rational(1) == Fraction(4, 3)
        assert gamma_ratio_rational(2) == Fraction(16, 15)

    def test_gammaratio_term_is_enclosure(self):
        t = term(GAM, 3, 128)
        assert isinstance(t, PrecisionInterval)
        v = gamma_ratio_rational(3) / Fraction(math.sqrt(math.pi)).limit_denominator(10**12)
        assert abs(float(t.midpoint) - float(v)) < 1e-9


class TestCantor:
    def test_first_six_exact(self):
        assert cantor_moments(6) == [
            Fraction(1), Fraction(1, 2), Fraction(3, 8), Fraction(5, 16),
            Fraction(87, 320), Fraction(31, 128)]

    def test_table_contains_exact(self):
        exact = cantor_moments(40)
        from signwalk.moments import _cantor_table
        _cantor_table.ensure(39)
        for n in range(40):
            lo, hi = _cantor_table.lo[n], _cantor_table.hi[n]
            scale = 1 << _cantor_table.scale
            assert Fraction(lo, scale) <= exact[n] <= Fraction(hi, scale)

    def test_decay_exponent(self):
        _, alpha = estimate_asymptotics(CAN, 100, 1000)
        assert 0.60 <= alpha <= 0.66


class TestDiff:
    def test_harmonic_gap_closed_form(self):
        d = diff(HARM, 1)
        assert term(d, 4) == Fraction(1, 4) - Fraction(1, 5) == Fraction(1, 20)

    def test_second_difference(self):
        d2 = diff(HARM, 2)
        expected = Fraction(1, 3) - 2 * Fraction(1, 4) + Fraction(1, 5)
        assert term(d2, 3) == expected

    def test_alpha_shifts_with_order(self):
        assert diff(INVSQ, 2).known_alpha == 4
        assert diff(HARM, 1).known_alpha == 2


class TestCompleteMonotonicity:
    @pytest.mark.parametrize("spec", [HARM, INVSQ, WIG, GAM, CAN],
                             ids=["harmonic", "invsq", "wigner", "gammaratio",
                                  "cantor"])
    def test_moment_kinds_nonnegative_small(self, spec):
        for j in range(1, 4):
            assert first_negative_diff(spec, j, 300) is None

    def test_primes_not_completely_monotone(self):
        # 1/p_n is not a moment sequence; a sign failure appears quickly
        assert first_negative_diff(PRIMES, 2, 100) is not None


class TestAsymptotics:
    def test_harmonic_fit(self):
        c, alpha = estimate_asymptotics(HARM, 100, 1000)
        assert abs(alpha - 1) < 0.01 and abs(c - 1) < 0.05

    def test_wigner_fit(self):
        c, alpha = estimate_asymptotics(WIG, 100, 1000)
        assert abs(alpha - 0.5) < 0.02
        assert abs(c - 1 / math.sqrt(math.pi)) < 0.05

    def test_band_start_small_for_harmonic(self):
        assert band_start(HARM, 1) == 1

    def test_band_start_wigner(self):
        n0 = band_start(WIG, 2)
        assert 1 <= n0 <= 100


@given(st.integers(min_value=1, max_value=200), st.integers(min_value=1, max_value=3))
@settings(max_examples=40)
def test_diff_matches_manual(n, j):
    d = diff(INVSQ, j)
    expected = sum((-1) ** i * math.comb(j, i) * Fraction(1, (n + i) ** 2)
                   for i in range(j + 1))
    assert term(d, n) == expected
