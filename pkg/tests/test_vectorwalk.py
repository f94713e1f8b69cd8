import math

import pytest
from hypothesis import given, settings, strategies as st

from signwalk.vectorwalk import (Explicit, NearestIntPhase, PlanarVector,
                                 Rotation, WalkSpec, walk)


class TestForcedCases:
    def test_rotation_zero_oscillates(self):
        tr = walk(WalkSpec(Rotation.of(0), 3))
        pts = [(float(p.x), float(p.y)) for p in tr.points]
        assert pts == [(1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]

    def test_explicit_vertical(self):
        tr = walk(WalkSpec(Explicit.of([(0, 1), (0, 1)]), 2))
        pts = [(float(p.x), float(p.y)) for p in tr.points]
        assert pts == [(0.0, 1.0), (0.0, 0.0)]

    def test_explicit_too_short_rejected(self):
        with pytest.raises(ValueError):
            WalkSpec(Explicit.of([(1, 0)]), 5)

    def test_zero_steps_rejected(self):
        with pytest.raises(ValueError):
            WalkSpec(Rotation.of(0), 0)


class TestDeterminism:
    def test_identical_csv(self, tmp_path):
        spec = WalkSpec(NearestIntPhase.of("sqrt(3)"), 2000)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        walk(spec).write_csv(str(p1))
        walk(spec).write_csv(str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_csv_header(self, tmp_path):
        p = tmp_path / "w.csv"
        walk(WalkSpec(Rotation.of(0), 2)).write_csv(str(p))
        lines = p.read_text().splitlines()
        assert lines[0] == "n,x,y" and len(lines) == 3


class TestGreedyProperty:
    def _norms(self, trace):
        return [math.hypot(float(p.x), float(p.y)) for p in trace.points]

    def test_pythagorean_bound(self):
        tr = walk(WalkSpec(NearestIntPhase.of("sqrt(3)"), 3000))
        n = self._norms(tr)
        assert all(n[i] ** 2 <= n[i - 1] ** 2 + 1 + 1e-9 for i in range(1, len(n)))

    @given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)),
                    min_size=1, max_size=30))
    @settings(max_examples=50, deadline=None)
    def test_greedy_optimality(self, vecs):
        tr = walk(WalkSpec(Explicit.of(vecs), len(vecs)))
        px, py = 0.0, 0.0
        for (vx, vy), p in zip(vecs, tr.points):
            chosen = float(p.x) ** 2 + float(p.y) ** 2
            plus = (px + vx) ** 2 + (py + vy) ** 2
            minus = (px - vx) ** 2 + (py - vy) ** 2
            assert chosen <= min(plus, minus) + 1e-9
            px, py = float(p.x), float(p.y)

    def test_tie_takes_plus(self):
        # from the origin both signs give the same norm; + must be chosen
        tr = walk(WalkSpec(Explicit.of([(3, 4)]), 1))
        assert (float(tr.points[0].x), float(tr.points[0].y)) == (3.0, 4.0)


class TestRorschach:
    def test_bounded_cloud(self):
        tr = walk(WalkSpec(NearestIntPhase.of("sqrt(3)"), 10000))
        r = max(math.hypot(float(p.x), float(p.y)) for p in tr.points)
        assert r < 10.0
