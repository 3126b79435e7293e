import numpy as np
import pytest

from rastersteps import BoundsError, LatentCode, project_2d, sample_for_display
from rastersteps.embedding import EmbeddedPoint


def codes_from_rows(rows):
    return [LatentCode(np.asarray(r, dtype=float)) for r in rows]


class TestProject2d:
    def test_line_collapses_to_first_axis(self):
        codes = codes_from_rows([[i, 2 * i, -i, 0.5 * i] for i in range(6)])
        pts = project_2d(codes)
        assert all(abs(p.y) < 1e-9 for p in pts)
        xs = [p.x for p in pts]
        assert max(abs(v) for v in xs) == pytest.approx(1.0)

    def test_duplicates_coincide(self):
        codes = codes_from_rows([[1, 2, 3], [4, 5, 6], [1, 2, 3], [4, 5, 6]])
        pts = project_2d(codes)
        assert (pts[0].x, pts[0].y) == (pts[2].x, pts[2].y)
        assert (pts[1].x, pts[1].y) == (pts[3].x, pts[3].y)

    def test_right_triangle_distances_proportional(self):
        # three codes spanning a 2D subspace of a 5D space
        e1 = np.array([1.0, 0, 0, 0, 0.0])
        e2 = np.array([0.0, 1, 0, 0, 0.0])
        rows = [0 * e1, 3 * e1, 4 * e2]
        pts = project_2d(codes_from_rows(rows))
        def dist(a, b):
            return np.hypot(a.x - b.x, a.y - b.y)
        d01, d02, d12 = dist(pts[0], pts[1]), dist(pts[0], pts[2]), dist(pts[1], pts[2])
        assert d01 / 3 == pytest.approx(d02 / 4, abs=1e-6)
        assert d01 / 3 == pytest.approx(d12 / 5, abs=1e-6)

    def test_zero_variance_collapses_to_origin(self):
        pts = project_2d(codes_from_rows([[1, 1]] * 4))
        assert all(p.x == 0 and p.y == 0 for p in pts)

    def test_too_few_codes(self):
        with pytest.raises(BoundsError):
            project_2d(codes_from_rows([[1, 2], [3, 4]]))

    def test_reorder_then_restore_invariant(self):
        rng = np.random.default_rng(5)
        rows = rng.normal(size=(12, 8))
        pts = project_2d(codes_from_rows(rows))
        perm = rng.permutation(12)
        shuffled = project_2d(codes_from_rows(rows[perm]))
        restored = [None] * 12
        for out_pos, original in enumerate(perm):
            restored[original] = shuffled[out_pos]
        for a, b in zip(pts, restored):
            assert a.x == pytest.approx(b.x, abs=1e-9)
            assert a.y == pytest.approx(b.y, abs=1e-9)

    def test_deterministic(self):
        rng = np.random.default_rng(6)
        rows = rng.normal(size=(10, 16))
        a = project_2d(codes_from_rows(rows))
        b = project_2d(codes_from_rows(rows))
        assert a == b


class TestSampleForDisplay:
    def make_points(self, n):
        return [EmbeddedPoint(index=i, x=0.0, y=0.0) for i in range(n)]

    def test_under_cap_untouched(self):
        out = sample_for_display(self.make_points(400))
        assert all(not p.sampled_out for p in out)

    def test_stride_two_at_double_cap(self):
        out = sample_for_display(self.make_points(1000))
        kept = [p.index for p in out if not p.sampled_out]
        assert kept == list(range(0, 1000, 2))

    def test_salient_always_kept(self):
        out = sample_for_display(self.make_points(1000), salient={999})
        by_index = {p.index: p for p in out}
        assert not by_index[999].sampled_out
        assert by_index[999].salient

    def test_salient_kept_for_any_cap(self):
        for cap in (10, 100, 600):
            out = sample_for_display(self.make_points(1200), salient={7, 1111}, cap=cap)
            kept = {p.index for p in out if not p.sampled_out}
            assert {7, 1111} <= kept
            assert len(kept) <= cap + 2  # stride subset plus off-stride salient
