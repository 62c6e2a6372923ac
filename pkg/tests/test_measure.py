import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from slicematch.measure import (MeasureError, from_points, pushforward, read_point_cloud,
                                second_moment, translate, write_point_cloud)

coords = st.floats(-100, 100, allow_nan=False)


class TestFromPoints:
    def test_uniform_default(self):
        m = from_points([(0, 0), (1, 1)])
        np.testing.assert_array_equal(m.weights, [0.5, 0.5])
        assert m.dim == 2

    def test_normalizes(self):
        m = from_points([(0,)], [3])
        np.testing.assert_array_equal(m.weights, [1.0])

    @pytest.mark.parametrize("points,weights", [
        ([(0, 0)], [-1]),
        ([], None),
        ([(0, 0), (1, 1)], [1]),
        ([(0, 0), (1, 1)], [0, 0]),
        ([(np.nan, 0)], None),
    ])
    def test_rejects(self, points, weights):
        with pytest.raises(MeasureError):
            from_points(points, weights)

    def test_immutable(self):
        m = from_points([(0, 0)])
        with pytest.raises(ValueError):
            m.points[0, 0] = 1.0

    @given(arrays(float, st.tuples(st.integers(1, 20), st.integers(1, 4)), elements=coords),
           st.data())
    def test_weights_sum_to_one(self, pts, data):
        w = data.draw(arrays(float, pts.shape[0], elements=st.floats(0.01, 10)))
        m = from_points(pts, w)
        assert abs(m.weights.sum() - 1.0) < 1e-12
        assert np.all(m.weights >= 0)


class TestTranslate:
    def test_shift(self):
        m = translate(from_points([(0, 0), (1, 0)]), (2, 0))
        np.testing.assert_array_equal(m.points, [[2, 0], [3, 0]])
        np.testing.assert_array_equal(m.weights, [0.5, 0.5])

    def test_zero_shift(self, rng):
        m = from_points(rng.normal(size=(5, 3)))
        np.testing.assert_array_equal(translate(m, np.zeros(3)).points, m.points)

    def test_one_dimensional(self):
        np.testing.assert_array_equal(translate(from_points([(1,)]), (-1,)).points, [[0]])

    def test_dimension_mismatch(self):
        with pytest.raises(MeasureError):
            translate(from_points([(0, 0)]), (1,))

    @given(arrays(float, (6, 3), elements=coords), arrays(float, 3, elements=coords))
    def test_round_trip(self, pts, b):
        m = from_points(pts)
        back = translate(translate(m, b), -b)
        np.testing.assert_allclose(back.points, m.points, rtol=0, atol=1e-12 * max(1, np.abs(b).max()) * 100)

    @given(arrays(float, (6, 2), elements=coords), arrays(float, 2, elements=coords))
    def test_second_moment_shift_identity(self, pts, b):
        m = from_points(pts)
        lhs = second_moment(translate(m, b))
        rhs = second_moment(m) + 2 * b @ m.mean() + b @ b
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-9)


class TestPushforward:
    def test_identity(self, rng):
        m = from_points(rng.normal(size=(4, 2)))
        np.testing.assert_array_equal(pushforward(m, lambda x: x).points, m.points)

    def test_scaling(self):
        m = pushforward(from_points([(0,), (1,)]), lambda x: 2 * x)
        np.testing.assert_array_equal(m.points[:, 0], [0, 2])

    def test_atoms_not_merged(self):
        m = pushforward(from_points([(0,), (1,)]), lambda x: 0 * x)
        assert m.size == 2
        np.testing.assert_array_equal(m.weights, [0.5, 0.5])

    def test_vectorized(self, rng):
        m = from_points(rng.normal(size=(7, 3)), rng.random(7))
        out = pushforward(m, lambda p: p + 1, vectorized=True)
        np.testing.assert_array_equal(out.points, m.points + 1)
        assert out.weights.sum() == pytest.approx(1.0, abs=1e-15)

    def test_non_finite(self):
        with pytest.raises(MeasureError):
            pushforward(from_points([(1,)]), lambda x: x * np.inf)


class TestSecondMoment:
    @pytest.mark.parametrize("pts,expected", [([(0, 0)], 0.0), ([(1, 0), (0, 1)], 1.0), ([(3, 4)], 25.0)])
    def test_values(self, pts, expected):
        assert second_moment(from_points(pts)) == expected


class TestPointCloudFile:
    def test_round_trip_weighted(self, tmp_path, rng):
        m = from_points(rng.normal(size=(5, 3)), rng.random(5))
        write_point_cloud(m, tmp_path / "m.txt")
        back = read_point_cloud(tmp_path / "m.txt")
        np.testing.assert_array_equal(back.points, m.points)
        np.testing.assert_allclose(back.weights, m.weights, rtol=1e-15)

    def test_weights_optional(self, tmp_path):
        (tmp_path / "m.txt").write_text("dim=2\n0,0\n1,1\n")
        m = read_point_cloud(tmp_path / "m.txt")
        np.testing.assert_array_equal(m.weights, [0.5, 0.5])

    def test_bad_header(self, tmp_path):
        (tmp_path / "m.txt").write_text("0,0\n")
        with pytest.raises(MeasureError):
            read_point_cloud(tmp_path / "m.txt")
