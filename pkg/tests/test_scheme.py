import math

import numpy as np
import pytest

from slicematch.measure import MeasureError, from_points, translate
from slicematch.scheme import (Schedule, block_minima, check_lemma_consecutive, consecutive_residual,
                               first_reaching, read_trajectory_csv, run, running_min, schedule_gamma,
                               step, write_trajectory_csv)
from slicematch.slicing import DirectionSampler, OrthogonalFrame, haar_frames


class TestSchedule:
    def test_log_over_k(self):
        s = Schedule("log-over-k")
        assert s.gamma(0) == 1.0
        assert s.gamma(1) == 1.0
        assert s.gamma(2) == 1.0
        assert s.gamma(4) == pytest.approx(0.75)
        assert s.gamma(8) == pytest.approx(0.5)

    def test_inverse_k(self):
        s = Schedule("inverse-k")
        assert s.gamma(0) == 1.0
        assert s.gamma(10) == pytest.approx(0.1)
        assert schedule_gamma(s, 4) == 0.25

    def test_constant_and_flags(self):
        assert Schedule("constant", 0.3).gamma(100) == 0.3
        assert not Schedule("constant", 1.0).a2_compliant
        assert Schedule("inverse-k").a2_compliant and Schedule("log-over-k").a2_compliant
        assert not Schedule("custom-list", values=(0.5,)).a2_compliant

    def test_custom_list(self):
        s = Schedule("custom-list", values=(0.9, 0.4))
        assert [s.gamma(k) for k in range(3)] == [0.9, 0.9, 0.4]
        with pytest.raises(IndexError):
            s.gamma(3)

    def test_invalid(self):
        with pytest.raises(ValueError):
            Schedule("geometric")
        with pytest.raises(ValueError):
            Schedule("constant", 1.5)
        with pytest.raises(ValueError):
            Schedule("custom-list")
        with pytest.raises(ValueError):
            Schedule("inverse-k").gamma(-1)

    def test_dict_round_trip(self):
        for s in (Schedule("log-over-k"), Schedule("constant", 0.25), Schedule("custom-list", values=(0.5, 0.1))):
            assert Schedule.from_dict(s.to_dict()) == s

    def test_range(self):
        s = Schedule("log-over-k")
        g = [s.gamma(k) for k in range(1, 500)]
        assert all(0 < v <= 1 for v in g)


class TestStep:
    def test_gamma_zero(self, rng):
        cur, tgt = from_points(rng.normal(size=(6, 2))), from_points(rng.normal(size=(6, 2)))
        nxt, loss = step(cur, tgt, OrthogonalFrame.identity(2), 2, 0.0)
        np.testing.assert_array_equal(nxt.points, cur.points)
        assert loss > 0

    def test_full_1d_step(self):
        nxt, loss = step(from_points([0, 10]), from_points([2, 4]), OrthogonalFrame.identity(1), 1, 1.0)
        np.testing.assert_array_equal(nxt.points[:, 0], [2, 4])
        assert loss == pytest.approx(0.5 * (4 + 36))

    def test_midpoint(self):
        nxt, loss = step(from_points([(0, 0)]), from_points([(4, 0)]), OrthogonalFrame.identity(2), 1, 0.5)
        np.testing.assert_array_equal(nxt.points, [[2, 0]])
        assert loss == 16

    def test_weights_carried(self, rng):
        cur = from_points(rng.normal(size=(5, 2)), [1, 2, 3, 4, 5])
        nxt, _ = step(cur, from_points(rng.normal(size=(3, 2))), OrthogonalFrame.identity(2), 1, 0.7)
        np.testing.assert_array_equal(nxt.weights, cur.weights)

    def test_errors(self, rng):
        cur = from_points(rng.normal(size=(3, 2)))
        with pytest.raises(ValueError):
            step(cur, cur, OrthogonalFrame.identity(2), 1, 1.5)
        with pytest.raises(ValueError):
            step(cur, cur, OrthogonalFrame.identity(3), 1, 0.5)
        with pytest.raises(ValueError):
            step(cur, cur, OrthogonalFrame.identity(2), 0, 0.5)
        with pytest.raises(MeasureError):
            step(cur, from_points([(0, 0, 0)]), OrthogonalFrame.identity(2), 1, 0.5)


class TestConsecutive:
    def test_gamma_zero(self, rng):
        a, b = from_points(rng.normal(size=(4, 2))), from_points(rng.normal(size=(4, 2)))
        res = consecutive_residual(a, b, OrthogonalFrame.identity(2), 1, 0.0)
        assert res.displacement_cost == 0 and res.predicted == 0

    def test_small_instance_with_oracle(self, rng):
        a, b = from_points(rng.normal(size=(4, 2))), from_points(rng.normal(size=(4, 2)) + 1)
        frame = OrthogonalFrame(haar_frames(rng, 2, 1)[0])
        res = consecutive_residual(a, b, frame, 1, 0.6, exact=True)
        assert res.relative <= 1e-12
        assert res.oracle_residual <= 1e-10 * res.displacement_cost

    def test_on_trajectory(self, rng):
        a, b = from_points(rng.normal(size=(8, 3))), from_points(rng.normal(size=(8, 3)) * 2)
        traj = run(a, b, 2, Schedule("inverse-k"), DirectionSampler("haar-orthogonal", 3), 5, sw2_dirs=0)
        for k in range(5):
            res = check_lemma_consecutive(traj, k, w2_oracle=True)
            assert res.relative <= 1e-10
            assert res.predicted == pytest.approx(traj.records[k + 1].consecutive_cost, rel=1e-12)


class TestRun:
    def test_reproducible(self, rng):
        a, b = from_points(rng.normal(size=(20, 2))), from_points(rng.normal(size=(20, 2)) + 3)
        t1 = run(a, b, 1, Schedule("log-over-k"), DirectionSampler("haar-orthogonal", 5), 10, sw2_dirs=50)
        t2 = run(a, b, 1, Schedule("log-over-k"), DirectionSampler("haar-orthogonal", 5), 10, sw2_dirs=50)
        np.testing.assert_array_equal(t1.final.points, t2.final.points)
        np.testing.assert_array_equal(t1.sw2_series(), t2.sw2_series())

    def test_records_layout(self, rng):
        a, b = from_points(rng.normal(size=(10, 2))), from_points(rng.normal(size=(10, 2)))
        traj = run(a, b, 2, Schedule("inverse-k"), DirectionSampler("haar-orthogonal", 1), 6, sw2_dirs=20,
                   snapshot_every=2)
        assert traj.iterations == 6
        assert [r.k for r in traj.records] == list(range(7))
        assert traj.records[0].gamma == 0 and traj.records[0].frame is None
        assert [r.gamma for r in traj.records[1:]] == [1 / k for k in range(1, 7)]
        assert sorted(traj.snapshots) == [0, 2, 4, 6]
        np.testing.assert_allclose(traj.replay(3).points, run(a, b, 2, Schedule("inverse-k"),
                                   DirectionSampler("haar-orthogonal", 1), 3, sw2_dirs=0).final.points)

    def test_fixed_point(self, rng):
        m = from_points(rng.normal(size=(12, 2)))
        traj = run(m, m, 1, Schedule("log-over-k"), DirectionSampler("haar-orthogonal", 0), 5, sw2_dirs=30)
        np.testing.assert_allclose(traj.final.points, m.points, atol=1e-12)
        assert np.all(traj.sw2_series() <= 1e-12)

    def test_repeated_frame_is_stationary(self, rng):
        a, b = from_points(rng.normal(size=(16, 3))), from_points(rng.normal(size=(16, 3)) * 3 - 1)
        frame = haar_frames(rng, 3, 1)[0]
        traj = run(a, b, 3, Schedule("constant", 1.0), DirectionSampler("fixed-list", fixed=[frame, frame]), 2,
                   sw2_dirs=0, snapshot_every=1)
        assert np.max(np.abs(traj.snapshots[2].points - traj.snapshots[1].points)) <= 1e-12

    def test_sw2_disabled(self, rng):
        a = from_points(rng.normal(size=(5, 2)))
        traj = run(a, translate(a, (1, 0)), 1, Schedule("inverse-k"), iterations=2, sw2_dirs=0)
        assert all(math.isnan(v) for v in traj.sw2_series())

    def test_threshold_stops_early(self, rng):
        a = from_points(rng.normal(size=(30, 2)))
        traj = run(a, translate(a, (2, 0)), 2, Schedule("constant", 1.0), DirectionSampler("haar-orthogonal", 2),
                   50, sw2_dirs=50, sw2_threshold=1e-9)
        assert traj.iterations < 50

    def test_translation_block_minima(self):
        rng = np.random.default_rng(3)
        a = from_points(rng.normal(size=(64, 2)))
        traj = run(a, translate(a, (1, 1)), 1, Schedule("log-over-k"), DirectionSampler("haar-orthogonal", 4),
                   100, sw2_dirs=200)
        blocks = block_minima(traj.sw2_series(), 20)
        assert np.all(np.diff(blocks) <= 0)
        assert blocks[-1] < 0.1 * traj.sw2_series()[0]

    def test_errors(self, rng):
        a = from_points(rng.normal(size=(5, 2)))
        with pytest.raises(ValueError):
            run(a, a, 3, Schedule(), iterations=1)
        with pytest.raises(ValueError):
            run(a, a, 1, Schedule(), iterations=0)
        with pytest.raises(MeasureError):
            run(a, from_points([(0, 0, 0)]), 1, Schedule())


class TestSeriesHelpers:
    def test_running_min(self):
        np.testing.assert_array_equal(running_min([3, 1, 2, 0.5]), [3, 1, 1, 0.5])

    def test_block_minima(self):
        np.testing.assert_array_equal(block_minima([5, 4, 6, 1, 2], 2), [4, 1, 2])

    def test_first_reaching(self):
        assert first_reaching([5, 3, 1, 0], 3) == 1
        assert first_reaching([5, 4], 1) is None


def test_csv_round_trip(tmp_path, rng):
    a, b = from_points(rng.normal(size=(10, 2))), from_points(rng.normal(size=(10, 2)) + 1)
    traj = run(a, b, 1, Schedule("log-over-k"), DirectionSampler("haar-orthogonal", 9), 4, sw2_dirs=25)
    path = tmp_path / "t.csv"
    write_trajectory_csv(traj, path)
    assert path.read_text().splitlines()[0] == "k,gamma,slice_loss_sum,consecutive_cost,sw2_estimate,sw2_stderr"
    data = read_trajectory_csv(path)
    np.testing.assert_array_equal(data["sw2_estimate"], traj.sw2_series())
    np.testing.assert_array_equal(data["gamma"], [r.gamma for r in traj.records])
    np.testing.assert_array_equal(data["consecutive_cost"], [r.consecutive_cost for r in traj.records])
