import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mosumlin._errors import InputError
from mosumlin.evaluation import MethodConfig, _aggregate, run_benchmark, score
from mosumlin.signal import TimeGrid
from oracles import brute_scores

UNIT = TimeGrid(100, 1.0)
indices = st.lists(st.integers(1, 100), min_size=1, max_size=8, unique=True).map(sorted)


class TestScore:
    def test_identical_sets(self):
        s = score([10, 20], [10, 20], UNIT)
        assert (s.count_score, s.max_score1, s.max_score2, s.hausdorff) == (0, 0, 0, 0)

    def test_hand_enumerated(self):
        s = score([10, 20], [11, 25], UNIT)
        assert (s.count_score, s.max_score1, s.max_score2) == (0, 5, 5)

    def test_all_missed(self):
        s = score([10], [], UNIT)
        assert (s.count_score, s.max_score1, s.max_score2) == (1, 100.0, 0.0)

    def test_spurious_only(self):
        s = score([], [3, 4], UNIT)
        assert (s.count_score, s.max_score1, s.max_score2) == (2, 0.0, 100.0)

    def test_both_empty(self):
        assert score([], [], UNIT).hausdorff == 0

    def test_time_units(self):
        s = score([1000], [1005], TimeGrid(3500, 0.01))
        assert s.max_score1 == pytest.approx(0.05)

    @given(indices, indices)
    def test_matches_brute_force(self, truth, est):
        s = score(truth, est, UNIT)
        assert (s.count_score, s.max_score1, s.max_score2) == brute_scores(truth, est, 1.0)

    @given(indices, indices)
    def test_hausdorff_symmetric(self, a, b):
        assert score(a, b, UNIT).hausdorff == score(b, a, UNIT).hausdorff

    @given(indices, indices, st.data())
    def test_adding_true_point_never_hurts(self, truth, est, data):
        extra = data.draw(st.sampled_from(truth))
        refined = sorted(set(est) | {extra})
        assert score(truth, refined, UNIT).max_score1 <= score(truth, est, UNIT).max_score1


class TestAggregate:
    def test_constant_scores_have_zero_se(self):
        mean, sd, se = _aggregate(np.tile([1.0, 0.5, 0.25], (50, 1)))
        assert mean == {"count_score": 1.0, "max_score1": 0.5, "max_score2": 0.25}
        assert all(v == 0 for v in se.values()) and all(v == 0 for v in sd.values())

    def test_se_is_sd_over_root_r(self, rng):
        x = rng.standard_normal((400, 3))
        _, sd, se = _aggregate(x)
        assert sd["max_score1"] == pytest.approx(x[:, 1].std(ddof=1))
        assert se["max_score1"] == pytest.approx(x[:, 1].std(ddof=1) / 20)


class TestBenchmarkPlumbing:
    def test_csv_shape(self):
        rep = run_benchmark("sim4", sigma_eps=(1.0, 2.0), replications=5, seed=3, threads=1)
        lines = rep.to_csv().splitlines()
        assert len(lines) == 3
        assert lines[0].startswith("scenario,noise,sigma_eps,replications,seed,count_score_mean")
        assert lines[1].split(",")[:5] == ["sim4", "gaussian", "1.0", "5", "3"]
        assert rep.total_seconds > 0 and rep.mean_seconds > 0
        assert "mean (standard error)" in rep.to_table()

    def test_identical_across_thread_counts(self):
        a = run_benchmark("sim1", sigma_eps=(1.0,), replications=8, seed=5, threads=1)
        b = run_benchmark("sim1", sigma_eps=(1.0,), replications=8, seed=5, threads=4)
        assert a.to_csv() == b.to_csv()
        np.testing.assert_array_equal(a.rows[0].scores, b.rows[0].scores)

    def test_requires_replications(self):
        with pytest.raises(InputError):
            run_benchmark("sim1", replications=0)

    def test_default_method(self):
        m = MethodConfig()
        assert m.bandwidths == (50, 100, 150, 250, 400, 650)
        assert (m.alpha, m.eta, m.theta, m.log_h) == (0.05, 0.3, 0.8, 0.7284)


class TestBenchmarkExamples:
    def test_sim1_counts(self):
        rep = run_benchmark("sim1", sigma_eps=(1.0,), replications=200, seed=1)
        assert rep.row(1.0).mean["count_score"] <= 0.05

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 1.5, 2.0])
    def test_sim4_counts(self, sigma):
        rep = run_benchmark("sim4", sigma_eps=(sigma,), replications=200, seed=1)
        assert rep.row(sigma).mean["count_score"] <= 0.02

    def test_sim2_localisation(self):
        rep = run_benchmark("sim2", sigma_eps=(0.5,), replications=200, seed=1)
        assert 0.06 <= rep.row(0.5).mean["max_score1"] <= 0.20
