import math

import numpy as np
import pytest

from structglrt.errors import DegenerateSpectrum, InvalidInput, InvalidRank
from structglrt.rank import (
    choose_rank,
    default_n_max,
    det_loglik,
    dof,
    estimate_rank,
    gauss_loglik,
    penalty_value,
    resolve_n_max,
)
from structglrt.schemas.detector import EmConfig, RankCriterion

CRITERIA = [
    RankCriterion(penalty="aic"),
    RankCriterion(penalty="aicc"),
    RankCriterion(penalty="bic"),
    RankCriterion(penalty="gic", gain=10.0),
    RankCriterion(penalty="gic", gain=1.1),
]


class TestPenalty:
    def test_aic(self):
        assert penalty_value(RankCriterion(penalty="aic"), 5, 100) == 5

    def test_bic(self):
        assert penalty_value(RankCriterion(penalty="bic"), 4, math.e**2) == pytest.approx(4.0)

    def test_gic(self):
        assert penalty_value(RankCriterion(penalty="gic", gain=10.0), 3, 100) == 30

    def test_aicc(self):
        assert penalty_value(RankCriterion(penalty="aicc"), 2, 10) == pytest.approx(20 / 7)

    @pytest.mark.parametrize("D", [9, 10, 50])
    def test_aicc_needs_room(self, D):
        with pytest.raises(InvalidInput):
            penalty_value(RankCriterion(penalty="aicc"), D, 10)

    def test_gain_must_be_positive(self):
        with pytest.raises(ValueError):
            RankCriterion(penalty="gic", gain=0.0)


class TestDof:
    def test_gauss_rank_zero(self):
        assert dof("gauss", 0, 4, 8) == 9

    def test_det_rank_one(self):
        assert dof("det", 1, 4, 8) == 31

    @pytest.mark.parametrize("M", [1, 4, 9])
    def test_gauss_full_rank(self, M):
        assert dof("gauss", M, M, 32) == M * M + 2 * M + 1


class TestNMax:
    def test_default(self):
        assert default_n_max(64, 1024) == 32
        assert default_n_max(16, 4) == 3

    def test_limits(self):
        with pytest.raises(InvalidRank):
            resolve_n_max(RankCriterion(n_max=4), "gauss", 4, 100)
        with pytest.raises(InvalidRank):
            resolve_n_max(RankCriterion(n_max=3), "det", 8, 3)
        assert resolve_n_max(RankCriterion(n_max=3), "gauss", 4, 2) == 3


class TestEstimateRank:
    @pytest.mark.parametrize("criterion", CRITERIA)
    @pytest.mark.parametrize("model", ["gauss", "det"])
    def test_white_spectrum(self, criterion, model):
        N, _ = estimate_rank(np.full(8, 2.5), model, criterion, 8, 64)
        assert N == 0

    def test_two_strong_interferers(self):
        lams = [100, 100, 1, 1, 1, 1]
        N, scores = estimate_rank(lams, "gauss", RankCriterion(gain=10.0), 6, 64)
        assert N == 2
        assert scores.shape == (4,)

    def test_single_dominant_det(self):
        lams = [100, 1, 1, 1, 1, 1]
        N, _ = estimate_rank(lams, "det", RankCriterion(gain=1.7, model="det"), 6, 64)
        assert N == 1

    def test_brute_force_objective(self, rng):
        M, L = 8, 40
        lams = np.sort(rng.exponential(size=M) * [50, 20, 5, 1, 1, 1, 1, 1])[::-1]
        criterion = RankCriterion(gain=2.0)
        expected = []
        for N in range(default_n_max(M, L) + 1):
            smoothed = np.concatenate([lams[:N], np.full(M - N, lams[N:].mean())])
            loglik = -L * (M + np.sum(np.log(smoothed)) + M * np.log(np.pi))
            expected.append(loglik - 2.0 * dof("gauss", N, M, L))
        N, scores = estimate_rank(lams, "gauss", criterion, M, L)
        np.testing.assert_allclose(scores, expected, rtol=1e-12)
        assert N == int(np.argmax(expected))

    @pytest.mark.parametrize("model", ["gauss", "det"])
    def test_argmax_invariant_to_scaling(self, rng, model):
        criterion = RankCriterion(gain=1.7)
        for _ in range(20):
            lams = np.sort(rng.exponential(size=6) * [30, 10, 1, 1, 1, 1])[::-1]
            N, _ = estimate_rank(lams, model, criterion, 6, 50)
            for c in (1e-3, 7.0, 1e4):
                assert estimate_rank(c * lams, model, criterion, 6, 50)[0] == N

    @pytest.mark.parametrize("model", ["gauss", "det"])
    def test_rank_deficient_spectrum(self, model):
        lams = np.array([50.0, 10.0, 1.0, 0.0, 0.0, 0.0])
        N, scores = estimate_rank(lams, model, RankCriterion(gain=0.1), 6, 64)
        assert N <= 2
        assert np.all(np.isneginf(scores[3:]))
        assert np.all(np.isfinite(scores[:3]))

    @pytest.mark.parametrize("model", ["gauss", "det"])
    def test_round_off_tail_counts_as_zero(self, model):
        lams = np.array([50.0, 10.0, 1.0, 3e-14, 1e-15, 0.0])
        N, scores = estimate_rank(lams, model, RankCriterion(gain=0.1), 6, 64)
        assert N <= 2
        assert np.all(np.isneginf(scores[3:]))

    def test_zero_tail_is_excluded(self):
        assert det_loglik(np.array([4.0, 0.0, 0.0]), 1, 10) == -np.inf
        assert gauss_loglik(np.array([4.0, 0.0, 0.0]), 1, 10) == -np.inf

    def test_all_zero(self):
        with pytest.raises(DegenerateSpectrum):
            estimate_rank(np.zeros(4), "gauss", RankCriterion(), 4, 10)

    def test_wrong_length(self):
        with pytest.raises(InvalidInput):
            estimate_rank([3.0, 2.0], "gauss", RankCriterion(), 4, 10)


class TestChooseRank:
    LAMS = np.array([100.0, 100.0, 1.0, 1.0, 1.0, 1.0])

    def test_full(self):
        assert choose_rank(EmConfig(rank_mode="full"), self.LAMS, "gauss", 6, 64) == 6
        with pytest.raises(InvalidRank):
            choose_rank(EmConfig(rank_mode="full"), self.LAMS, "det", 6, 64)

    def test_fixed(self):
        config = EmConfig(rank_mode="fixed", fixed_rank=3)
        assert choose_rank(config, self.LAMS, "gauss", 6, 64) == 3
        with pytest.raises(InvalidRank):
            choose_rank(EmConfig(rank_mode="fixed", fixed_rank=7), self.LAMS, "gauss", 6, 64)
        with pytest.raises(InvalidRank):
            choose_rank(EmConfig(rank_mode="fixed", fixed_rank=5), self.LAMS, "det", 6, 5)

    def test_estimate(self):
        assert choose_rank(EmConfig(), self.LAMS, "gauss", 6, 64) == 2

    def test_refresh(self):
        frozen = EmConfig(rank_refresh="first_iteration")
        assert choose_rank(frozen, self.LAMS, "gauss", 6, 64, previous=1) == 1
        assert choose_rank(frozen, self.LAMS, "gauss", 6, 64) == 2
        assert choose_rank(EmConfig(), self.LAMS, "gauss", 6, 64, previous=1) == 2
