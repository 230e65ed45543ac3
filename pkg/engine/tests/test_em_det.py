import math

import numpy as np
import pytest

from conftest import cgauss, low_rank_frame
from structglrt.detectors.closedform import mcwhorter_statistic
from structglrt.detectors.em_det import (
    EmDetState,
    em_det_run,
    em_det_step,
    glrt_det,
    nu0_det,
    soft_projected,
)
from structglrt.errors import InvalidRank, NonPositivePrecision
from structglrt.priors import PointMass, SignalPrior, constellation, training_data_prior
from structglrt.schemas.detector import EmConfig


def known_prior(s):
    return SignalPrior(tuple(PointMass(complex(v)) for v in s))


def qpsk_prior(s, Q):
    return training_data_prior(s[:Q], constellation("qpsk"), s.shape[0])


def oracle_step(s_hat, E, Y, N):
    """Line-by-line deterministic-interference update, before the symbol posterior."""
    M, L = Y.shape
    energy = np.vdot(s_hat, s_hat).real
    zeta = math.sqrt(1 - energy / E)
    g = Y @ s_hat / energy
    Ybar = Y + (zeta - 1) * np.outer(g, s_hat.conj())
    V, D, Uh = np.linalg.svd(Ybar, full_matrices=False)
    V, D, U = V[:, :N], D[:N], Uh[:N].conj().T
    nu1 = (np.linalg.norm(Ybar) ** 2 - np.sum(D**2)) / (M * L)
    h = (energy * g - (V * D) @ (U.conj().T @ s_hat) / zeta) / E
    h_energy = np.vdot(h, h).real
    xi = h_energy / nu1
    r = (Ybar.conj().T @ h - (U * D) @ (V.conj().T @ h)) / h_energy + s_hat / (1 + zeta)
    return zeta, nu1, h, xi, r


class TestSoftProjected:
    def test_signal_direction_is_scaled(self, rng):
        Y = cgauss(rng, 4, 16)
        s = cgauss(rng, 16)
        E = 2.5 * np.vdot(s, s).real
        Ybar, zeta = soft_projected(Y, s, E)
        assert zeta == pytest.approx(math.sqrt(1 - 1 / 2.5))
        np.testing.assert_allclose(Ybar @ s, zeta * (Y @ s), atol=1e-10)

    def test_square_root_of_soft_projection(self, rng):
        s = cgauss(rng, 8)
        energy = np.vdot(s, s).real
        E = 1.7 * energy
        zeta = math.sqrt(1 - energy / E)
        Ps = np.outer(s, s.conj()) / energy
        root = np.eye(8) + (zeta - 1) * Ps
        np.testing.assert_allclose(root @ root, np.eye(8) - np.outer(s, s.conj()) / E, atol=1e-10)
        Ybar, _ = soft_projected(np.eye(8), s, E)
        np.testing.assert_allclose(Ybar, root, atol=1e-12)

    def test_zero_estimate_leaves_data(self, rng):
        Y = cgauss(rng, 3, 6)
        Ybar, zeta = soft_projected(Y, np.zeros(6, dtype=complex), 6.0)
        assert zeta == 1.0
        np.testing.assert_array_equal(Ybar, Y)


class TestEmDetStep:
    def test_matches_dense_oracle(self, rng):
        Y, s = low_rank_frame(rng, 4, 16, 2)
        prior = qpsk_prior(s, 4)
        state = EmDetState.start(prior.means, prior.second_moments.sum())
        config = EmConfig(rank_mode="fixed", fixed_rank=2)
        for _ in range(3):
            zeta, nu1, h, xi, r = oracle_step(state.s_hat, state.E, Y, 2)
            state = em_det_step(state, Y, prior, config)
            assert state.zeta == pytest.approx(zeta, rel=1e-10)
            assert state.nu1 == pytest.approx(nu1, rel=1e-10)
            np.testing.assert_allclose(state.h_hat, h, rtol=1e-8)
            assert state.xi == pytest.approx(xi, rel=1e-8)
            np.testing.assert_allclose(state.r, r, rtol=1e-8, atol=1e-12)
            assert state.N_hat == 2

    def test_rank_zero_skips_deflation(self, rng):
        Y, s = low_rank_frame(rng, 4, 16, 1)
        prior = qpsk_prior(s, 4)
        state = EmDetState.start(prior.means, prior.second_moments.sum())
        new = em_det_step(state, Y, prior, EmConfig(rank_mode="fixed", fixed_rank=0))
        Ybar, _ = soft_projected(Y, state.s_hat, state.E)
        assert new.N_hat == 0 and new.svd1.rank == 0
        assert new.nu1 == pytest.approx(np.linalg.norm(Ybar) ** 2 / (4 * 16), rel=1e-10)
        np.testing.assert_allclose(new.h_hat, Y @ state.s_hat / state.E, rtol=1e-10)

    def test_zero_estimate(self, rng):
        Y, s = low_rank_frame(rng, 4, 16, 1)
        state = EmDetState.start(np.zeros(16, dtype=complex), 16.0)
        with pytest.raises(NonPositivePrecision):
            em_det_step(state, Y, qpsk_prior(s, 0), EmConfig(rank_mode="fixed", fixed_rank=1))

    def test_large_uncertainty_limit(self, rng):
        Y, s = low_rank_frame(rng, 4, 16, 1)
        s_hat = 1e-4 * s
        state = EmDetState.start(s_hat, 16.0)
        new = em_det_step(state, Y, qpsk_prior(s, 0), EmConfig(rank_mode="fixed", fixed_rank=1))
        assert new.zeta == pytest.approx(1.0, abs=1e-8)
        Ybar, _ = soft_projected(Y, s_hat, 16.0)
        np.testing.assert_allclose(Ybar, Y, atol=1e-6)
        V, U, D = new.svd1.left, new.svd1.right, new.svd1.singulars
        h = new.h_hat
        fitted = (Ybar.conj().T @ h - (U * D) @ (V.conj().T @ h)) / np.vdot(h, h).real
        np.testing.assert_allclose(new.r - fitted, s_hat / 2, atol=1e-9)

    def test_noise_power_never_exceeds_null_estimate(self, rng):
        config = EmConfig(rank_mode="fixed", fixed_rank=2)
        for _ in range(30):
            Y, s = low_rank_frame(rng, 5, 20, 2, nu=2.0, signal=bool(rng.integers(0, 2)))
            prior = qpsk_prior(s, 3)
            nu0 = nu0_det(Y, 2)
            state = EmDetState.start(prior.means, prior.second_moments.sum())
            for _ in range(5):
                state = em_det_step(state, Y, prior, config)
                assert nu0 - state.nu1 >= -1e-9 * nu0


class TestNu0Det:
    def test_identity(self):
        assert nu0_det(np.eye(2), 1) == pytest.approx(0.25)

    def test_rank_zero(self, rng):
        Y = cgauss(rng, 3, 7)
        assert nu0_det(Y, 0) == pytest.approx(np.linalg.norm(Y) ** 2 / 21)

    def test_matches_dense(self, rng):
        Y = cgauss(rng, 6, 10)
        lam = np.sort(np.linalg.eigvalsh(Y @ Y.conj().T / 10))[::-1]
        assert nu0_det(Y, 2) == pytest.approx(lam[2:].sum() / 6)

    @pytest.mark.parametrize("N", [-1, 3, 5])
    def test_rank_limit(self, rng, N):
        with pytest.raises(InvalidRank):
            nu0_det(cgauss(rng, 3, 8), N)


class TestGlrtDet:
    def test_known_signal_falls_back_to_mcwhorter(self, rng):
        for _ in range(100):
            Y, s = low_rank_frame(rng, 4, 16, 1)
            N = int(rng.integers(0, 3))
            report = glrt_det(Y, known_prior(s), EmConfig(rank_mode="fixed", fixed_rank=N))
            expected = mcwhorter_statistic(Y, s, N).log_statistic
            assert report.fallback == "mcwhorter"
            assert report.log_statistic == pytest.approx(expected, rel=1e-6, abs=1e-6)

    def test_known_signal_with_estimated_rank(self, rng):
        Y, s = low_rank_frame(rng, 6, 32, 2, power=50.0)
        report = glrt_det(Y, known_prior(s), EmConfig(criterion={"gain": 1.7, "model": "det"}))
        assert report.fallback == "mcwhorter"
        expected = mcwhorter_statistic(Y, s, report.n_hat).log_statistic
        assert report.log_statistic == pytest.approx(expected)

    def test_pure_noise_is_nonnegative(self, rng):
        config = EmConfig(rank_mode="fixed", fixed_rank=1)
        for _ in range(20):
            Y, s = low_rank_frame(rng, 4, 24, 1, signal=False)
            report = glrt_det(Y, qpsk_prior(s, 4), config)
            assert report.log_statistic >= -1e-9
            assert report.fallback is None

    def test_statistic_form(self, rng):
        Y, s = low_rank_frame(rng, 4, 24, 1, nu=2.0)
        config = EmConfig(rank_mode="fixed", fixed_rank=1)
        prior = qpsk_prior(s, 4)
        state, _ = em_det_run(Y, prior, config)
        report = glrt_det(Y, prior, config)
        assert report.log_statistic == pytest.approx(96 * math.log(nu0_det(Y, 1) / state.nu1))

    def test_hard_mode_runs_with_known_symbols(self, rng):
        Y, s = low_rank_frame(rng, 4, 16, 1)
        config = EmConfig(decision_mode="hard", rank_mode="fixed", fixed_rank=1)
        report = glrt_det(Y, known_prior(s), config)
        assert report.fallback is None
        expected = mcwhorter_statistic(Y, s, 1).log_statistic
        assert report.log_statistic == pytest.approx(expected, rel=1e-8)
