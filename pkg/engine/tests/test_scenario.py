import numpy as np
import pytest
from pydantic import ValidationError

from structglrt.errors import InsufficientSidelobes, InvalidInput
from structglrt.priors import training_data_prior
from structglrt.scenario import (
    freq_matrix,
    gen_interference,
    interferer_responses,
    pulse_matrix,
    rc_pulse,
    synthesize,
    trial_streams,
    upa_response,
)
from structglrt.schemas.scenario import ScenarioConfig


def clean_config(**overrides):
    base = dict(
        M=4, L=8, Q=2, n_interferers=0, noise_var=0.0, interference_power=0.0,
        tau_fixed=0.0, fo_T_min=0.0, fo_T_max=0.0, seed=3,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


class TestRcPulse:
    def test_peak(self):
        assert rc_pulse(0.0, 0.35) == 1.0

    @pytest.mark.parametrize("k", [-3, -1, 1, 2, 7])
    def test_nyquist_zeros(self, k):
        assert rc_pulse(float(k), 0.35) == 0.0

    @pytest.mark.parametrize("rolloff", [0.25, 0.35, 0.5, 1.0])
    def test_removable_singularity(self, rolloff):
        t = 1 / (2 * rolloff)
        value = rc_pulse(t, rolloff)
        nearby = 0.5 * (rc_pulse(t - 1e-6, rolloff) + rc_pulse(t + 1e-6, rolloff))
        assert np.isfinite(value)
        assert value == pytest.approx(nearby, rel=1e-5, abs=1e-9)

    def test_even(self):
        t = np.linspace(-4, 4, 81)
        np.testing.assert_allclose(rc_pulse(t, 0.35), rc_pulse(-t, 0.35), atol=1e-15)

    def test_zero_rolloff_is_sinc(self):
        t = np.array([0.3, 1.7, -2.2])
        np.testing.assert_allclose(rc_pulse(t, 0.0), np.sinc(t))

    def test_rolloff_range(self):
        with pytest.raises(InvalidInput):
            rc_pulse(0.5, 1.5)


class TestPulseAndFrequencyMatrices:
    def test_zero_delay_is_identity(self):
        np.testing.assert_array_equal(pulse_matrix(0.0, 6, 0.35), np.eye(6))

    def test_unit_delay_is_shift(self):
        np.testing.assert_array_equal(pulse_matrix(1.0, 5, 0.35), np.eye(5, k=1))

    def test_fractional_delay_matches_elementwise(self):
        G = pulse_matrix(0.25, 7, 0.35)
        for q in range(7):
            for l in range(7):
                assert G[q, l] == pytest.approx(rc_pulse(l - q - 0.25, 0.35), abs=1e-15)
        assert np.all(np.abs(G.sum(axis=1)) < 2.0)

    def test_frequency_identity(self):
        np.testing.assert_array_equal(freq_matrix(0.0, 5), np.eye(5))

    def test_half_cycle_alternates(self):
        np.testing.assert_allclose(np.diag(freq_matrix(0.5, 4)), [-1, 1, -1, 1], atol=1e-12)

    def test_unit_modulus(self):
        J = freq_matrix(0.123, 9)
        assert abs(np.linalg.det(J)) == pytest.approx(1.0)


class TestUpaResponse:
    def test_broadside(self):
        np.testing.assert_allclose(upa_response(0.0, 0.0, 16), np.ones(16))

    def test_row_major_ordering(self):
        np.testing.assert_allclose(upa_response(np.pi / 2, 0.0, 4), [1, -1, 1, -1], atol=1e-12)

    def test_unit_modulus(self, rng):
        for az, el in rng.uniform(0, 2 * np.pi, size=(10, 2)):
            h = upa_response(az, el, 64)
            np.testing.assert_allclose(np.abs(h), 1.0)
            assert np.vdot(h, h).real == pytest.approx(64)

    def test_non_square(self):
        with pytest.raises(InvalidInput):
            upa_response(0.1, 0.2, 6)


class TestInterfererResponses:
    def test_sidelobe_steering_vectors(self, rng):
        az, el = rng.uniform(0, 2 * np.pi, size=2)
        h = upa_response(az, el, 16)
        B = interferer_responses(h, 3)
        assert B.shape == (16, 3)
        np.testing.assert_allclose(np.abs(B), 1.0)
        gains = np.abs(B.conj().T @ h) / 16
        assert np.all(gains < 1 - 1e-6)
        assert np.all(np.diff(gains) <= 1e-12)

    def test_single_sidelobe_is_strongest(self, rng):
        h = upa_response(0.3, 0.2, 16)
        b1 = interferer_responses(h, 1)[:, 0]
        b3 = interferer_responses(h, 3)
        np.testing.assert_allclose(b1, b3[:, 0])

    def test_no_interferers(self):
        assert interferer_responses(upa_response(0.1, 0.1, 9), 0).shape == (9, 0)

    def test_no_sidelobes_on_single_element(self):
        with pytest.raises(InsufficientSidelobes):
            interferer_responses(np.ones(1), 1)


class TestGenInterference:
    def test_zero_power(self, rng):
        Phi = gen_interference("gauss", 3, 10, 0.0, rng)
        np.testing.assert_array_equal(Phi, np.zeros((10, 3)))

    def test_sinusoid_envelope(self, rng):
        Phi = gen_interference("sinusoid", 4, 50, 8.0, rng)
        np.testing.assert_allclose(np.abs(Phi), np.sqrt(2.0))

    def test_gaussian_power(self, rng):
        Phi = gen_interference("gauss", 2, 4096, 6.0, rng)
        assert np.mean(np.abs(Phi) ** 2) == pytest.approx(3.0, rel=0.05)

    @pytest.mark.parametrize("kind", ["qpsk_unsync", "spike"])
    def test_shapes(self, rng, kind):
        Phi = gen_interference(kind, 3, 64, 5.0, rng)
        assert Phi.shape == (64, 3)
        assert np.all(np.isfinite(Phi))
        assert np.all(np.linalg.norm(Phi, axis=0) > 0)

    def test_unknown_kind(self, rng):
        with pytest.raises(InvalidInput):
            gen_interference("chirp", 1, 8, 1.0, rng)


class TestSynthesize:
    def test_noiseless_signal_only(self):
        sc = synthesize(clean_config(), 0)
        np.testing.assert_allclose(sc.Y, np.outer(sc.h, sc.s.conj()), atol=1e-14)

    def test_null_hypothesis_has_no_signal(self):
        config = clean_config(M=16, noise_var=1.0, n_interferers=1, interference_power=4.0)
        h1 = synthesize(config, 5, "H1")
        h0 = synthesize(config, 5, "H0")
        np.testing.assert_array_equal(h0.s, h1.s)
        np.testing.assert_allclose(h1.Y - h0.Y, np.outer(h1.h, h1.s.conj()), atol=1e-12)

    def test_deterministic(self):
        config = ScenarioConfig(M=16, L=32, Q=4, n_interferers=2, noise_var=1.0, seed=11)
        a = synthesize(config, 7)
        b = synthesize(config, 7)
        np.testing.assert_array_equal(a.Y, b.Y)
        assert a.tau_resid == b.tau_resid
        assert not np.array_equal(a.Y, synthesize(config, 8).Y)

    def test_draws_respect_ranges(self):
        config = ScenarioConfig(M=16, L=32, Q=4, n_interferers=2, oversample=4)
        for trial in range(20):
            sc = synthesize(config, trial)
            assert -1 / 8 <= sc.tau_resid < 1 / 8
            assert -1e-4 <= sc.fo_T <= 1e-4
            assert sc.B.shape == (16, 2)
            assert sc.Phi.shape == (32, 2)

    def test_training_block_matches_prior(self):
        sc = synthesize(ScenarioConfig(M=16, L=40, Q=6, n_interferers=1), 2)
        prior = training_data_prior(sc.s_train, [1, -1], 40)
        assert prior.known_prefix() == 6
        np.testing.assert_array_equal(sc.s_train, sc.s[:6])

    def test_unit_signal_power(self):
        sc = synthesize(clean_config(L=10000, alphabet="16qam"), 0)
        assert np.mean(np.abs(sc.s) ** 2) == pytest.approx(1.0, rel=0.02)

    def test_summary(self):
        sc = synthesize(clean_config(), 1)
        assert sc.summary()["Q"] == 2
        assert sc.summary()["tau_resid"] == 0.0

    def test_bad_hypothesis(self):
        with pytest.raises(InvalidInput):
            synthesize(clean_config(), 0, "H2")

    def test_streams_are_order_independent(self):
        a = [g.standard_normal() for g in trial_streams(1, 4)]
        trial_streams(1, 3)
        b = [g.standard_normal() for g in trial_streams(1, 4)]
        assert a == b
        assert len(set(a)) == 4


class TestScenarioConfig:
    def test_defaults(self):
        config = ScenarioConfig()
        assert (config.M, config.L, config.Q, config.n_interferers) == (64, 1024, 32, 5)
        assert config.tau_range == (-0.25, 0.25)

    @pytest.mark.parametrize(
        "overrides",
        [
            {"M": 5},
            {"Q": 40, "L": 32},
            {"n_interferers": 4, "M": 4},
            {"alphabet": "64qam"},
            {"fo_T_min": 1e-3, "fo_T_max": 0.0},
            {"rolloff": 1.5},
            {"colour": "red"},
        ],
    )
    def test_invalid(self, overrides):
        with pytest.raises(ValidationError):
            ScenarioConfig(**overrides)
