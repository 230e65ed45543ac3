"""Synthetic space-time snapshots for detector experiments.

Under H1 the M x L snapshot matrix is

    Y = h s^H G_tau J_fo + B Phi^H + W

with G_tau the raised-cosine timing-error matrix, J_fo the frequency-offset
diagonal, B the array responses of N interferers placed on the largest
sidelobes of h, Phi their waveforms and W white circular Gaussian noise.
Under H0 the signal term is absent.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
import scipy.linalg
from scipy.ndimage import maximum_filter

from structglrt.errors import InsufficientSidelobes, InvalidInput
from structglrt.priors import constellation
from structglrt.schemas.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

Hypothesis = Literal["H0", "H1"]

AZ_GRID_POINTS = 181
EL_GRID_POINTS = 91

# Denominator magnitude below which the raised-cosine limit is used
_RC_SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class Scenario:
    """One synthesized frame with the quantities that produced it."""
    Y: np.ndarray
    hypothesis: Hypothesis
    s: np.ndarray
    h: np.ndarray
    B: np.ndarray
    Phi: np.ndarray
    tau_resid: float
    fo_T: float
    config: ScenarioConfig

    @property
    def s_train(self) -> np.ndarray:
        return self.s[: self.config.Q]

    def summary(self) -> dict:
        return {
            "interference_power": self.config.interference_power,
            "noise_var": self.config.noise_var,
            "Q": self.config.Q,
            "n_interferers": self.config.n_interferers,
            "tau_resid": self.tau_resid,
            "fo_T": self.fo_T,
        }


# --- Waveform building blocks ---


def rc_pulse(t_over_T, rolloff: float):
    """Raised-cosine pulse g(t) at baud-normalized times.

    Exact at the Nyquist points: g(0) = 1 and g(k) = 0 for nonzero integers k.
    """
    if not 0 <= rolloff <= 1:
        raise InvalidInput(f"rolloff must lie in [0, 1], got {rolloff}")
    t = np.asarray(t_over_T, dtype=float)
    g = np.sinc(t)
    denom = 1.0 - (2.0 * rolloff * t) ** 2
    singular = np.abs(denom) < _RC_SINGULAR_TOL
    regular = ~singular
    g = np.where(regular, g * np.cos(np.pi * rolloff * t) / np.where(regular, denom, 1.0), g)
    if np.any(singular):
        g = np.where(singular, (np.pi / 4) * np.sinc(1.0 / (2.0 * rolloff)), g)
    g = np.where((t == np.round(t)) & (t != 0), 0.0, g)
    return float(g) if g.ndim == 0 else g


def pulse_matrix(delta: float, L: int, rolloff: float) -> np.ndarray:
    """[G]_{ql} = g(l - q - delta); G_0 = I."""
    idx = np.arange(L, dtype=float)
    first_col = rc_pulse(-idx - delta, rolloff)
    first_row = rc_pulse(idx - delta, rolloff)
    return scipy.linalg.toeplitz(np.atleast_1d(first_col), np.atleast_1d(first_row))


def _freq_diagonal(omega: float, L: int) -> np.ndarray:
    return np.exp(2j * np.pi * omega * np.arange(1, L + 1))


def freq_matrix(omega: float, L: int) -> np.ndarray:
    """Diagonal with [J]_{ll} = exp(j 2 pi omega l), l = 1..L."""
    return np.diag(_freq_diagonal(omega, L))


def _distort(symbols: np.ndarray, delta: float, omega: float, rolloff: float) -> np.ndarray:
    """Row vector s^H G_delta J_omega."""
    L = symbols.shape[0]
    row = symbols.conj()
    if delta != 0.0:
        row = row @ pulse_matrix(delta, L, rolloff)
    if omega != 0.0:
        row = row * _freq_diagonal(omega, L)
    return row


# --- Array geometry ---


def _grid_side(M: int) -> int:
    K = math.isqrt(M)
    if K * K != M:
        raise InvalidInput(f"M={M} is not a perfect square")
    return K


def _direction_cosines(az, el) -> tuple[np.ndarray, np.ndarray]:
    az = np.asarray(az, dtype=float)
    el = np.asarray(el, dtype=float)
    return np.cos(el) * np.sin(az), np.sin(el)


def _steering(u, v, K: int) -> np.ndarray:
    """Rows of exp(j pi (col u + row v)), element m = row K + col."""
    rows, cols = np.divmod(np.arange(K * K), K)
    u = np.atleast_1d(u)[:, None]
    v = np.atleast_1d(v)[:, None]
    return np.exp(1j * np.pi * (cols[None, :] * u + rows[None, :] * v))


def upa_response(az: float, el: float, M: int) -> np.ndarray:
    """Half-wavelength UPA response toward (azimuth, elevation)."""
    K = _grid_side(M)
    u, v = _direction_cosines(az, el)
    return _steering(u, v, K)[0]


def _wrap(x: np.ndarray) -> np.ndarray:
    # steering phases are 2-periodic in each direction cosine
    return (x + 1.0) % 2.0 - 1.0


def interferer_responses(h, N: int) -> np.ndarray:
    """Steering vectors at the N strongest sidelobe peaks of the beampattern of h."""
    h = np.asarray(h, dtype=complex).ravel()
    M = h.shape[0]
    K = _grid_side(M)
    if N < 0:
        raise InvalidInput(f"N must be >= 0, got {N}")
    if N == 0:
        return np.zeros((M, 0), dtype=complex)

    az = np.linspace(-np.pi / 2, np.pi / 2, AZ_GRID_POINTS)
    el = np.linspace(-np.pi / 2, np.pi / 2, EL_GRID_POINTS)
    az_g, el_g = np.meshgrid(az, el, indexing="ij")
    u, v = _direction_cosines(az_g.ravel(), el_g.ravel())
    steer = _steering(u, v, K)
    pattern = (np.abs(steer.conj() @ h) ** 2).reshape(az_g.shape)

    peaks = pattern == maximum_filter(pattern, size=3, mode="nearest")

    # mainlobe: direction cosines of h, read off its first row and column phases
    u0 = float(np.angle(h[1] / h[0]) / np.pi) if K > 1 else 0.0
    v0 = float(np.angle(h[K] / h[0]) / np.pi) if K > 1 else 0.0
    radius = 2.0 / K
    in_mainlobe = (np.abs(_wrap(u.reshape(az_g.shape) - u0)) < radius) & (
        np.abs(_wrap(v.reshape(az_g.shape) - v0)) < radius
    )
    candidates = np.flatnonzero((peaks & ~in_mainlobe).ravel())
    order = candidates[np.argsort(-pattern.ravel()[candidates], kind="stable")]

    chosen: list[int] = []
    seen: set[tuple[float, float]] = set()
    for idx in order:
        key = (round(float(_wrap(u[idx])), 9), round(float(_wrap(v[idx])), 9))
        if key in seen:
            continue
        seen.add(key)
        chosen.append(int(idx))
        if len(chosen) == N:
            break
    if len(chosen) < N:
        raise InsufficientSidelobes(f"found {len(chosen)} sidelobe peaks, need {N}")
    return steer[chosen].T.copy()


# --- Interference waveforms ---


def _circular_gaussian(rng: np.random.Generator, shape, variance: float) -> np.ndarray:
    scale = math.sqrt(variance / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def gen_interference(
    kind: str,
    N: int,
    L: int,
    sigma_i2: float,
    rng: np.random.Generator,
    rolloff: float = 0.35,
    fo_T_range: tuple[float, float] = (-1e-4, 1e-4),
) -> np.ndarray:
    """L x N interference waveforms with per-entry power sigma_i2 / N."""
    if sigma_i2 < 0:
        raise InvalidInput(f"interference power must be >= 0, got {sigma_i2}")
    if N == 0 or sigma_i2 == 0:
        return np.zeros((L, N), dtype=complex)
    amplitude = math.sqrt(sigma_i2 / N)
    times = np.arange(1, L + 1)

    if kind == "gauss":
        return _circular_gaussian(rng, (L, N), sigma_i2 / N)
    elif kind == "qpsk_unsync":
        alphabet = constellation("qpsk")
        Phi = np.empty((L, N), dtype=complex)
        for n in range(N):
            symbols = alphabet[rng.integers(0, alphabet.size, size=L)]
            theta = rng.uniform(0, 2 * np.pi)
            tau = rng.uniform(-0.5, 0.5)
            fo = rng.uniform(*fo_T_range)
            row = np.exp(1j * theta) * _distort(symbols, tau, fo, rolloff)
            Phi[:, n] = amplitude * row.conj()
        return Phi
    elif kind == "sinusoid":
        theta = rng.uniform(0, 2 * np.pi, size=N)
        omega = rng.uniform(-np.pi, np.pi, size=N)
        return amplitude * np.exp(1j * (np.outer(times, omega) + theta[None, :]))
    elif kind == "spike":
        theta = rng.uniform(0, 2 * np.pi, size=N)
        tau = rng.uniform(0, L, size=N)
        pulses = rc_pulse(times[:, None] - tau[None, :], rolloff)
        return math.sqrt(sigma_i2 * L / N) * np.exp(1j * theta)[None, :] * pulses
    else:
        raise InvalidInput(f"Unknown interference kind: {kind}")


# --- Frame synthesis ---


def trial_streams(seed: int, trial_index: int) -> tuple[np.random.Generator, ...]:
    """Independent (geometry, signal, interference, noise) generators for one trial."""
    root = np.random.SeedSequence(seed, spawn_key=(trial_index,))
    return tuple(np.random.default_rng(child) for child in root.spawn(4))


def synthesize(
    config: ScenarioConfig,
    trial_index: int,
    hypothesis: Hypothesis = "H1",
) -> Scenario:
    """One frame, deterministic in (config.seed, trial_index).

    H0 and H1 frames at the same trial index share every random draw; the
    H0 frame still carries s so the training block is available.
    """
    if hypothesis not in ("H0", "H1"):
        raise InvalidInput(f"hypothesis must be H0 or H1, got {hypothesis!r}")
    geometry, signal, interference, noise = trial_streams(config.seed, trial_index)
    M, L, N = config.M, config.L, config.n_interferers

    az, el = geometry.uniform(0, 2 * np.pi, size=2)
    h = upa_response(az, el, M)
    B = interferer_responses(h, N)

    alphabet = constellation(config.alphabet)
    s = alphabet[signal.integers(0, alphabet.size, size=L)]
    if config.tau_fixed is None:
        tau_resid = float(signal.uniform(*config.tau_range))
    else:
        tau_resid = float(config.tau_fixed)
    fo_T = float(signal.uniform(config.fo_T_min, config.fo_T_max))

    Phi = gen_interference(
        config.interference_kind,
        N,
        L,
        config.interference_power,
        interference,
        rolloff=config.rolloff,
        fo_T_range=(config.fo_T_min, config.fo_T_max),
    )
    W = _circular_gaussian(noise, (M, L), config.noise_var)

    Y = B @ Phi.conj().T + W
    if hypothesis == "H1":
        Y = Y + np.outer(h, _distort(s, tau_resid, fo_T, config.rolloff))
    return Scenario(
        Y=Y,
        hypothesis=hypothesis,
        s=s,
        h=h,
        B=B,
        Phi=Phi,
        tau_resid=tau_resid,
        fo_T=fo_T,
        config=config,
    )
