"""EM-based GLRT under temporally white Gaussian interference.

The numerator of the GLRT maximizes the likelihood over the channel h, the
interference covariance Sigma (rank-N plus white) and the random symbols s,
which EM treats as hidden data. Each iteration:

  1. M-step: h = Y s_hat / E and Sigma from the eigenvalues of
     (1/L) Y Y^H - (E/L) h h^H, smoothed at rank N.
  2. Whitened matched filter g = Sigma^{-1} h, precision xi = h^H g, and the
     per-symbol statistics r = Y^H g / xi.
  3. E-step: symbol posteriors given r at precision xi (soft), or nearest
     alphabet points (hard, the Forsythe iteration).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from structglrt.detectors import DetectorReport
from structglrt.detectors.init import InitProduct, start_point
from structglrt.errors import (
    DegenerateNoise,
    InvalidInput,
    NonPositivePrecision,
    SingularCovariance,
)
from structglrt.priors import SignalPrior, hard_decisions, log_evidence, signal_posterior
from structglrt.rank import choose_rank
from structglrt.schemas.detector import EmConfig
from structglrt.spectral import (
    PSD_EPS,
    EigenSystem,
    diag_minus_rank_one_eig,
    hermitian_eig,
    psd_floor,
    sample_eigenvalues,
    smooth_eigenvalues,
)

logger = logging.getLogger(__name__)

# Interference-plus-noise power below this fraction of the data power is treated as zero
NOISE_EPS = 1e-10
NU_FLOOR = 1e-12


@dataclass(frozen=True)
class EmGaussState:
    s_hat: np.ndarray
    E: float
    h_hat: Optional[np.ndarray] = None
    eig1: Optional[EigenSystem] = None
    smoothed1: Optional[np.ndarray] = None
    nu1: float = math.nan
    xi: float = math.nan
    N_hat: int = 0
    iter: int = 0
    g: Optional[np.ndarray] = None
    r: Optional[np.ndarray] = None
    loglik: float = math.nan
    evidence: float = math.nan

    @classmethod
    def start(cls, s0, E0: float) -> "EmGaussState":
        s0 = np.asarray(s0, dtype=complex)
        if not E0 > 0 or E0 < float(np.vdot(s0, s0).real) - 1e-9:
            raise InvalidInput(f"E0={E0} must be > 0 and >= ||s0||^2")
        return cls(s_hat=s0, E=float(E0))


@dataclass
class EmTrace:
    """Per-iteration diagnostics of one EM run."""
    loglik: list[float] = field(default_factory=list)
    evidence: list[float] = field(default_factory=list)
    rel_change: list[float] = field(default_factory=list)
    converged: bool = False


class _InverseCovariance:
    """Sigma^{-1} for the three rank regimes, from the eigensystem of Sigma_1."""

    def __init__(self, eig1: EigenSystem, N: int, power0: float):
        lams = eig1.values
        M = lams.shape[0]
        trace = float(np.sum(lams))
        if trace / M <= NOISE_EPS * power0:
            raise DegenerateNoise("interference-plus-noise power vanished")
        self.N = N
        if N == M:
            if lams[-1] <= PSD_EPS * lams[0]:
                raise SingularCovariance("full-rank covariance is singular")
            self.nu = float(lams[-1])
            self.smoothed = lams
            self.basis = eig1.vectors
            self.weights = 1.0 / lams
        else:
            smoothed, nu = smooth_eigenvalues(lams, N)
            nu = max(nu, NU_FLOOR * trace / M)
            smoothed[N:] = nu
            self.nu = nu
            self.smoothed = smoothed
            self.basis = eig1.vectors[:, :N]
            self.weights = 1.0 / smoothed[:N] - 1.0 / nu

    def apply(self, x: np.ndarray) -> np.ndarray:
        coeff = self.basis.conj().T @ x
        coeff = coeff * (self.weights[:, None] if x.ndim == 2 else self.weights)
        mapped = self.basis @ coeff
        if self.N == self.smoothed.shape[0]:
            return mapped
        return x / self.nu + mapped

    def logdet(self) -> float:
        return float(np.sum(np.log(self.smoothed)))


def fast_sigma1_eig(eig0: EigenSystem, h_hat, E: float, L: int) -> EigenSystem:
    """Eigensystem of (1/L) Y Y^H - (E/L) h h^H from that of (1/L) Y Y^H.

    h lies in the range of Y, so only the R nonzero eigenpairs move; they are
    updated by one diagonal-minus-rank-one solve.
    """
    if not E > 0:
        raise InvalidInput(f"E must be > 0, got {E}")
    values = eig0.values
    V = eig0.vectors
    R = int(np.count_nonzero(values > PSD_EPS * values[0])) if values[0] > 0 else 0
    h_rot = math.sqrt(E / L) * (V[:, :R].conj().T @ np.asarray(h_hat, dtype=complex))
    update = diag_minus_rank_one_eig(values[:R], h_rot)
    vectors = np.concatenate([V[:, :R] @ update.vectors, V[:, R:]], axis=1)
    new_values = np.concatenate([update.values, np.zeros(values.shape[0] - R)])
    return EigenSystem(values=psd_floor(new_values), vectors=vectors)


def em_gauss_step(
    state: EmGaussState,
    Y,
    prior: SignalPrior,
    config: EmConfig,
    eig0: Optional[EigenSystem] = None,
) -> EmGaussState:
    Y = np.asarray(Y, dtype=complex)
    M, L = Y.shape
    if len(prior) != L:
        raise InvalidInput(f"prior has {len(prior)} symbols, Y has {L} snapshots")
    s_hat, E = state.s_hat, state.E
    if not E > 0:
        raise InvalidInput(f"E must be > 0, got {E}")

    h_hat = Y @ s_hat / E
    if config.fast_eig:
        if eig0 is None:
            eig0 = hermitian_eig(Y @ Y.conj().T / L)
        eig1 = fast_sigma1_eig(eig0, h_hat, E, L)
    else:
        sigma1 = Y @ Y.conj().T / L - (E / L) * np.outer(h_hat, h_hat.conj())
        eig1 = hermitian_eig(sigma1)

    previous = state.N_hat if state.iter > 0 else None
    N = choose_rank(config, eig1.values, "gauss", M, L, previous)
    power0 = float(np.vdot(Y, Y).real) / (M * L)
    inverse = _InverseCovariance(eig1, N, power0)

    g = inverse.apply(h_hat)
    xi = float(np.vdot(h_hat, g).real)
    if not (np.isfinite(xi) and xi > 0):
        raise NonPositivePrecision(f"whitened matched-filter precision {xi} is not positive")
    r = (Y.conj().T @ g) / xi

    logdet = inverse.logdet()
    loglik = -L * (M + logdet + M * math.log(math.pi))
    whitened_energy = float(np.vdot(Y, inverse.apply(Y)).real)
    evidence = (
        -whitened_energy
        + xi * float(np.vdot(r, r).real)
        + log_evidence(prior, r, xi)
        - L * logdet
        - M * L * math.log(math.pi)
    )

    if config.decision_mode == "hard":
        s_new = hard_decisions(prior, r, xi)
        E_new = float(np.vdot(s_new, s_new).real)
    else:
        s_new, E_new = signal_posterior(prior, r, xi)

    return EmGaussState(
        s_hat=s_new,
        E=E_new,
        h_hat=h_hat,
        eig1=eig1,
        smoothed1=inverse.smoothed,
        nu1=inverse.nu,
        xi=xi,
        N_hat=N,
        iter=state.iter + 1,
        g=g,
        r=r,
        loglik=loglik,
        evidence=evidence,
    )


def relative_change(new: np.ndarray, old: np.ndarray) -> float:
    norm = float(np.linalg.norm(new))
    if norm == 0.0:
        return 0.0
    return float(np.linalg.norm(new - old)) / norm


def em_gauss_run(
    Y,
    prior: SignalPrior,
    config: EmConfig,
    init: Optional[InitProduct] = None,
) -> tuple[EmGaussState, EmTrace]:
    """Iterate until max_iters or the relative change of s_hat drops below rel_tol.

    The check is skipped at the first iteration, whose predecessor is the
    initializer rather than an EM iterate.

    ``trace.evidence`` is nondecreasing across iterations; ``trace.loglik``
    (the plug-in numerator) is not and can dip slightly.
    """
    Y = np.asarray(Y, dtype=complex)
    state = EmGaussState.start(*start_point(prior, init))
    eig0 = hermitian_eig(Y @ Y.conj().T / Y.shape[1]) if config.fast_eig else None
    trace = EmTrace()

    for i in range(1, config.max_iters + 1):
        new = em_gauss_step(state, Y, prior, config, eig0=eig0)
        change = relative_change(new.s_hat, state.s_hat)
        trace.loglik.append(new.loglik)
        trace.evidence.append(new.evidence)
        trace.rel_change.append(change)
        logger.debug(
            "em-gauss iter=%d N=%d xi=%.4g change=%.3g loglik=%.6g",
            i, new.N_hat, new.xi, change, new.loglik,
        )
        state = new
        if i > 1 and change < config.rel_tol:
            trace.converged = True
            break
    return state, trace


def glrt_gauss(
    Y,
    prior: SignalPrior,
    config: EmConfig,
    init: Optional[InitProduct] = None,
) -> DetectorReport:
    """Log-GLRT sum_m ln(lam0_m / lam1_m) over spectra smoothed at the final N."""
    Y = np.asarray(Y, dtype=complex)
    M = Y.shape[0]
    state, trace = em_gauss_run(Y, prior, config, init)
    lams0 = sample_eigenvalues(Y)
    N = state.N_hat
    smoothed0 = lams0 if N == M else smooth_eigenvalues(lams0, N)[0]
    stat = float(np.sum(np.log(smoothed0 / state.smoothed1)))
    return DetectorReport(
        log_statistic=stat,
        n_hat=N,
        iterations=state.iter,
        lams0=lams0,
        lams1=state.eig1.values,
        converged=trace.converged,
        trace=trace.loglik,
    )
