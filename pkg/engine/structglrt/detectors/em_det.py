"""EM-based GLRT under deterministic low-rank interference.

The interference B Phi^H is an unknown rank-N matrix and the noise is white
with power nu. Given the symbol posterior (s_hat, E), the expected cost is a
least-squares fit of the "soft-projected" data

    Ybar = Y + (zeta - 1) g s_hat^H,   zeta = sqrt(1 - ||s_hat||^2 / E),

whose top-N SVD carries the interference estimate. The statistic is
ML ln(nu0 / nu1), nu0 being the trailing eigenvalue mean of (1/L) Y Y^H.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from structglrt.detectors import DetectorReport
from structglrt.detectors.closedform import mcwhorter_statistic, sample_spectra
from structglrt.detectors.em_gauss import EmTrace, relative_change
from structglrt.detectors.init import InitProduct, start_point
from structglrt.errors import (
    DegenerateNoise,
    DegenerateZeta,
    InvalidInput,
    InvalidRank,
    NonPositivePrecision,
)
from structglrt.priors import SignalPrior, hard_decisions, signal_posterior
from structglrt.rank import choose_rank
from structglrt.schemas.detector import EmConfig
from structglrt.spectral import TruncatedSvd, principal_svd, psd_floor, sample_eigenvalues

logger = logging.getLogger(__name__)

ZETA_EPS = 1e-10
NOISE_EPS = 1e-10


@dataclass(frozen=True)
class EmDetState:
    s_hat: np.ndarray
    E: float
    zeta: float = 1.0
    h_hat: Optional[np.ndarray] = None
    svd1: Optional[TruncatedSvd] = None
    nu1: float = math.nan
    xi: float = math.nan
    N_hat: int = 0
    iter: int = 0
    r: Optional[np.ndarray] = None
    loglik: float = math.nan
    collapsed: bool = False

    @classmethod
    def start(cls, s0, E0: float) -> "EmDetState":
        s0 = np.asarray(s0, dtype=complex)
        energy = float(np.vdot(s0, s0).real)
        if not E0 > 0 or E0 < energy - 1e-9:
            raise InvalidInput(f"E0={E0} must be > 0 and >= ||s0||^2")
        return cls(s_hat=s0, E=float(E0), zeta=_zeta(energy, E0))


def _zeta(energy: float, E: float) -> float:
    return math.sqrt(max(0.0, 1.0 - energy / E))


def soft_projected(Y: np.ndarray, s_hat: np.ndarray, E: float) -> tuple[np.ndarray, float]:
    """Ybar = Y (P~perp)^{1/2} with (P~perp)^{1/2} = I + (zeta - 1) P_s, and zeta."""
    energy = float(np.vdot(s_hat, s_hat).real)
    zeta = _zeta(energy, E)
    if energy == 0.0:
        return Y.copy(), zeta
    g = Y @ s_hat / energy
    return Y + (zeta - 1.0) * np.outer(g, s_hat.conj()), zeta


def _empty_svd(M: int, L: int) -> TruncatedSvd:
    return TruncatedSvd(
        left=np.zeros((M, 0), dtype=complex),
        singulars=np.zeros(0),
        right=np.zeros((L, 0), dtype=complex),
    )


def em_det_step(state: EmDetState, Y, prior: SignalPrior, config: EmConfig) -> EmDetState:
    Y = np.asarray(Y, dtype=complex)
    M, L = Y.shape
    if len(prior) != L:
        raise InvalidInput(f"prior has {len(prior)} symbols, Y has {L} snapshots")
    s_hat, E = state.s_hat, state.E
    energy = float(np.vdot(s_hat, s_hat).real)
    if config.decision_mode == "soft" and E - energy < ZETA_EPS * E:
        raise DegenerateZeta("symbol posterior is deterministic (E == ||s_hat||^2)")

    Ybar, zeta = soft_projected(Y, s_hat, E)
    singulars = scipy.linalg.svdvals(Ybar)
    lams1 = np.zeros(M)
    lams1[: singulars.shape[0]] = singulars[:M] ** 2 / L
    lams1 = psd_floor(lams1)

    previous = state.N_hat if state.iter > 0 else None
    N = choose_rank(config, lams1, "det", M, L, previous)
    svd1 = principal_svd(Ybar, N) if N > 0 else _empty_svd(M, L)

    nu1 = (float(np.vdot(Ybar, Ybar).real) - float(np.sum(svd1.singulars ** 2))) / (M * L)
    if nu1 <= NOISE_EPS * float(np.vdot(Y, Y).real) / (M * L):
        raise DegenerateNoise("residual noise power vanished")

    # V D U^H s = zeta V V^H Y s, so the 1/zeta factor cancels
    Ys = Y @ s_hat
    V = svd1.left
    h_hat = (Ys - V @ (V.conj().T @ Ys)) / E
    h_energy = float(np.vdot(h_hat, h_hat).real)
    xi = h_energy / nu1
    if not (np.isfinite(xi) and xi > 0):
        raise NonPositivePrecision(f"channel estimate vanished (xi={xi})")

    h_perp = h_hat - V @ (V.conj().T @ h_hat)
    r = (Ybar.conj().T @ h_perp) / h_energy + s_hat / (1.0 + zeta)
    loglik = -M * L * (1 + math.log(math.pi)) - M * L * math.log(nu1)

    if config.decision_mode == "hard":
        s_new = hard_decisions(prior, r, xi)
        E_new = float(np.vdot(s_new, s_new).real)
    else:
        s_new, E_new = signal_posterior(prior, r, xi)

    return EmDetState(
        s_hat=s_new,
        E=E_new,
        zeta=zeta,
        h_hat=h_hat,
        svd1=svd1,
        nu1=nu1,
        xi=xi,
        N_hat=N,
        iter=state.iter + 1,
        r=r,
        loglik=loglik,
    )


def nu0_det(Y, N: int) -> float:
    """Noise power under H0: mean of the M-N trailing eigenvalues of (1/L) Y Y^H, over M."""
    Y = np.asarray(Y, dtype=complex)
    M, L = Y.shape
    if not 0 <= N < min(M, L):
        raise InvalidRank(f"need 0 <= N < min(M, L), got N={N}")
    return float(np.sum(sample_eigenvalues(Y)[N:])) / M


def em_det_run(
    Y,
    prior: SignalPrior,
    config: EmConfig,
    init: Optional[InitProduct] = None,
) -> tuple[EmDetState, EmTrace]:
    """Same stopping rule as the Gaussian EM.

    If the posterior becomes deterministic the loop stops and the returned
    state is flagged ``collapsed``; the caller finishes with the known-signal
    statistic.
    """
    Y = np.asarray(Y, dtype=complex)
    state = EmDetState.start(*start_point(prior, init))
    trace = EmTrace()

    for i in range(1, config.max_iters + 1):
        try:
            new = em_det_step(state, Y, prior, config)
        except DegenerateZeta:
            logger.debug("em-det iter=%d: posterior collapsed, switching to closed form", i)
            return EmDetState(**{**state.__dict__, "collapsed": True}), trace
        change = relative_change(new.s_hat, state.s_hat)
        trace.loglik.append(new.loglik)
        trace.rel_change.append(change)
        logger.debug(
            "em-det iter=%d N=%d xi=%.4g zeta=%.4f change=%.3g", i, new.N_hat, new.xi,
            new.zeta, change,
        )
        state = new
        if i > 1 and change < config.rel_tol:
            trace.converged = True
            break
    return state, trace


def _closed_form_limit(Y: np.ndarray, state: EmDetState, config: EmConfig) -> DetectorReport:
    M, L = Y.shape
    if config.rank_mode == "fixed" or (state.iter > 0 and config.rank_refresh == "first_iteration"):
        N = config.fixed_rank if config.rank_mode == "fixed" else state.N_hat
    else:
        _, lams1 = sample_spectra(Y, state.s_hat)
        N = choose_rank(config, lams1, "det", M, L)
    report = mcwhorter_statistic(Y, state.s_hat, N)
    return DetectorReport.from_closed_form(report, fallback="mcwhorter", iterations=state.iter)


def glrt_det(
    Y,
    prior: SignalPrior,
    config: EmConfig,
    init: Optional[InitProduct] = None,
) -> DetectorReport:
    """Log-GLRT ML ln(nu0 / nu1) with nu0 taken at the final rank estimate."""
    Y = np.asarray(Y, dtype=complex)
    M, L = Y.shape
    state, trace = em_det_run(Y, prior, config, init)
    if state.collapsed:
        return _closed_form_limit(Y, state, config)
    nu0 = nu0_det(Y, state.N_hat)
    lams1 = np.zeros(M)
    lams1[: state.svd1.rank] = state.svd1.singulars ** 2 / L
    return DetectorReport(
        log_statistic=M * L * math.log(nu0 / state.nu1),
        n_hat=state.N_hat,
        iterations=state.iter,
        lams0=sample_eigenvalues(Y),
        lams1=lams1,
        converged=trace.converged,
        trace=trace.loglik,
    )
