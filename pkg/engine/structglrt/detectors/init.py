"""EM initialization from the training block.

Training-only ML estimates of the channel and the signal-removed covariance
are combined with shrinkage toward a scaled identity. The shrinkage weight is
chosen by leave-one-out cross-validation, maximizing the precision of the
unbiased whitened matched-filter outputs. Those outputs, rescaled, seed the
symbol posteriors of the data block.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from structglrt.errors import DegenerateTraining, InvalidInput, ZeroSignal
from structglrt.priors import PointMass, SignalPrior, signal_posterior
from structglrt.rank import estimate_rank
from structglrt.schemas.detector import DEFAULT_ALPHA_GRID, RankCriterion
from structglrt.spectral import EigenSystem, hermitian_eig, smooth_eigenvalues

logger = logging.getLogger(__name__)

XI_CAP = 1e12

# Shrinkage target floor, relative to the training snapshot power
_TARGET_FLOOR = 1e-12


@dataclass(frozen=True)
class InitProduct:
    """Initial symbol estimates plus the training-side quantities behind them."""
    s0: np.ndarray
    E0: float
    alpha_star: float
    beta_hat: complex
    xi_hat: float
    h_train: np.ndarray


def _training_block(Y_train, s_train) -> tuple[np.ndarray, np.ndarray, float]:
    Y_train = np.asarray(Y_train, dtype=complex)
    s_train = np.asarray(s_train, dtype=complex).ravel()
    if Y_train.ndim != 2 or Y_train.shape[1] != s_train.shape[0]:
        raise InvalidInput(
            f"training block shape {Y_train.shape} does not match {s_train.shape[0]} symbols"
        )
    energy = float(np.vdot(s_train, s_train).real)
    if energy == 0.0:
        raise ZeroSignal("training sequence is identically zero")
    return Y_train, s_train, energy


def train_estimates(Y_train, s_train) -> tuple[np.ndarray, np.ndarray, EigenSystem]:
    """Channel estimate Y_t s_t / ||s_t||^2 and covariance (1/Q) Y_t P^perp Y_t^H."""
    Y_train, s_train, energy = _training_block(Y_train, s_train)
    Q = s_train.shape[0]
    if Q < 2:
        raise DegenerateTraining(f"need at least 2 training symbols, got {Q}")
    h_train = Y_train @ s_train / energy
    residual = Y_train - np.outer(h_train, s_train.conj())
    sigma_train = residual @ residual.conj().T / Q
    return h_train, sigma_train, hermitian_eig(sigma_train)


def _shrinkage_target(eig_train: EigenSystem, Y_train: np.ndarray) -> float:
    M, Q = Y_train.shape
    power = float(np.vdot(Y_train, Y_train).real) / (M * Q)
    return max(float(np.sum(eig_train.values)) / M, _TARGET_FLOOR * power)


def loocv_precision(Y_train, s_train, alpha: float) -> tuple[complex, float, np.ndarray]:
    """Leave-one-out WMF outputs at shrinkage ``alpha`` with their gain and precision.

    Each held-out output r_l = y_l^H (Sigma_{-l})^{-1} h_{-l} is obtained from
    the full-block eigendecomposition by a rank-one downdate of the channel
    estimate and a Sherman-Morrison correction of the inverse covariance.
    """
    Y_train, s_train, energy = _training_block(Y_train, s_train)
    M, Q = Y_train.shape
    if Q < 3:
        raise DegenerateTraining(f"leave-one-out needs at least 3 training symbols, got {Q}")
    if not 0 < alpha <= 1:
        raise InvalidInput(f"shrinkage alpha must lie in (0, 1], got {alpha}")
    loo_energy = energy - np.abs(s_train) ** 2
    if np.any(loo_energy <= 0) or np.any(s_train == 0):
        raise DegenerateTraining("a training symbol carries all the training energy or is zero")

    h_train, _, eig_train = train_estimates(Y_train, s_train)
    c = _shrinkage_target(eig_train, Y_train)
    gamma = (1 - alpha) * (Q / (Q - 1)) * eig_train.values + alpha * c
    V = eig_train.vectors
    residual = Y_train - np.outer(h_train, s_train.conj())

    Yv = Y_train.conj().T @ V
    Nv = residual.conj().T @ V
    hv = (V.conj().T @ h_train) / gamma
    a = Yv @ hv
    d = Nv @ hv
    b = np.sum(Yv * Nv.conj() / gamma, axis=1)
    q = np.sum(np.abs(Nv) ** 2 / gamma, axis=1)

    g = (1 - alpha) / (Q - 1) * (energy / loo_energy)
    r_alpha = a + (b / (1 - g * q)) * (g * d - s_train / loo_energy)

    beta_hat, xi_hat = _unbias(r_alpha, s_train)
    return beta_hat, xi_hat, r_alpha


def _unbias(r: np.ndarray, s: np.ndarray) -> tuple[complex, float]:
    ratio = r / s
    total = complex(np.sum(ratio))
    if abs(total) <= 1e-12 * float(np.sum(np.abs(ratio))):
        raise DegenerateTraining("WMF outputs are uncorrelated with the training symbols")
    beta = s.shape[0] / total
    mse = float(np.mean(np.abs(beta * r - s) ** 2))
    xi = XI_CAP if mse * XI_CAP <= 1.0 else 1.0 / mse
    return beta, xi


def select_alpha(
    Y_train, s_train, grid: Sequence[float] = DEFAULT_ALPHA_GRID
) -> tuple[float, float]:
    """Shrinkage weight with the largest leave-one-out precision; ties go to larger alpha."""
    if len(grid) == 0:
        raise InvalidInput("alpha grid is empty")
    best_alpha, best_xi = None, -np.inf
    for alpha in grid:
        _, xi, _ = loocv_precision(Y_train, s_train, alpha)
        if xi > best_xi or (xi == best_xi and alpha > best_alpha):
            best_alpha, best_xi = alpha, xi
    logger.debug("selected alpha=%.3g (xi=%.4g)", best_alpha, best_xi)
    return float(best_alpha), float(best_xi)


def _check_training_prefix(prior: SignalPrior, s_train: np.ndarray) -> None:
    Q = s_train.shape[0]
    if Q > len(prior):
        raise InvalidInput(f"{Q} training symbols exceed frame length {len(prior)}")
    for l in range(Q):
        p = prior.symbols[l]
        if not isinstance(p, PointMass) or not np.isclose(p.value, s_train[l]):
            raise InvalidInput(f"prior symbol {l} is not the known training value")


def initialize(
    Y,
    s_train,
    prior: SignalPrior,
    grid: Sequence[float] = DEFAULT_ALPHA_GRID,
    route: Literal["regularized", "rank"] = "regularized",
    rank_gain: float = 1.1,
) -> InitProduct:
    """Initial (s0, E0) for either EM algorithm.

    The regularized route whitens with (1-alpha) Sigma_t + alpha c I at the
    LOOCV-selected alpha. The rank route whitens with the rank-N smoothed
    training covariance instead, N chosen by GIC on the training spectrum;
    both keep the LOOCV gain and precision.
    """
    Y = np.asarray(Y, dtype=complex)
    s_train = np.asarray(s_train, dtype=complex).ravel()
    _check_training_prefix(prior, s_train)
    M = Y.shape[0]
    Q = s_train.shape[0]
    Y_train = Y[:, :Q]

    alpha, _ = select_alpha(Y_train, s_train, grid)
    beta, xi, _ = loocv_precision(Y_train, s_train, alpha)
    h_train, _, eig_train = train_estimates(Y_train, s_train)

    if route == "rank":
        N, _ = estimate_rank(
            eig_train.values, "gauss", RankCriterion(gain=rank_gain), M, Q
        )
        spectrum, _ = smooth_eigenvalues(eig_train.values, N)
        floor = _TARGET_FLOOR * _shrinkage_target(eig_train, Y_train)
        spectrum = np.maximum(spectrum, floor)
    else:
        c = _shrinkage_target(eig_train, Y_train)
        spectrum = (1 - alpha) * eig_train.values + alpha * c

    V = eig_train.vectors
    whitened = V @ ((V.conj().T @ h_train) / spectrum)
    r = beta * (Y.conj().T @ whitened)
    r[:Q] = s_train
    s0, E0 = signal_posterior(prior, r, xi)
    logger.debug("init: alpha=%.3g beta=%s xi=%.4g E0=%.4g", alpha, beta, xi, E0)
    return InitProduct(
        s0=s0, E0=E0, alpha_star=alpha, beta_hat=complex(beta), xi_hat=xi, h_train=h_train
    )


def start_point(prior: SignalPrior, init: Optional[InitProduct] = None) -> tuple[np.ndarray, float]:
    """(s0, E0) from an InitProduct, or the prior means when there is none."""
    if init is not None:
        return np.asarray(init.s0, dtype=complex), float(init.E0)
    return prior.means, float(np.sum(prior.second_moments))
