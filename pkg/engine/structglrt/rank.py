"""Interference-rank estimation by information criteria."""

import math
from typing import Literal, Optional

import numpy as np

from structglrt.errors import DegenerateSpectrum, InvalidInput, InvalidRank
from structglrt.schemas.detector import EmConfig, RankCriterion
from structglrt.spectral import PSD_EPS, smooth_eigenvalues

Model = Literal["gauss", "det"]


def penalty_value(criterion: RankCriterion, D: int, T: int) -> float:
    if criterion.penalty == "aic":
        return float(D)
    elif criterion.penalty == "aicc":
        if D >= T - 1:
            raise InvalidInput(f"AICc needs D < T-1, got D={D}, T={T}")
        return T * D / (T - D - 1)
    elif criterion.penalty == "bic":
        return 0.5 * D * math.log(T)
    elif criterion.penalty == "gic":
        return criterion.gain * D
    else:
        raise InvalidInput(f"Unknown penalty: {criterion.penalty}")


def dof(model: Model, N: int, M: int, L: int) -> int:
    """Real degrees of freedom of the H1 model at interference rank N."""
    if model == "gauss":
        return (2 * M - N) * N + 2 * M + 1
    return 2 * (M + L - N) * N + 2 * M + 1


def default_n_max(M: int, L: int) -> int:
    return min(min(M, L) - 1, M // 2)


def resolve_n_max(criterion: RankCriterion, model: Model, M: int, L: int) -> int:
    n_max = default_n_max(M, L) if criterion.n_max is None else criterion.n_max
    limit = M if model == "gauss" else min(M, L)
    if n_max >= limit:
        raise InvalidRank(f"n_max={n_max} must be < {limit} for the {model} model")
    return n_max


def floor_spectrum(lams) -> np.ndarray:
    """Eigenvalues at or below PSD_EPS times the largest are set to exactly 0."""
    lams = np.asarray(lams, dtype=float)
    if lams.size == 0 or not np.any(lams > 0):
        return np.where(lams > 0, lams, 0.0)
    return np.where(lams > PSD_EPS * np.max(lams), lams, 0.0)


def gauss_loglik(lams: np.ndarray, N: int, L: int) -> float:
    """Maximized log-likelihood with rank-N-plus-white covariance."""
    M = lams.shape[0]
    smoothed = lams if N >= M else smooth_eigenvalues(lams, N)[0]
    if np.any(smoothed <= 0):
        return -np.inf
    return -L * (M + float(np.sum(np.log(smoothed))) + M * math.log(math.pi))


def det_loglik(lams: np.ndarray, N: int, L: int) -> float:
    """Maximized log-likelihood with a deterministic rank-N interference term."""
    M = lams.shape[0]
    tail = float(np.mean(lams[N:]))
    if tail <= 0:
        return -np.inf
    return -M * L * (1 + math.log(math.pi)) - M * L * math.log(tail)


def estimate_rank(
    lams,
    model: Model,
    criterion: RankCriterion,
    M: int,
    L: int,
) -> tuple[int, np.ndarray]:
    """argmax over N of loglik(N) - J(D(N)); ties go to the smallest N.

    Only N below the numerical rank of ``lams`` is scored; larger N would leave
    a round-off tail as the noise floor and score -inf.
    """
    lams = floor_spectrum(lams)
    if lams.shape != (M,):
        raise InvalidInput(f"expected {M} eigenvalues, got {lams.shape}")
    rank = int(np.count_nonzero(lams))
    if rank == 0:
        raise DegenerateSpectrum("all eigenvalues are zero")
    n_max = resolve_n_max(criterion, model, M, L)
    loglik = gauss_loglik if model == "gauss" else det_loglik
    T = 2 * M * L

    scores = np.empty(n_max + 1)
    for N in range(n_max + 1):
        if N >= rank:
            scores[N] = -np.inf
            continue
        try:
            penalty = penalty_value(criterion, dof(model, N, M, L), T)
        except InvalidInput:
            scores[N] = -np.inf
            continue
        scores[N] = loglik(lams, N, L) - penalty
    return int(np.argmax(scores)), scores


def choose_rank(
    config: EmConfig,
    lams,
    model: Model,
    M: int,
    L: int,
    previous: Optional[int] = None,
) -> int:
    """Rank used by one EM iteration.

    ``previous`` is the rank of the prior iteration; it is reused when the
    config freezes the estimate after the first iteration.
    """
    if config.rank_mode == "full":
        if model == "det":
            raise InvalidRank("deterministic-interference model cannot use N=M")
        return M
    if config.rank_mode == "fixed":
        N = config.fixed_rank
        limit = M if model == "gauss" else min(M, L) - 1
        if N > limit:
            raise InvalidRank(f"fixed rank {N} exceeds {limit} for the {model} model")
        return N
    if previous is not None and config.rank_refresh == "first_iteration":
        return previous
    return estimate_rank(lams, model, config.criterion, M, L)[0]
