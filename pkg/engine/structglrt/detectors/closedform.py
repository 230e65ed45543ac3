"""Known-signal GLRT statistics: Kelly, Gerlach-Steiner, KMR and McWhorter.

All four compare the spectrum of (1/L) Y Y^H with that of the signal-removed
(1/L) Y P_s^perp Y^H. They serve as training-only baselines and as the exact
limits the EM detectors must reach when the whole signal is known.
"""

import math

import numpy as np

from structglrt.detectors import ClosedFormReport
from structglrt.errors import (
    DegenerateNoise,
    InvalidInput,
    InvalidRank,
    KellyUndefined,
    ZeroSignal,
)
from structglrt.spectral import PSD_EPS, sample_eigenvalues, smooth_eigenvalues


def project_out(Y, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Validate (Y, s) and return them with Y P_s^perp."""
    Y = np.asarray(Y, dtype=complex)
    s = np.asarray(s, dtype=complex).ravel()
    if Y.ndim != 2 or not np.all(np.isfinite(Y)):
        raise InvalidInput("Y must be a finite 2-D array")
    if s.shape[0] != Y.shape[1]:
        raise InvalidInput(f"signal length {s.shape[0]} does not match L={Y.shape[1]}")
    energy = float(np.vdot(s, s).real)
    if energy == 0.0:
        raise ZeroSignal("reference signal is identically zero")
    Y_perp = Y - np.outer(Y @ s, s.conj()) / energy
    return Y, s, Y_perp


def sample_spectra(Y, s) -> tuple[np.ndarray, np.ndarray]:
    """Descending eigenvalues of (1/L) Y Y^H and (1/L) Y P_s^perp Y^H."""
    Y, s, Y_perp = project_out(Y, s)
    return sample_eigenvalues(Y), sample_eigenvalues(Y_perp)


def kelly_statistic(Y, s) -> ClosedFormReport:
    Y = np.asarray(Y)
    M, L = Y.shape
    if L < M + 1:
        raise KellyUndefined(f"need L >= M+1 snapshots, got L={L}, M={M}")
    lams0, lams1 = sample_spectra(Y, s)
    if lams1[-1] <= PSD_EPS * lams0[0]:
        raise KellyUndefined("signal-removed sample covariance is singular")
    stat = float(np.sum(np.log(lams0 / lams1)))
    return ClosedFormReport(stat, lams0, lams1, nu0=0.0, nu1=0.0, rank_used=M)


def gerlach_steiner_statistic(Y, s, nu: float) -> ClosedFormReport:
    if not nu > 0:
        raise InvalidInput(f"eigenvalue threshold must be > 0, got {nu}")
    lams0, lams1 = sample_spectra(Y, s)
    clamped0 = np.maximum(lams0, nu)
    clamped1 = np.maximum(lams1, nu)
    stat = float(np.sum(np.log(clamped0 / clamped1)))
    rank = int(np.count_nonzero(lams1 > nu))
    return ClosedFormReport(stat, lams0, lams1, nu0=nu, nu1=nu, rank_used=rank)


def kmr_statistic(Y, s, N: int) -> ClosedFormReport:
    M, L = np.asarray(Y).shape
    if not (0 <= N < M and N <= L):
        raise InvalidRank(f"KMR needs 0 <= N < M and N <= L, got N={N}, M={M}, L={L}")
    lams0, lams1 = sample_spectra(Y, s)
    smooth0, nu0 = smooth_eigenvalues(lams0, N)
    smooth1, nu1 = smooth_eigenvalues(lams1, N)
    if nu1 <= PSD_EPS * lams0[0] or np.any(smooth1 <= 0):
        raise DegenerateNoise("signal-removed noise floor vanished")
    stat = float(np.sum(np.log(smooth0 / smooth1)))
    return ClosedFormReport(stat, lams0, lams1, nu0=nu0, nu1=nu1, rank_used=N)


def mcwhorter_statistic(Y, s, N: int) -> ClosedFormReport:
    M, L = np.asarray(Y).shape
    if not 0 <= N < min(M, L):
        raise InvalidRank(f"McWhorter needs 0 <= N < min(M, L), got N={N}")
    lams0, lams1 = sample_spectra(Y, s)
    nu0 = float(np.sum(lams0[N:]))
    nu1 = float(np.sum(lams1[N:]))
    if nu1 <= PSD_EPS * lams0[0]:
        raise DegenerateNoise("signal-removed trailing eigenvalues vanished")
    stat = M * L * math.log(nu0 / nu1)
    return ClosedFormReport(stat, lams0, lams1, nu0=nu0, nu1=nu1, rank_used=N)
