"""Eigendecompositions, truncated SVD and eigenvalue smoothing.

Every detector reduces to eigenvalues of sample covariances, so this module is
the numerical floor of the package. Results are descending-ordered; tiny
negative eigenvalues produced by round-off on Gram matrices are clamped to 0.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from structglrt.errors import InvalidInput

# Relative PSD clamp: values in [-PSD_EPS * max, 0) are round-off
PSD_EPS = 1e-10

# Secular-solver deflation for tiny update weights and near-equal poles
DEFLATION_TOL = 1e-12

_MACHINE_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class EigenSystem:
    """Descending eigenvalues with their orthonormal eigenvectors as columns."""
    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


@dataclass(frozen=True)
class TruncatedSvd:
    """Top-N singular triplets: Y ~ left @ diag(singulars) @ right^H."""
    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    @property
    def rank(self) -> int:
        return self.singulars.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singulars) @ self.right.conj().T


def psd_floor(values: np.ndarray) -> np.ndarray:
    """Zero out round-off negatives no larger than PSD_EPS times the top magnitude."""
    values = np.asarray(values, dtype=float).copy()
    if values.size == 0:
        return values
    scale = np.max(np.abs(values))
    tiny = (values < 0) & (values >= -PSD_EPS * scale)
    values[tiny] = 0.0
    return values


def _as_finite(a, name: str, dtype=complex) -> np.ndarray:
    arr = np.asarray(a, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return arr


def hermitian_eig(A) -> EigenSystem:
    A = _as_finite(A, "A")
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {A.shape}")
    A = 0.5 * (A + A.conj().T)
    values, vectors = scipy.linalg.eigh(A)
    return EigenSystem(values=psd_floor(values[::-1]), vectors=vectors[:, ::-1])


def sample_eigenvalues(Y) -> np.ndarray:
    """Descending eigenvalues of (1/L) Y Y^H."""
    Y = np.asarray(Y, dtype=complex)
    L = Y.shape[1]
    values = scipy.linalg.eigvalsh(Y @ Y.conj().T / L)
    return psd_floor(values[::-1])


def principal_svd(Y, N: int) -> TruncatedSvd:
    Y = _as_finite(Y, "Y")
    if Y.ndim != 2:
        raise InvalidInput(f"expected a matrix, got shape {Y.shape}")
    M, L = Y.shape
    if not 0 < N <= min(M, L):
        raise InvalidInput(f"rank {N} outside 1..{min(M, L)}")
    U, s, Vh = scipy.linalg.svd(Y, full_matrices=False)
    return TruncatedSvd(left=U[:, :N], singulars=s[:N], right=Vh[:N].conj().T)


def smooth_eigenvalues(lams, N: int) -> tuple[np.ndarray, float]:
    """Replace the M-N trailing eigenvalues by their mean.

    Returns the smoothed sequence and the trailing mean (the noise-floor
    estimate). Trace is preserved.
    """
    lams = np.asarray(lams, dtype=float)
    M = lams.shape[0]
    if not 0 <= N < M:
        raise InvalidInput(f"smoothing rank {N} must satisfy 0 <= N < {M}")
    nu_hat = float(np.mean(lams[N:]))
    smoothed = lams.copy()
    smoothed[N:] = nu_hat
    return smoothed, nu_hat


# --- Diagonal minus rank-one update ---


def diag_minus_rank_one_eig(d, z) -> EigenSystem:
    """Eigendecomposition of Diag(d) - z z^H via the secular equation.

    ``d`` must be descending. Complex phases of ``z`` are absorbed into a
    diagonal unitary, leaving a real symmetric problem. Near-equal poles are
    merged with a Householder reflection and negligible weights are deflated
    before the remaining roots are bracketed one per interlacing interval.
    """
    d = _as_finite(d, "d", dtype=float).ravel().copy()
    z = _as_finite(z, "z").ravel()
    if d.shape != z.shape:
        raise InvalidInput(f"d and z lengths differ: {d.shape[0]} vs {z.shape[0]}")
    R = d.shape[0]
    if R == 0:
        return EigenSystem(values=np.zeros(0), vectors=np.zeros((0, 0), dtype=complex))
    if np.any(np.diff(d) > 0):
        raise InvalidInput("d must be sorted in descending order")

    w = np.abs(z)
    phase = np.ones(R, dtype=complex)
    nz = w > 0
    phase[nz] = z[nz] / w[nz]

    basis = np.eye(R)
    w_norm = float(np.linalg.norm(w))
    gap_tol = DEFLATION_TOL * max(abs(d[0]), abs(d[-1]), _MACHINE_EPS)

    for group in _pole_clusters(d, gap_tol):
        if len(group) < 2:
            continue
        wg = w[group]
        g_norm = float(np.linalg.norm(wg))
        d[group] = d[group[0]]
        if g_norm == 0.0:
            continue
        v = wg.copy()
        v[0] -= g_norm
        vv = float(v @ v)
        if vv > 0.0:
            H = np.eye(len(group)) - 2.0 * np.outer(v, v) / vv
            basis[:, group] = basis[:, group] @ H
        w[group] = 0.0
        w[group[0]] = g_norm

    active = w > DEFLATION_TOL * w_norm if w_norm > 0 else np.zeros(R, dtype=bool)
    Q = np.zeros((R, R))
    values = d.copy()
    inactive = np.flatnonzero(~active)
    Q[inactive, inactive] = 1.0

    idx = np.flatnonzero(active)
    if idx.size:
        lam, vecs = _secular_eig(d[idx], w[idx])
        values[idx] = lam
        Q[np.ix_(idx, idx)] = vecs

    order = np.argsort(-values, kind="stable")
    vectors = (phase[:, None] * basis) @ Q
    return EigenSystem(values=psd_floor(values[order]), vectors=vectors[:, order])


def _pole_clusters(d: np.ndarray, gap_tol: float) -> list[list[int]]:
    clusters = [[0]]
    for i in range(1, d.shape[0]):
        if d[clusters[-1][-1]] - d[i] < gap_tol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters


def _secular_eig(d: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Roots and eigenvectors of Diag(d) - w w^T for strictly descending d, w > 0.

    Roots interlace: lam_j in (d_{j+1}, d_j), the last one in (d_K - |w|^2, d_K).
    Each root is solved in a frame shifted to its nearest pole so that the
    differences d_k - lam_j keep full relative precision; eigenvectors use
    weights recomputed from the roots (Gu-Eisenstat), which keeps them
    orthogonal.
    """
    K = d.shape[0]
    w2 = w * w
    total = float(w2.sum())
    scale = max(abs(d[0]), abs(d[-1]), total)
    origins = np.empty(K)
    mus = np.empty(K)

    for j in range(K):
        if j == K - 1:
            origin = d[j]
            lo, hi = -total, 0.0
        else:
            mid = 0.5 * (d[j] + d[j + 1])
            if 1.0 - np.sum(w2 / (d - mid)) >= 0.0:
                origin = d[j]
                lo, hi = mid - d[j], 0.0
            else:
                origin = d[j + 1]
                lo, hi = 0.0, mid - d[j + 1]
        delta = d - origin

        def secular(mu, delta=delta):
            return 1.0 - np.sum(w2 / (delta - mu))

        pole_gap = 4.0 * _MACHINE_EPS * max(abs(origin), abs(hi - lo))
        if hi == 0.0:
            hi = -pole_gap
            if secular(hi) >= 0.0:
                lo = hi
        else:
            lo = pole_gap
            if secular(lo) <= 0.0:
                hi = lo
        mu = lo if lo == hi else brentq(
            secular, lo, hi, xtol=1e-16 * scale, rtol=4 * _MACHINE_EPS, maxiter=200
        )
        origins[j] = origin
        mus[j] = mu

    # diff[k, j] = d_k - lam_j
    diff = (d[:, None] - origins[None, :]) - mus[None, :]
    w_hat = np.empty(K)
    for k in range(K):
        ratio = diff[k, k]
        for j in range(K):
            if j != k:
                ratio *= diff[k, j] / (d[k] - d[j])
        w_hat[k] = np.sqrt(abs(ratio))

    vecs = w_hat[:, None] / diff
    vecs /= np.linalg.norm(vecs, axis=0, keepdims=True)
    return origins + mus, vecs
