import numpy as np
import pytest

from structglrt.priors import constellation


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def cgauss(rng, *shape, var=1.0):
    return np.sqrt(var / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def qpsk_symbols(rng, n):
    alphabet = constellation("qpsk")
    return alphabet[rng.integers(0, 4, size=n)]


def low_rank_frame(rng, M, L, N, nu=1.0, power=10.0, signal=True):
    """Y = h s^H + B Phi^H + W with QPSK s, returned with s."""
    s = qpsk_symbols(rng, L)
    h = cgauss(rng, M)
    B = cgauss(rng, M, N)
    Phi = cgauss(rng, L, N, var=power / max(N, 1))
    Y = B @ Phi.conj().T + cgauss(rng, M, L, var=nu)
    if signal:
        Y = Y + np.outer(h, s.conj())
    return Y, s
