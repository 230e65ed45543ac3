"""Symbol priors p(s) = prod_l p_l(s_l) and their posterior statistics.

Each symbol is observed through the scalar Gaussian channel r_l = s_l + noise
with precision xi (noise variance 1/xi). Three prior kinds are supported:
known symbols (PointMass), finite alphabets (Discrete) and circular Gaussian.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Optional, Union

import numpy as np
from scipy.special import logsumexp

from structglrt.errors import InvalidInput, InvalidPrecision

WEIGHT_SUM_TOL = 1e-12

CONSTELLATIONS = {"bpsk", "qpsk", "8psk", "16qam"}


def constellation(name: str) -> np.ndarray:
    """Unit-average-energy alphabet by name."""
    if name == "bpsk":
        return np.array([1.0, -1.0], dtype=complex)
    if name == "qpsk":
        return np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2)
    if name == "8psk":
        return np.exp(2j * np.pi * np.arange(8) / 8)
    if name == "16qam":
        levels = np.array([-3.0, -1.0, 1.0, 3.0])
        return (levels[:, None] + 1j * levels[None, :]).ravel() / np.sqrt(10)
    raise InvalidInput(f"Unknown constellation: {name}. Valid: {', '.join(sorted(CONSTELLATIONS))}")


@dataclass(frozen=True)
class PosteriorSummary:
    """Posterior mean, second moment and (Discrete only) atom weights of one symbol."""
    mean: complex
    second_moment: float
    weights: Optional[np.ndarray] = None


@dataclass(frozen=True)
class PointMass:
    """Known symbol."""
    value: complex

    @property
    def mean(self) -> complex:
        return complex(self.value)

    @property
    def second_moment(self) -> float:
        return abs(self.value) ** 2

    def posterior(self, r: complex, xi: float) -> PosteriorSummary:
        return PosteriorSummary(mean=self.mean, second_moment=self.second_moment)


@dataclass(frozen=True)
class Discrete:
    """Finite alphabet with prior weights."""
    atoms: tuple[complex, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.atoms) == 0:
            raise InvalidInput("Discrete prior needs at least one atom")
        if len(self.atoms) != len(self.weights):
            raise InvalidInput("Discrete prior atoms and weights differ in length")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0):
            raise InvalidInput("Discrete prior weights must be nonnegative")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidInput(f"Discrete prior weights sum to {w.sum()!r}, not 1")

    @classmethod
    def uniform(cls, alphabet) -> "Discrete":
        atoms = tuple(complex(a) for a in np.asarray(alphabet).ravel())
        k = len(atoms)
        return cls(atoms=atoms, weights=tuple([1.0 / k] * k))

    @property
    def mean(self) -> complex:
        return complex(np.dot(self.weights, self.atoms))

    @property
    def second_moment(self) -> float:
        return float(np.dot(self.weights, np.abs(self.atoms) ** 2))

    def posterior(self, r: complex, xi: float) -> PosteriorSummary:
        atoms = np.asarray(self.atoms)
        with np.errstate(divide="ignore"):
            logits = np.log(np.asarray(self.weights)) - xi * np.abs(r - atoms) ** 2
        post = np.exp(logits - logsumexp(logits))
        return PosteriorSummary(
            mean=complex(post @ atoms),
            second_moment=float(post @ np.abs(atoms) ** 2),
            weights=post,
        )


@dataclass(frozen=True)
class Gaussian:
    """Circular Gaussian symbol CN(mean, variance)."""
    mean: complex
    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise InvalidInput(f"Gaussian prior variance must be > 0, got {self.variance}")

    @property
    def second_moment(self) -> float:
        return abs(self.mean) ** 2 + self.variance

    def posterior(self, r: complex, xi: float) -> PosteriorSummary:
        gain = self.variance / (self.variance + 1.0 / xi)
        mean = self.mean + gain * (r - self.mean)
        post_var = 1.0 / (xi + 1.0 / self.variance)
        return PosteriorSummary(mean=complex(mean), second_moment=abs(mean) ** 2 + post_var)


SymbolPrior = Union[PointMass, Discrete, Gaussian]


@dataclass(frozen=True)
class _PriorTable:
    """Column-stacked form of a SignalPrior, grouped by prior kind."""
    point_idx: np.ndarray
    point_val: np.ndarray
    gauss_idx: np.ndarray
    gauss_mean: np.ndarray
    gauss_var: np.ndarray
    disc_idx: np.ndarray
    disc_atoms: np.ndarray  # (n_disc, K_max), padded
    disc_logw: np.ndarray  # -inf on padding and zero-weight atoms


@dataclass(frozen=True)
class SignalPrior:
    """Independent per-symbol priors for a length-L signal."""
    symbols: tuple[SymbolPrior, ...]

    def __post_init__(self):
        if len(self.symbols) == 0:
            raise InvalidInput("SignalPrior needs at least one symbol")
        object.__setattr__(self, "symbols", tuple(self.symbols))

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def means(self) -> np.ndarray:
        return np.array([p.mean for p in self.symbols], dtype=complex)

    @property
    def second_moments(self) -> np.ndarray:
        return np.array([p.second_moment for p in self.symbols], dtype=float)

    def known_prefix(self) -> int:
        """Number of leading PointMass symbols."""
        count = 0
        for p in self.symbols:
            if not isinstance(p, PointMass):
                break
            count += 1
        return count

    @cached_property
    def table(self) -> _PriorTable:
        point, gauss, disc = [], [], []
        for l, p in enumerate(self.symbols):
            if isinstance(p, PointMass):
                point.append(l)
            elif isinstance(p, Gaussian):
                gauss.append(l)
            else:
                disc.append(l)
        k_max = max((len(self.symbols[l].atoms) for l in disc), default=1)
        atoms = np.zeros((len(disc), k_max), dtype=complex)
        logw = np.full((len(disc), k_max), -np.inf)
        for row, l in enumerate(disc):
            p = self.symbols[l]
            k = len(p.atoms)
            atoms[row, :k] = p.atoms
            with np.errstate(divide="ignore"):
                logw[row, :k] = np.log(np.asarray(p.weights, dtype=float))
        return _PriorTable(
            point_idx=np.array(point, dtype=int),
            point_val=np.array([self.symbols[l].value for l in point], dtype=complex),
            gauss_idx=np.array(gauss, dtype=int),
            gauss_mean=np.array([self.symbols[l].mean for l in gauss], dtype=complex),
            gauss_var=np.array([self.symbols[l].variance for l in gauss], dtype=float),
            disc_idx=np.array(disc, dtype=int),
            disc_atoms=atoms,
            disc_logw=logw,
        )


def _check_precision(xi: float) -> None:
    if not (np.isfinite(xi) and xi > 0):
        raise InvalidPrecision(f"precision must be finite and > 0, got {xi}")


def posterior_stats(prior: SymbolPrior, r: complex, xi: float) -> PosteriorSummary:
    _check_precision(xi)
    return prior.posterior(complex(r), float(xi))


def signal_posterior(prior: SignalPrior, r, xi: float) -> tuple[np.ndarray, float]:
    """Posterior means of all symbols and the aggregate second moment E."""
    _check_precision(xi)
    r = np.asarray(r, dtype=complex)
    if r.shape != (len(prior),):
        raise InvalidInput(f"r has shape {r.shape}, prior has {len(prior)} symbols")
    t = prior.table
    s_hat = np.empty(len(prior), dtype=complex)
    m2 = np.empty(len(prior), dtype=float)

    s_hat[t.point_idx] = t.point_val
    m2[t.point_idx] = np.abs(t.point_val) ** 2

    if t.gauss_idx.size:
        gain = t.gauss_var / (t.gauss_var + 1.0 / xi)
        mean = t.gauss_mean + gain * (r[t.gauss_idx] - t.gauss_mean)
        s_hat[t.gauss_idx] = mean
        m2[t.gauss_idx] = np.abs(mean) ** 2 + 1.0 / (xi + 1.0 / t.gauss_var)

    if t.disc_idx.size:
        post = _discrete_weights(t, r[t.disc_idx], xi)
        s_hat[t.disc_idx] = np.sum(post * t.disc_atoms, axis=1)
        m2[t.disc_idx] = np.sum(post * np.abs(t.disc_atoms) ** 2, axis=1)

    return s_hat, float(m2.sum())


def _discrete_weights(t: _PriorTable, r: np.ndarray, xi: float) -> np.ndarray:
    logits = t.disc_logw - xi * np.abs(r[:, None] - t.disc_atoms) ** 2
    return np.exp(logits - logsumexp(logits, axis=1, keepdims=True))


def hard_decisions(prior: SignalPrior, r, xi: float) -> np.ndarray:
    """Nearest-atom ML decisions; known symbols pass through.

    Gaussian symbols have no alphabet to decide on and take their posterior
    mean (the Gaussian MAP estimate). Ties resolve to the lowest atom index.
    """
    _check_precision(xi)
    r = np.asarray(r, dtype=complex)
    s_hat, _ = signal_posterior(prior, r, xi)
    t = prior.table
    if t.disc_idx.size:
        dist = np.abs(r[t.disc_idx, None] - t.disc_atoms) ** 2
        dist[~np.isfinite(t.disc_logw)] = np.inf
        pick = np.argmin(dist, axis=1)
        s_hat[t.disc_idx] = t.disc_atoms[np.arange(t.disc_idx.size), pick]
    return s_hat


def log_evidence(prior: SignalPrior, r, xi: float) -> float:
    """sum_l ln of the integral of exp(-xi |s - r_l|^2) p_l(s) ds.

    Together with the whitened energy terms this gives the exact marginal
    log-likelihood of the snapshots under the Gaussian-interference model.
    """
    _check_precision(xi)
    r = np.asarray(r, dtype=complex)
    t = prior.table
    total = -xi * float(np.sum(np.abs(r[t.point_idx] - t.point_val) ** 2))
    if t.gauss_idx.size:
        spread = t.gauss_var + 1.0 / xi
        total += float(np.sum(-np.abs(r[t.gauss_idx] - t.gauss_mean) ** 2 / spread
                              - np.log1p(xi * t.gauss_var)))
    if t.disc_idx.size:
        logits = t.disc_logw - xi * np.abs(r[t.disc_idx, None] - t.disc_atoms) ** 2
        total += float(np.sum(logsumexp(logits, axis=1)))
    return total


def training_data_prior(
    s_train,
    alphabet,
    L: int,
    data_model: Literal["discrete", "gaussian"] = "discrete",
    variance: float = 1.0,
    alphabets: Optional[dict[int, np.ndarray]] = None,
) -> SignalPrior:
    """Known training block followed by L-Q data symbols.

    ``alphabets`` overrides the shared alphabet for individual data positions
    (keys are absolute symbol indices).
    """
    s_train = np.asarray(s_train, dtype=complex).ravel()
    Q = s_train.shape[0]
    if Q > L:
        raise InvalidInput(f"training length {Q} exceeds frame length {L}")
    symbols: list[SymbolPrior] = [PointMass(complex(v)) for v in s_train]
    if data_model == "gaussian":
        symbols += [Gaussian(0j, variance) for _ in range(L - Q)]
    else:
        alphabet = np.asarray(alphabet, dtype=complex).ravel()
        if Q < L and alphabet.size == 0:
            raise InvalidInput("discrete data model needs a nonempty alphabet")
        shared = Discrete.uniform(alphabet) if alphabet.size else None
        overrides = alphabets or {}
        for l in range(Q, L):
            symbols.append(Discrete.uniform(overrides[l]) if l in overrides else shared)
    return SignalPrior(tuple(symbols))


def pulsed_prior(s_train, alphabet, L_active: int, L: int) -> SignalPrior:
    """Training, then data up to L_active, then known zeros (signal switched off)."""
    head = training_data_prior(s_train, alphabet, L_active)
    return SignalPrior(head.symbols + tuple(PointMass(0j) for _ in range(L - L_active)))
