"""Beta-Liouville and Dirichlet distributions on the probability simplex.

A Beta-Liouville vector on the p-simplex is built from a Dirichlet vector
``u`` over the first ``p - 1`` coordinates and an independent Beta generator
``r``: ``pi = (r * u, 1 - r)``. Parameters are ``alphas`` (length ``p - 1``),
``alpha`` and ``beta``; with ``alpha == sum(alphas)`` it reduces to
``Dirichlet(alphas..., beta)``.

Densities are exposed in log space only.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .special import digamma, gammaln

__all__ = [
    "BLParams",
    "DirichletParams",
    "BLMoments",
    "ExpectedLogStats",
    "bl_log_density",
    "bl_sample",
    "bl_moments",
    "bl_expected_log_stats",
    "bl_posterior_update",
    "dirichlet_log_density",
    "dirichlet_sample",
    "dirichlet_expected_log",
]


def _positive_vector(values, name):
    arr = np.array(values, dtype=np.float64, ndmin=1)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    if not np.all(arr > 0):
        raise DomainError(f"{name} must be strictly positive")
    arr.setflags(write=False)
    return arr


def _positive_scalar(value, name):
    value = float(value)
    if not (np.isfinite(value) and value > 0):
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")
    return value


@dataclass(frozen=True)
class BLParams:
    """Beta-Liouville parameters for the p-simplex, ``p = len(alphas) + 1``."""

    alphas: np.ndarray
    alpha: float
    beta: float

    def __post_init__(self):
        alphas = _positive_vector(self.alphas, "alphas")
        if alphas.size < 1:
            raise DomainError("alphas needs at least one entry (p >= 2)")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "alpha", _positive_scalar(self.alpha, "alpha"))
        object.__setattr__(self, "beta", _positive_scalar(self.beta, "beta"))

    @property
    def p(self) -> int:
        return self.alphas.shape[0] + 1

    @property
    def alpha0(self) -> float:
        return float(np.sum(self.alphas))

    def __eq__(self, other):
        if not isinstance(other, BLParams):
            return NotImplemented
        return (
            np.array_equal(self.alphas, other.alphas)
            and self.alpha == other.alpha
            and self.beta == other.beta
        )

    __hash__ = None


@dataclass(frozen=True)
class DirichletParams:
    concentrations: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "concentrations", _positive_vector(self.concentrations, "concentrations")
        )

    @property
    def d(self) -> int:
        return self.concentrations.shape[0]

    def __eq__(self, other):
        if not isinstance(other, DirichletParams):
            return NotImplemented
        return np.array_equal(self.concentrations, other.concentrations)

    __hash__ = None


class BLMoments(NamedTuple):
    mean: np.ndarray
    variance: np.ndarray
    covariance: np.ndarray


class ExpectedLogStats(NamedTuple):
    e_log_pi: np.ndarray
    e_log_sum: float
    e_log_last: float


def _check_simplex_point(x, p):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != p:
        raise DomainError(f"expected a point of dimension {p}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("point has non-finite coordinates")
    if np.any(x <= 0):
        raise DomainError("point lies on the simplex boundary; clamp it before evaluating")
    if abs(x.sum() - 1.0) > 1e-12 * max(1, p):
        raise DomainError(f"coordinates sum to {x.sum()!r}, not 1")
    return x


def bl_log_density(params: BLParams, x) -> float:
    """Log density of ``BL(params)`` at the interior simplex point ``x``."""
    x = _check_simplex_point(x, params.p)
    a, b, alphas = params.alpha, params.beta, params.alphas
    a0 = params.alpha0
    head = x[:-1]
    log_norm = gammaln(a0) + gammaln(a + b) - gammaln(a) - gammaln(b) - np.sum(gammaln(alphas))
    return float(
        log_norm
        + np.dot(alphas - 1.0, np.log(head))
        + (a - a0) * np.log(head.sum())
        + (b - 1.0) * np.log(x[-1])
    )


def bl_sample(params: BLParams, rng: np.random.Generator, size=None) -> np.ndarray:
    """Draw from ``BL(params)``.

    Returns one point of length ``p``, or an array of shape ``(size, p)``.
    Dirichlet and Beta draws are both built from normalized Gamma variates.
    """
    n = 1 if size is None else int(size)
    g = rng.standard_gamma(params.alphas, size=(n, params.p - 1))
    u = g / g.sum(axis=1, keepdims=True)
    ga = rng.standard_gamma(params.alpha, size=n)
    gb = rng.standard_gamma(params.beta, size=n)
    r = ga / (ga + gb)
    out = np.empty((n, params.p))
    out[:, :-1] = r[:, None] * u
    out[:, -1] = gb / (ga + gb)
    return out[0] if size is None else out


def bl_moments(params: BLParams) -> BLMoments:
    """Mean, variance and covariance of the first ``p - 1`` coordinates."""
    a, b, alphas = params.alpha, params.beta, params.alphas
    a0 = params.alpha0
    m = a / (a + b)
    second = a * (a + 1.0) / ((a + b) * (a + b + 1.0))
    mean = m * alphas / a0
    cross = second * np.outer(alphas, alphas) / (a0 * (a0 + 1.0))
    cov = cross - np.outer(mean, mean)
    var = second * alphas * (alphas + 1.0) / (a0 * (a0 + 1.0)) - mean**2
    np.fill_diagonal(cov, var)
    return BLMoments(mean=mean, variance=var, covariance=cov)


def bl_expected_log_stats(params: BLParams) -> ExpectedLogStats:
    """Expected sufficient statistics ``E[log pi_l]``, ``E[log sum]``, ``E[log pi_p]``."""
    a, b = params.alpha, params.beta
    dab = digamma(a + b)
    e_log_sum = float(digamma(a) - dab)
    e_log_last = float(digamma(b) - dab)
    e_log_pi = digamma(params.alphas) - digamma(params.alpha0) + e_log_sum
    return ExpectedLogStats(e_log_pi=e_log_pi, e_log_sum=e_log_sum, e_log_last=e_log_last)


def _check_counts(counts, p):
    y = np.asarray(counts)
    if y.ndim != 1 or y.shape[0] != p:
        raise DomainError(f"expected a count vector of length {p}, got shape {y.shape}")
    yf = y.astype(np.float64)
    if not np.all(np.isfinite(yf)) or np.any(yf != np.round(yf)):
        raise DomainError("counts must be integers")
    if np.any(yf < 0):
        raise DomainError(f"negative count at index {int(np.argmax(yf < 0))}")
    return yf


def bl_posterior_update(params: BLParams, counts) -> BLParams:
    """Conjugate update of ``BL(params)`` after observing Multinomial ``counts``."""
    y = _check_counts(counts, params.p)
    head = y[:-1]
    return BLParams(
        alphas=params.alphas + head,
        alpha=params.alpha + head.sum(),
        beta=params.beta + y[-1],
    )


def dirichlet_log_density(params: DirichletParams, x) -> float:
    x = _check_simplex_point(x, params.d)
    c = params.concentrations
    return float(gammaln(c.sum()) - np.sum(gammaln(c)) + np.dot(c - 1.0, np.log(x)))


def dirichlet_sample(params: DirichletParams, rng: np.random.Generator, size=None) -> np.ndarray:
    n = 1 if size is None else int(size)
    g = rng.standard_gamma(params.concentrations, size=(n, params.d))
    out = g / g.sum(axis=1, keepdims=True)
    return out[0] if size is None else out


def dirichlet_expected_log(params: DirichletParams) -> np.ndarray:
    c = params.concentrations
    return digamma(c) - digamma(c.sum())
