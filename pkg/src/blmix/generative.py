"""Hierarchical mixture of Unigrams: hyperparameters, synthetic corpora, marginal pmfs.

Generative process for ``G`` components over a vocabulary of size ``p``::

    lambda    ~ Dirichlet_G(psi, ..., psi)
    pi_g      ~ BL_p(alphas, alpha, beta)      (or Dirichlet_p(theta, ..., theta))
    z_i       ~ Categorical(lambda)
    y_i | z_i ~ Multinomial_p(L_i, pi_{z_i})
"""

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp, xlogy

from .corpus import DocumentTermMatrix
from .distributions import (
    BLParams,
    DirichletParams,
    _check_counts,
    bl_sample,
    dirichlet_sample,
)
from .errors import DomainError
from .special import gammaln

__all__ = [
    "PriorFamily",
    "MixtureHyperparams",
    "SyntheticCorpus",
    "delta_to_alpha",
    "sample_corpus",
    "block_topics",
    "log_multinomial_coefficient",
    "blm_log_pmf",
    "dm_log_pmf",
    "multinomial_log_pmf",
    "mixture_log_likelihood",
]


class PriorFamily(str, enum.Enum):
    BETA_LIOUVILLE = "bl"
    DIRICHLET = "dirichlet"


def delta_to_alpha(delta: float, alphas) -> float:
    """Map the divergence knob ``delta`` to ``alpha = alpha0 * (1 + delta)``."""
    delta = float(delta)
    if not delta > -1:
        raise DomainError(f"delta must exceed -1 so that alpha > 0, got {delta}")
    return float(np.sum(alphas)) * (1.0 + delta)


@dataclass(frozen=True)
class MixtureHyperparams:
    """Prior settings for a ``G``-component mixture over ``p`` terms.

    ``alphas``, ``alpha`` and ``beta`` parametrize the Beta-Liouville topic
    prior; ``theta`` is the symmetric Dirichlet concentration used by the
    baseline; ``psi`` is the symmetric Dirichlet concentration of the weights.
    """

    G: int
    p: int
    prior_family: PriorFamily = PriorFamily.BETA_LIOUVILLE
    alphas: Optional[np.ndarray] = None
    alpha: Optional[float] = None
    beta: float = 1.0
    theta: float = 1.0
    psi: Optional[float] = None

    def __post_init__(self):
        G, p = int(self.G), int(self.p)
        if G < 1:
            raise ValueError("G must be at least 1")
        if p < 2:
            raise ValueError("p must be at least 2")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "prior_family", PriorFamily(self.prior_family))
        alphas = np.ones(p - 1) if self.alphas is None else np.array(self.alphas, dtype=np.float64)
        if alphas.shape != (p - 1,):
            raise ValueError(f"alphas must have length p - 1 = {p - 1}")
        if not np.all(alphas > 0):
            raise ValueError("alphas must be strictly positive")
        alphas.setflags(write=False)
        object.__setattr__(self, "alphas", alphas)
        alpha = float(alphas.sum()) if self.alpha is None else float(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        psi = 5.0 / G if self.psi is None else float(self.psi)
        object.__setattr__(self, "psi", psi)
        for name in ("alpha", "beta", "theta", "psi"):
            value = float(getattr(self, name))
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, value)

    def __eq__(self, other):
        if not isinstance(other, MixtureHyperparams):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None

    @classmethod
    def beta_liouville(cls, G, p, delta=0.0, alphas=None, beta=1.0, psi=None):
        alphas = np.ones(p - 1) if alphas is None else alphas
        return cls(G, p, PriorFamily.BETA_LIOUVILLE, alphas, delta_to_alpha(delta, alphas), beta, psi=psi)

    @classmethod
    def dirichlet(cls, G, p, theta=1.0, psi=None):
        return cls(G, p, PriorFamily.DIRICHLET, theta=theta, psi=psi)

    @property
    def is_dirichlet(self) -> bool:
        return self.prior_family is PriorFamily.DIRICHLET

    @property
    def alpha0(self) -> float:
        return float(self.alphas.sum())

    @property
    def delta(self) -> float:
        return self.alpha / self.alpha0 - 1.0

    def topic_prior(self):
        """The prior of each topic row as a distribution object."""
        if self.is_dirichlet:
            return DirichletParams(np.full(self.p, self.theta))
        return BLParams(self.alphas, self.alpha, self.beta)

    def to_dict(self) -> dict:
        out = {"G": self.G, "p": self.p, "prior_family": self.prior_family.value, "psi": self.psi}
        if self.is_dirichlet:
            out["theta"] = self.theta
        else:
            out.update(
                alphas=self.alphas.tolist(), alpha=self.alpha, beta=self.beta, delta=self.delta
            )
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "MixtureHyperparams":
        family = PriorFamily(d["prior_family"])
        if family is PriorFamily.DIRICHLET:
            return cls.dirichlet(d["G"], d["p"], theta=d["theta"], psi=d["psi"])
        return cls(d["G"], d["p"], family, d["alphas"], d["alpha"], d["beta"], psi=d["psi"])


@dataclass
class SyntheticCorpus:
    dtm: DocumentTermMatrix
    true_labels: np.ndarray  # 1-based
    true_topics: np.ndarray
    true_weights: np.ndarray
    doc_lengths: np.ndarray


def block_topics(G: int, p: int, mass: float = 0.8) -> np.ndarray:
    """Well-separated topics: topic g puts ``mass`` evenly on its own block of
    ``p // G`` terms and spreads the rest evenly over the other terms."""
    if not 0 < mass < 1:
        raise DomainError("mass must lie in (0, 1)")
    width = p // G
    if width < 1 or width == p:
        raise DomainError("need 1 <= p // G < p for disjoint blocks")
    topics = np.full((G, p), (1.0 - mass) / (p - width))
    for g in range(G):
        topics[g, g * width : (g + 1) * width] = mass / width
    return topics


def sample_corpus(
    hyper: MixtureHyperparams,
    n: int,
    doc_length: float = 40,
    length_law: str = "poisson",
    rng: Optional[np.random.Generator] = None,
    topics=None,
    weights=None,
) -> SyntheticCorpus:
    """Draw a corpus from the hierarchical model.

    ``length_law`` is ``"poisson"`` (mean ``doc_length``, zero lengths are
    redrawn) or ``"fixed"``. ``topics`` and ``weights`` replace the prior draws
    of the topic matrix and mixing weights when given.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    if doc_length < 1:
        raise DomainError("doc_length must be at least 1")
    if length_law not in ("poisson", "fixed"):
        raise DomainError(f"unknown length law {length_law!r}")
    rng = np.random.default_rng() if rng is None else rng
    G, p = hyper.G, hyper.p

    lam = dirichlet_sample(DirichletParams(np.full(G, hyper.psi)), rng)
    if weights is not None:
        lam = np.asarray(weights, dtype=np.float64)
        if lam.shape != (G,) or np.any(lam < 0) or abs(lam.sum() - 1) > 1e-12:
            raise DomainError("weights must be a probability vector of length G")
    prior = hyper.topic_prior()
    if hyper.is_dirichlet:
        drawn = dirichlet_sample(prior, rng, size=G)
    else:
        drawn = bl_sample(prior, rng, size=G)
    if topics is not None:
        drawn = np.asarray(topics, dtype=np.float64)
        if drawn.shape != (G, p) or np.any(drawn < 0) or np.any(np.abs(drawn.sum(axis=1) - 1) > 1e-12):
            raise DomainError("topics must be a row-stochastic G x p matrix")

    z = rng.choice(G, size=n, p=lam)
    if length_law == "fixed":
        lengths = np.full(n, int(doc_length), dtype=np.int64)
    else:
        lengths = rng.poisson(doc_length, size=n)
        zero = lengths == 0
        while zero.any():
            lengths[zero] = rng.poisson(doc_length, size=int(zero.sum()))
            zero = lengths == 0
    counts = np.empty((n, p), dtype=np.int64)
    for i in range(n):
        counts[i] = rng.multinomial(lengths[i], drawn[z[i]])

    width = len(str(p))
    vocab = [f"w{j:0{width}d}" for j in range(p)]
    labels = [str(g + 1) for g in z]
    return SyntheticCorpus(
        dtm=DocumentTermMatrix(counts, vocab, labels),
        true_labels=z + 1,
        true_topics=drawn,
        true_weights=lam,
        doc_lengths=lengths,
    )


def log_multinomial_coefficient(y) -> float:
    y = np.asarray(y, dtype=np.float64)
    return float(gammaln(y.sum() + 1.0) - np.sum(gammaln(y + 1.0)))


def blm_log_pmf(params: BLParams, y) -> float:
    """Log pmf of the Beta-Liouville-Multinomial marginal of ``y``."""
    y = _check_counts(y, params.p)
    head, last = y[:-1], y[-1]
    a, b, alphas = params.alpha, params.beta, params.alphas
    post_alphas = alphas + head
    post_a = a + head.sum()
    post_b = b + last
    return float(
        log_multinomial_coefficient(y)
        + gammaln(params.alpha0)
        + gammaln(a + b)
        + gammaln(post_a)
        + gammaln(post_b)
        + np.sum(gammaln(post_alphas))
        - gammaln(post_alphas.sum())
        - gammaln(post_a + post_b)
        - gammaln(a)
        - gammaln(b)
        - np.sum(gammaln(alphas))
    )


def dm_log_pmf(params: DirichletParams, y) -> float:
    """Log pmf of the Dirichlet-Multinomial marginal of ``y``."""
    y = _check_counts(y, params.d)
    c = params.concentrations
    return float(
        log_multinomial_coefficient(y)
        + gammaln(c.sum())
        - gammaln(c.sum() + y.sum())
        + np.sum(gammaln(c + y) - gammaln(c))
    )


def multinomial_log_pmf(probs, y) -> float:
    probs = np.asarray(probs, dtype=np.float64)
    y = _check_counts(y, probs.shape[0])
    return float(log_multinomial_coefficient(y) + np.sum(xlogy(y, probs)))


def mixture_log_likelihood(topics, weights, y) -> float:
    """``log sum_g weights[g] * Multinomial(y | topics[g])``."""
    topics = np.asarray(topics, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if topics.ndim != 2 or weights.shape != (topics.shape[0],):
        raise DomainError("topics must be G x p and weights of length G")
    y = _check_counts(y, topics.shape[1])
    per = xlogy(y[None, :], topics).sum(axis=1)
    with np.errstate(divide="ignore"):
        logw = np.log(weights)
    return float(log_multinomial_coefficient(y) + logsumexp(logw + per))
