"""Coordinate-ascent and stochastic updates of the variational parameters."""

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp

from ..corpus import DocumentTermMatrix
from ..errors import NumericalError
from ..generative import MixtureHyperparams
from ..special import digamma
from . import _kernels
from .state import VariationalState

__all__ = [
    "as_count_matrix",
    "expected_log_topics",
    "expected_log_weights",
    "local_log_weights",
    "optimal_gamma",
    "cavi_update_gamma",
    "cavi_update_phi",
    "cavi_update_eta",
    "cavi_sweep",
    "step_size",
    "svi_step",
    "svi_run_block",
]


def as_count_matrix(dtm) -> sp.csr_matrix:
    m = dtm.counts if isinstance(dtm, DocumentTermMatrix) else dtm
    m = sp.csr_matrix(m, dtype=np.float64)
    m.sort_indices()
    return m


def expected_log_topics(state: VariationalState) -> np.ndarray:
    """``G x p`` matrix of ``E_q[log pi_gl]``; the last column is ``E_q[log pi_gp]``."""
    if state.is_dirichlet:
        return digamma(state.phi) - digamma(state.phi.sum(axis=1))[:, None]
    dab = digamma(state.phi_alpha + state.phi_beta)
    e_log_sum = digamma(state.phi_alpha) - dab
    out = np.empty((state.G, state.phi.shape[1] + 1))
    out[:, :-1] = digamma(state.phi) - digamma(state.phi.sum(axis=1))[:, None] + e_log_sum[:, None]
    out[:, -1] = digamma(state.phi_beta) - dab
    return out


def expected_log_weights(eta) -> np.ndarray:
    return digamma(eta) - digamma(np.sum(eta))


def local_log_weights(state: VariationalState, Y) -> np.ndarray:
    """Unnormalized ``log gamma_ig`` given the current global parameters."""
    Y = as_count_matrix(Y)
    return np.asarray(Y @ expected_log_topics(state).T) + expected_log_weights(state.eta)


def optimal_gamma(state: VariationalState, Y) -> np.ndarray:
    logw = local_log_weights(state, Y)
    gamma = np.exp(logw - logsumexp(logw, axis=1, keepdims=True))
    if not np.all(np.isfinite(gamma)):
        raise NumericalError("non-finite responsibilities in the local update")
    return gamma


def cavi_update_gamma(state: VariationalState, Y, hyper: MixtureHyperparams = None) -> np.ndarray:
    """Responsibilities maximizing the ELBO with the global parameters held fixed."""
    return optimal_gamma(state, Y)


def cavi_update_phi(state: VariationalState, Y, hyper: MixtureHyperparams, phi_alpha_mode="conjugate"):
    """Topic parameters given the responsibilities.

    Returns ``(phi, phi_beta, phi_alpha)``; the last two are ``None`` for the
    Dirichlet baseline.
    """
    Y = as_count_matrix(Y)
    stats = np.asarray((Y.T @ state.gamma).T)  # G x p expected counts
    if hyper.is_dirichlet:
        return hyper.theta + stats, None, None
    phi = hyper.alphas + stats[:, :-1]
    phi_beta = hyper.beta + stats[:, -1]
    if phi_alpha_mode == "conjugate":
        phi_alpha = hyper.alpha + stats[:, :-1].sum(axis=1)
    elif phi_alpha_mode == "fixed":
        phi_alpha = np.full(hyper.G, hyper.alpha)
    else:
        raise ValueError(f"unknown phi_alpha_mode {phi_alpha_mode!r}")
    return phi, phi_beta, phi_alpha


def cavi_update_eta(state: VariationalState, hyper: MixtureHyperparams) -> np.ndarray:
    return hyper.psi + state.gamma.sum(axis=0)


def cavi_sweep(state: VariationalState, Y, hyper: MixtureHyperparams, phi_alpha_mode="conjugate") -> VariationalState:
    """One pass of the three coordinate updates, in the order gamma, phi, eta."""
    Y = as_count_matrix(Y)
    new = state.copy()
    new.gamma = cavi_update_gamma(new, Y, hyper)
    new.phi, new.phi_beta, new.phi_alpha = cavi_update_phi(new, Y, hyper, phi_alpha_mode)
    new.eta = cavi_update_eta(new, hyper)
    return new


def step_size(t, kappa: float):
    """Robbins-Monro schedule ``(1 + t) ** -kappa``."""
    return (1.0 + np.asarray(t, dtype=np.float64)) ** (-kappa)


def svi_run_block(state: VariationalState, Y: sp.csr_matrix, hyper: MixtureHyperparams, samples, t0: int,
                  kappa: float, phi_alpha_mode="conjugate", kernel=None) -> None:
    """Apply SVI steps ``t0, t0 + 1, ...`` for the sampled documents, in place."""
    samples = np.ascontiguousarray(samples, dtype=np.int64)
    n = float(Y.shape[0])
    indptr = Y.indptr.astype(np.int64)
    indices = Y.indices.astype(np.int64)
    if hyper.is_dirichlet:
        kernel = kernel or _kernels.svi_chunk_dirichlet
        kernel(indptr, indices, Y.data, samples, int(t0), float(kappa), n, hyper.theta, hyper.psi,
               state.phi, state.eta, state.gamma)
    else:
        kernel = kernel or _kernels.svi_chunk_bl
        kernel(indptr, indices, Y.data, samples, int(t0), float(kappa), n,
               np.asarray(hyper.alphas, dtype=np.float64), hyper.alpha, hyper.beta, hyper.psi,
               state.phi, state.phi_alpha, state.phi_beta, state.eta, state.gamma,
               phi_alpha_mode == "conjugate")


def svi_step(state: VariationalState, Y, hyper: MixtureHyperparams, t: int, rng: np.random.Generator,
             kappa: float = 0.6, phi_alpha_mode="conjugate") -> VariationalState:
    """One stochastic step on a uniformly sampled document; returns a new state."""
    if t < 1:
        raise ValueError("t must be at least 1")
    Y = as_count_matrix(Y)
    new = state.copy()
    s = rng.integers(Y.shape[0], size=1)
    svi_run_block(new, Y, hyper, s, t, kappa, phi_alpha_mode)
    return new
