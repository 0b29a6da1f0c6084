"""Evidence lower bound of the mixture model.

The multinomial coefficients of the documents are left out (they do not
depend on the variational parameters); the log-normalizers of the priors
are kept, so the bound is comparable to a marginal log-likelihood computed
without those coefficients.
"""

import numpy as np
from scipy.special import xlogy

from ..errors import NumericalError
from ..generative import MixtureHyperparams
from ..special import digamma, gammaln
from .state import VariationalState
from .updates import as_count_matrix, expected_log_topics, expected_log_weights

__all__ = ["elbo_terms", "compute_elbo"]


def elbo_terms(state: VariationalState, Y, hyper: MixtureHyperparams) -> dict:
    """ELBO split into named term groups (their sum is the ELBO)."""
    Y = as_count_matrix(Y)
    G = hyper.G
    e_log_pi = expected_log_topics(state)
    e_log_lam = expected_log_weights(state.eta)
    expected_counts = np.asarray((Y.T @ state.gamma).T)
    occupancy = state.gamma.sum(axis=0)

    terms = {
        "likelihood": float(np.sum(expected_counts * e_log_pi)),
        "assignments": float(occupancy @ e_log_lam),
        "weight_prior": float(
            (hyper.psi - 1.0) * e_log_lam.sum() + gammaln(G * hyper.psi) - G * gammaln(hyper.psi)
        ),
        "assignment_entropy": float(-np.sum(xlogy(state.gamma, state.gamma))),
        "weight_entropy": float(
            -((state.eta - 1.0) @ e_log_lam + gammaln(state.eta.sum()) - gammaln(state.eta).sum())
        ),
    }

    if hyper.is_dirichlet:
        p = hyper.p
        theta = hyper.theta
        terms["topic_prior"] = float(
            (theta - 1.0) * e_log_pi.sum() + G * (gammaln(p * theta) - p * gammaln(theta))
        )
        phi = state.phi
        log_norm = gammaln(phi.sum(axis=1)) - gammaln(phi).sum(axis=1)
        terms["topic_entropy"] = float(-(np.sum((phi - 1.0) * e_log_pi) + log_norm.sum()))
    else:
        alphas, a, b = hyper.alphas, hyper.alpha, hyper.beta
        a0 = hyper.alpha0
        e_head = e_log_pi[:, :-1]
        e_last = e_log_pi[:, -1]
        e_log_sum = digamma(state.phi_alpha) - digamma(state.phi_alpha + state.phi_beta)
        prior_norm = gammaln(a0) + gammaln(a + b) - gammaln(a) - gammaln(b) - gammaln(alphas).sum()
        terms["topic_prior"] = float(
            np.sum(e_head @ (alphas - 1.0))
            + (a - a0) * e_log_sum.sum()
            + (b - 1.0) * e_last.sum()
            + G * prior_norm
        )
        phi, pa, pb = state.phi, state.phi_alpha, state.phi_beta
        phi0 = phi.sum(axis=1)
        q_norm = gammaln(phi0) + gammaln(pa + pb) - gammaln(pa) - gammaln(pb) - gammaln(phi).sum(axis=1)
        terms["topic_entropy"] = float(
            -(
                np.sum((phi - 1.0) * e_head)
                + np.sum((pa - phi0) * e_log_sum)
                + np.sum((pb - 1.0) * e_last)
                + q_norm.sum()
            )
        )

    for name, value in terms.items():
        if not np.isfinite(value):
            raise NumericalError(f"non-finite ELBO term group {name!r}")
    return terms


def compute_elbo(state: VariationalState, Y, hyper: MixtureHyperparams) -> float:
    return float(sum(elbo_terms(state, Y, hyper).values()))
