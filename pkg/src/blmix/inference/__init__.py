"""Variational inference (CAVI and SVI) for Beta-Liouville and Dirichlet mixtures."""

from .elbo import compute_elbo, elbo_terms
from .estimates import estimate_topics, estimate_weights, map_assign
from .fit import fit, restart_rng, run_chain
from .state import FitConfig, FitResult, VariationalState, init_state
from .updates import (
    cavi_sweep,
    cavi_update_eta,
    cavi_update_gamma,
    cavi_update_phi,
    expected_log_topics,
    expected_log_weights,
    optimal_gamma,
    step_size,
    svi_run_block,
    svi_step,
)

__all__ = [
    "FitConfig",
    "FitResult",
    "VariationalState",
    "init_state",
    "cavi_update_gamma",
    "cavi_update_phi",
    "cavi_update_eta",
    "cavi_sweep",
    "expected_log_topics",
    "expected_log_weights",
    "optimal_gamma",
    "step_size",
    "svi_step",
    "svi_run_block",
    "compute_elbo",
    "elbo_terms",
    "fit",
    "run_chain",
    "restart_rng",
    "map_assign",
    "estimate_topics",
    "estimate_weights",
]
