"""Multi-restart variational fitting."""

import logging
import time
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .._accel import BACKEND
from ..corpus import DocumentTermMatrix, drop_empty_documents, order_columns_by_frequency
from ..errors import DomainError
from ..generative import MixtureHyperparams
from .elbo import compute_elbo
from .estimates import estimate_topics, estimate_weights, map_assign
from .state import FitConfig, FitResult, VariationalState, init_state
from .updates import as_count_matrix, cavi_sweep, optimal_gamma, svi_run_block

__all__ = ["restart_rng", "run_chain", "fit"]

logger = logging.getLogger(__name__)


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    """Independent stream for one restart, split from the master seed by counter."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(restart),)))


def _local_optimum_elbo(state, Y, hyper):
    probe = state.copy()
    probe.gamma = optimal_gamma(probe, Y)
    return compute_elbo(probe, Y, hyper)


def run_chain(Y, hyper: MixtureHyperparams, config: FitConfig, restart: int) -> dict:
    """Run one chain from its own random start.

    CAVI records the ELBO of the current state. SVI only ever updates the
    sampled rows of ``gamma``, so its ELBO is taken with every row of
    ``gamma`` at its optimum for the current global parameters, and the
    returned state has gone through that full local pass.
    """
    Y = as_count_matrix(Y)
    n, p = Y.shape
    rng = restart_rng(config.seed, restart)
    start = time.perf_counter()
    state = init_state(hyper, n, p, rng)
    trace = []
    converged = False
    it = 0

    if config.algorithm == "cavi":
        trace.append((0, compute_elbo(state, Y, hyper)))
        small_changes = 0
        for it in range(1, config.max_iter + 1):
            state = cavi_sweep(state, Y, hyper, config.phi_alpha_mode)
            if it % config.elbo_every and it != config.max_iter:
                continue
            value = compute_elbo(state, Y, hyper)
            prev = trace[-1][1]
            trace.append((it, value))
            if abs(value - prev) <= config.tol * abs(prev):
                small_changes += 1
                if small_changes >= 2:
                    converged = True
                    break
            else:
                small_changes = 0
    else:
        samples = rng.integers(n, size=config.max_iter)
        trace.append((0, _local_optimum_elbo(state, Y, hyper)))
        t = 1
        while t <= config.max_iter:
            block = min(config.elbo_every - (t - 1) % config.elbo_every, config.max_iter - t + 1)
            svi_run_block(state, Y, hyper, samples[t - 1 : t - 1 + block], t, config.kappa, config.phi_alpha_mode)
            t += block
            trace.append((t - 1, _local_optimum_elbo(state, Y, hyper)))
        it = config.max_iter
        state.gamma = optimal_gamma(state, Y)

    return {
        "state": state,
        "trace": trace,
        "iterations": it,
        "converged": converged,
        "runtime": time.perf_counter() - start,
    }


def _warm_up(Y, hyper, config):
    """Compile the SVI kernel outside the timed region."""
    if config.algorithm != "svi" or BACKEND != "numba":
        return
    state = init_state(hyper, Y.shape[0], Y.shape[1], np.random.default_rng(0))
    svi_run_block(state, Y, hyper, np.zeros(1, dtype=np.int64), 1, config.kappa, config.phi_alpha_mode)


def _run_chain_star(args):
    return run_chain(*args)


def fit(dtm: DocumentTermMatrix, hyper: MixtureHyperparams, config: FitConfig = FitConfig()) -> FitResult:
    """Fit the mixture with ``config.restarts`` random starts; keep the best final ELBO."""
    n_input = dtm.n
    dtm, dropped = drop_empty_documents(dtm)
    if dropped.size:
        warnings.warn(f"dropped {dropped.size} all-zero documents: {dropped.tolist()}", stacklevel=2)
    if dtm.n == 0:
        raise DomainError("every document is empty")
    if hyper.p != dtm.p:
        raise DomainError(f"hyperparameters are for p={hyper.p} but the corpus has p={dtm.p}")
    if hyper.G > dtm.n:
        warnings.warn(f"G={hyper.G} exceeds the number of documents n={dtm.n}", stacklevel=2)

    order = np.arange(dtm.p)
    if config.beta_slot == "least-frequent":
        dtm, order = order_columns_by_frequency(dtm)
    Y = as_count_matrix(dtm)

    _warm_up(Y, hyper, config)
    jobs = [(Y, hyper, config, r) for r in range(config.restarts)]
    if config.jobs > 1 and config.restarts > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            chains = list(pool.map(_run_chain_star, jobs))
    else:
        chains = [_run_chain_star(j) for j in jobs]
    finals = [c["trace"][-1][1] for c in chains]
    best_index = int(np.argmax(finals))
    best = chains[best_index]
    logger.info("best restart %d of %d, final ELBO %.6f", best_index, len(chains), finals[best_index])

    state: VariationalState = best["state"]
    topics = np.empty((hyper.G, dtm.p))
    topics[:, order] = estimate_topics(state)
    assignments = map_assign(state.gamma)
    occupancy = np.bincount(assignments - 1, minlength=hyper.G)

    metadata = {
        "backend": BACKEND,
        "n_input_documents": int(n_input),
        "n_fitted_documents": int(dtm.n),
        "dropped_documents": dropped.tolist(),
        "phi_alpha_mode": config.phi_alpha_mode,
        "final_local_pass": config.algorithm == "svi",
        "best_restart": best_index,
        "restart_final_elbos": [float(v) for v in finals],
        "iterations": int(best["iterations"]),
        "converged": bool(best["converged"]),
        "expected_counts": state.gamma.sum(axis=0).tolist(),
        "empty_components": [int(g + 1) for g in np.flatnonzero(occupancy == 0)],
        "column_order": order.tolist() if config.beta_slot != "last" else None,
    }
    return FitResult(
        state=state,
        elbo_trace=best["trace"],
        assignments=assignments,
        topic_estimates=topics,
        weight_estimates=estimate_weights(state),
        runtime_seconds=float(np.mean([c["runtime"] for c in chains])),
        seed=config.seed,
        config=config,
        hyperparams=hyper,
        beta_slot_column=None if hyper.is_dirichlet else int(order[-1]),
        metadata=metadata,
    )
