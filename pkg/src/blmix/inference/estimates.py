import numpy as np

from .state import VariationalState

__all__ = ["map_assign", "estimate_topics", "estimate_weights"]


def map_assign(gamma) -> np.ndarray:
    """1-based MAP component of every row; ties go to the lowest index."""
    gamma = np.asarray(gamma)
    return np.argmax(gamma, axis=1) + 1


def estimate_topics(state: VariationalState) -> np.ndarray:
    """Posterior-mean style topic estimates: each row of topic parameters normalized."""
    params = state.topic_params()
    return params / params.sum(axis=1, keepdims=True)


def estimate_weights(state: VariationalState) -> np.ndarray:
    return state.eta / state.eta.sum()
