import dataclasses
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..generative import MixtureHyperparams

ALGORITHMS = ("cavi", "svi")
PHI_ALPHA_MODES = ("conjugate", "fixed")
BETA_SLOTS = ("last", "least-frequent")


@dataclass
class VariationalState:
    """Variational parameters of one chain.

    For the Beta-Liouville family ``phi`` is ``G x (p-1)`` and ``phi_alpha``,
    ``phi_beta`` are length-``G`` vectors. For the Dirichlet baseline ``phi``
    is ``G x p`` and both are ``None``.
    """

    gamma: np.ndarray
    phi: np.ndarray
    phi_beta: Optional[np.ndarray]
    phi_alpha: Optional[np.ndarray]
    eta: np.ndarray

    @property
    def is_dirichlet(self) -> bool:
        return self.phi_beta is None

    @property
    def G(self) -> int:
        return self.eta.shape[0]

    def copy(self) -> "VariationalState":
        return VariationalState(
            self.gamma.copy(),
            self.phi.copy(),
            None if self.phi_beta is None else self.phi_beta.copy(),
            None if self.phi_alpha is None else self.phi_alpha.copy(),
            self.eta.copy(),
        )

    def topic_params(self) -> np.ndarray:
        """``G x p`` matrix ``(phi_g1 .. phi_g(p-1), phi_gbeta)``; ``phi`` itself for Dirichlet."""
        if self.is_dirichlet:
            return self.phi
        return np.column_stack([self.phi, self.phi_beta])

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma.tolist(),
            "phi": self.phi.tolist(),
            "phi_beta": None if self.phi_beta is None else self.phi_beta.tolist(),
            "phi_alpha": None if self.phi_alpha is None else self.phi_alpha.tolist(),
            "eta": self.eta.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VariationalState":
        def arr(v):
            return None if v is None else np.asarray(v, dtype=np.float64)

        gamma = arr(d["gamma"])
        eta = arr(d["eta"])
        if gamma.size == 0:
            gamma = gamma.reshape(0, eta.shape[0])
        return cls(gamma, arr(d["phi"]), arr(d["phi_beta"]), arr(d["phi_alpha"]), eta)


def init_state(hyper: MixtureHyperparams, n: int, p: int, rng: np.random.Generator) -> VariationalState:
    """Random starting point: Gamma(1, scale=100) globals, Dirichlet(1) responsibilities."""
    G = hyper.G
    width = p if hyper.is_dirichlet else p - 1
    phi = rng.gamma(1.0, 100.0, size=(G, width))
    phi_beta = None if hyper.is_dirichlet else rng.gamma(1.0, 100.0, size=G)
    eta = rng.gamma(1.0, 100.0, size=G)
    gamma = rng.dirichlet(np.ones(G), size=n) if n else np.empty((0, G))
    phi_alpha = None if hyper.is_dirichlet else np.full(G, hyper.alpha)
    return VariationalState(gamma, phi, phi_beta, phi_alpha, eta)


@dataclass(frozen=True)
class FitConfig:
    """Settings of the variational fit.

    ``phi_alpha_mode="conjugate"`` updates ``phi_alpha`` to its coordinate
    optimum ``alpha + sum_i gamma_ig * sum_{l<p} y_il``; ``"fixed"`` keeps it
    at ``alpha``, which is not an ascent step and loosens the bound.
    """

    algorithm: str = "svi"
    max_iter: int = 5000
    kappa: float = 0.6
    restarts: int = 30
    seed: int = 0
    elbo_every: int = 50
    tol: float = 1e-6
    phi_alpha_mode: str = "conjugate"
    beta_slot: str = "last"
    jobs: int = 1

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if not 0.5 < self.kappa <= 1.0:
            raise ValueError("kappa must lie in (0.5, 1]")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.elbo_every < 1:
            raise ValueError("elbo_every must be at least 1")
        if not self.tol >= 0:
            raise ValueError("tol must be nonnegative")
        if self.phi_alpha_mode not in PHI_ALPHA_MODES:
            raise ValueError(f"phi_alpha_mode must be one of {PHI_ALPHA_MODES}")
        if self.beta_slot not in BETA_SLOTS:
            raise ValueError(f"beta_slot must be one of {BETA_SLOTS}")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class FitResult:
    state: VariationalState
    elbo_trace: list
    assignments: np.ndarray  # 1-based
    topic_estimates: np.ndarray
    weight_estimates: np.ndarray
    runtime_seconds: float
    seed: int
    config: FitConfig
    hyperparams: MixtureHyperparams
    beta_slot_column: Optional[int]
    metadata: dict = field(default_factory=dict)

    @property
    def final_elbo(self) -> float:
        return self.elbo_trace[-1][1]

    def to_dict(self) -> dict:
        return {
            "state": self.state.to_dict(),
            "elbo_trace": [[int(t), float(v)] for t, v in self.elbo_trace],
            "assignments": [int(a) for a in self.assignments],
            "topic_estimates": self.topic_estimates.tolist(),
            "weight_estimates": self.weight_estimates.tolist(),
            "runtime_seconds": float(self.runtime_seconds),
            "seed": int(self.seed),
            "config": self.config.to_dict(),
            "hyperparams": self.hyperparams.to_dict(),
            "beta_slot_column": self.beta_slot_column,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        return cls(
            state=VariationalState.from_dict(d["state"]),
            elbo_trace=[(int(t), float(v)) for t, v in d["elbo_trace"]],
            assignments=np.asarray(d["assignments"], dtype=np.int64),
            topic_estimates=np.asarray(d["topic_estimates"], dtype=np.float64),
            weight_estimates=np.asarray(d["weight_estimates"], dtype=np.float64),
            runtime_seconds=float(d["runtime_seconds"]),
            seed=int(d["seed"]),
            config=FitConfig(**d["config"]),
            hyperparams=MixtureHyperparams.from_dict(d["hyperparams"]),
            beta_slot_column=d["beta_slot_column"],
            metadata=d.get("metadata", {}),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "FitResult":
        return cls.from_dict(json.loads(text))

    def trace_csv(self) -> str:
        rows = ["iteration,elbo"] + [f"{int(t)},{float(v)!r}" for t, v in self.elbo_trace]
        return "\n".join(rows) + "\n"
