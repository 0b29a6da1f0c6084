"""Short-text clustering with Beta-Liouville and Dirichlet mixtures of Unigrams."""

from ._accel import BACKEND
from .corpus import (
    DocumentTermMatrix,
    PreprocessConfig,
    corpus_stats,
    filter_sparse_terms,
    load_dtm,
    preprocess,
    save_dtm,
)
from .distributions import (
    BLParams,
    DirichletParams,
    bl_expected_log_stats,
    bl_log_density,
    bl_moments,
    bl_posterior_update,
    bl_sample,
    dirichlet_expected_log,
    dirichlet_log_density,
)
from .evaluation import adjusted_rand_index, permutation_accuracy, top_m_terms, topic_coherence
from .generative import (
    MixtureHyperparams,
    PriorFamily,
    blm_log_pmf,
    delta_to_alpha,
    dm_log_pmf,
    mixture_log_likelihood,
    sample_corpus,
)
from .inference import FitConfig, FitResult, VariationalState, compute_elbo, fit

__version__ = "0.1.0"
