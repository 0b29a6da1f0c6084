import itertools

import numpy as np
import pytest
from scipy.special import logsumexp

from blmix.distributions import BLParams, DirichletParams, bl_sample
from blmix.errors import DomainError
from blmix.generative import (
    MixtureHyperparams,
    block_topics,
    blm_log_pmf,
    delta_to_alpha,
    dm_log_pmf,
    mixture_log_likelihood,
    multinomial_log_pmf,
    sample_corpus,
)


def compositions(total, parts):
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        edges = (-1,) + cut + (total + parts - 1,)
        yield np.array([edges[k + 1] - edges[k] - 1 for k in range(parts)])


def test_compositions_helper():
    assert len(list(compositions(5, 3))) == 21
    assert all(c.sum() == 5 for c in compositions(5, 3))


# ----------------------------------------------------------- hyperparams


def test_delta_to_alpha_examples():
    assert delta_to_alpha(-0.4, np.ones(753)) == pytest.approx(451.8, abs=1e-9)
    assert delta_to_alpha(0.0, [0.5, 2.5]) == 3.0
    assert delta_to_alpha(0.1, np.ones(10)) == pytest.approx(11.0, abs=1e-12)
    with pytest.raises(DomainError):
        delta_to_alpha(-1.0, np.ones(3))


def test_hyperparam_defaults_and_roundtrip():
    h = MixtureHyperparams.beta_liouville(5, 20, delta=-0.3)
    assert h.psi == 1.0 and h.beta == 1.0 and np.array_equal(h.alphas, np.ones(19))
    assert h.delta == pytest.approx(-0.3)
    assert MixtureHyperparams.from_dict(h.to_dict()).to_dict() == h.to_dict()
    d = MixtureHyperparams.dirichlet(4, 10)
    assert d.is_dirichlet and d.theta == 1.0 and d.psi == 1.25
    assert MixtureHyperparams.from_dict(d.to_dict()) == d and MixtureHyperparams.from_dict(h.to_dict()) == h
    with pytest.raises(ValueError):
        MixtureHyperparams(0, 5)
    with pytest.raises(ValueError):
        MixtureHyperparams(2, 1)
    with pytest.raises(ValueError):
        MixtureHyperparams(2, 5, beta=0.0)


# ---------------------------------------------------------------- pmfs


def test_pmf_examples():
    assert blm_log_pmf(BLParams([1.0], 1.0, 1.0), [1, 1]) == pytest.approx(np.log(1 / 3), abs=1e-14)
    assert dm_log_pmf(DirichletParams([1.0, 1.0]), [1, 1]) == pytest.approx(np.log(1 / 3), abs=1e-14)
    assert dm_log_pmf(DirichletParams([1.0, 1.0, 1.0]), [0, 0, 0]) == 0.0
    with pytest.raises(DomainError):
        dm_log_pmf(DirichletParams([1.0, 1.0]), [1, 1, 1])
    with pytest.raises(DomainError):
        blm_log_pmf(BLParams([1.0], 1.0, 1.0), [-1, 1])


@pytest.mark.parametrize("N", range(0, 7))
def test_pmfs_normalize_by_enumeration(N):
    blm = BLParams([0.7, 1.9], 3.3, 0.6)
    dm = DirichletParams([0.7, 1.9, 0.6])
    ys = list(compositions(N, 3))
    assert np.exp(logsumexp([blm_log_pmf(blm, y) for y in ys])) == pytest.approx(1.0, abs=1e-10)
    assert np.exp(logsumexp([dm_log_pmf(dm, y) for y in ys])) == pytest.approx(1.0, abs=1e-10)


def test_blm_normalizes_example():
    ys = compositions(4, 3)
    total = sum(np.exp(blm_log_pmf(BLParams([1.0, 1.0], 2.0, 1.0), y)) for y in ys)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_blm_reduces_to_dm(rng):
    for _ in range(100):
        p = int(rng.integers(2, 8))
        alphas = rng.uniform(0.1, 5, p - 1)
        beta = rng.uniform(0.1, 5)
        y = rng.integers(0, 20, p)
        a = blm_log_pmf(BLParams(alphas, alphas.sum(), beta), y)
        b = dm_log_pmf(DirichletParams(np.append(alphas, beta)), y)
        assert a == pytest.approx(b, abs=1e-9)


def test_blm_matches_monte_carlo(rng):
    # E_pi[Multinomial(y | pi)] over prior draws
    for _ in range(10):
        p = int(rng.integers(2, 5))
        prm = BLParams(rng.uniform(0.5, 3, p - 1), rng.uniform(0.5, 3), rng.uniform(0.5, 3))
        y = rng.integers(0, 4, p)
        pis = bl_sample(prm, rng, size=1_000_000)
        logc = multinomial_log_pmf(np.full(p, 1.0 / p), y) - np.sum(y * np.log(1.0 / p))
        vals = np.exp(logc + (y * np.log(pis)).sum(axis=1))
        se = vals.std(ddof=1) / np.sqrt(vals.size)
        assert abs(vals.mean() - np.exp(blm_log_pmf(prm, y))) <= 3 * se + 1e-15


def test_mixture_log_likelihood_examples():
    topics = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert mixture_log_likelihood(topics, [0.5, 0.5], [2, 0]) == pytest.approx(np.log(0.5), abs=1e-14)
    probs = np.array([0.2, 0.3, 0.5])
    y = [3, 1, 2]
    assert mixture_log_likelihood(probs[None, :], [1.0], y) == pytest.approx(multinomial_log_pmf(probs, y))
    same = np.vstack([probs, probs])
    assert mixture_log_likelihood(same, [0.1, 0.9], y) == pytest.approx(mixture_log_likelihood(same, [0.7, 0.3], y))
    with pytest.raises(DomainError):
        mixture_log_likelihood(same, [1.0], y)


# -------------------------------------------------------------- corpora


def test_block_topics():
    t = block_topics(3, 30, 0.8)
    assert np.allclose(t.sum(axis=1), 1.0, atol=1e-12)
    assert t[0, :10].sum() == pytest.approx(0.8) and t[2, 20:].sum() == pytest.approx(0.8)
    with pytest.raises(DomainError):
        block_topics(3, 30, 1.0)


def test_sample_corpus_degenerate():
    h = MixtureHyperparams.beta_liouville(1, 4)
    c = sample_corpus(h, 3, 5, "fixed", np.random.default_rng(0))
    assert np.all(c.true_labels == 1)
    assert np.array_equal(c.dtm.doc_lengths(), [5, 5, 5])


def test_sample_corpus_invariants_and_reproducibility():
    h = MixtureHyperparams.beta_liouville(4, 12, delta=-0.3)
    a = sample_corpus(h, 50, 10, rng=np.random.default_rng(3))
    b = sample_corpus(h, 50, 10, rng=np.random.default_rng(3))
    assert a.dtm == b.dtm and np.array_equal(a.true_topics, b.true_topics)
    assert np.array_equal(a.dtm.doc_lengths(), a.doc_lengths) and a.doc_lengths.min() >= 1
    assert np.allclose(a.true_topics.sum(axis=1), 1.0, atol=1e-12)
    assert a.true_weights.sum() == pytest.approx(1.0)
    assert set(np.unique(a.true_labels)) <= set(np.flatnonzero(a.true_weights > 0) + 1)
    d = sample_corpus(MixtureHyperparams.dirichlet(2, 6), 20, 8, rng=np.random.default_rng(1))
    assert d.dtm.n == 20 and d.dtm.p == 6


def test_label_frequencies_match_weights():
    h = MixtureHyperparams.beta_liouville(3, 30)
    lam = np.array([0.5, 0.3, 0.2])
    c = sample_corpus(h, 600, 40, rng=np.random.default_rng(11), topics=block_topics(3, 30), weights=lam)
    freq = np.bincount(c.true_labels - 1, minlength=3) / 600
    se = np.sqrt(lam * (1 - lam) / 600)
    assert np.all(np.abs(freq - lam) <= 3 * se)


def test_sample_corpus_errors():
    h = MixtureHyperparams.beta_liouville(2, 5)
    with pytest.raises(DomainError):
        sample_corpus(h, 0)
    with pytest.raises(DomainError):
        sample_corpus(h, 5, length_law="uniform")
    with pytest.raises(DomainError):
        sample_corpus(h, 5, topics=np.ones((2, 5)))
