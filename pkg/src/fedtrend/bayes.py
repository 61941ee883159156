"""Bayesian trend scoring over a keyword vocabulary.

The prior over keywords is the mean of a Dirichlet parametrized by IDF
weights, so historically common words start with low trend probability.
Each user's likelihood vector is the mean of a Dirichlet parametrized by
how many of her documents carry each keyword in their primary keyword set.
Posterior scores are likelihood times prior; the marginal evidence term is
a constant and is never computed, since only the ranking matters.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import Document, VocabularyIndex, primary_keyword_set
from .secagg import FeatureVector

__all__ = [
    "LikelihoodVector",
    "PosteriorRanking",
    "PriorDistribution",
    "compute_local_likelihood",
    "compute_prior",
    "posterior_scores",
    "update_prior",
]

_SIMPLEX_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class PriorDistribution:
    """Discrete probability distribution over the vocabulary keywords."""

    vocab: VocabularyIndex
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64, copy=True)
        if p.shape != (len(self.vocab),):
            raise ValueError("prior length does not match vocabulary size")
        if np.any(p < 0):
            raise ValueError("prior probabilities must be nonnegative")
        if abs(float(p.sum()) - 1.0) > _SIMPLEX_TOLERANCE:
            raise ValueError("prior probabilities must sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)


@dataclass(frozen=True, eq=False)
class LikelihoodVector:
    """One user's per-keyword likelihoods; entries in [0, 1]."""

    user_id: str
    values: FeatureVector


@dataclass(frozen=True, eq=False)
class PosteriorRanking:
    """Unnormalized posterior scores plus their deterministic rank order.

    ``order`` sorts scores non-increasingly; exactly equal scores appear in
    lexicographic keyword order.
    """

    vocab: VocabularyIndex
    scores: np.ndarray
    order: tuple[int, ...]

    @classmethod
    def from_scores(cls, vocab: VocabularyIndex, scores: np.ndarray) -> "PosteriorRanking":
        scores = np.array(scores, dtype=np.float64, copy=True)
        if scores.shape != (len(vocab),):
            raise ValueError("score length does not match vocabulary size")
        order = tuple(
            sorted(range(len(vocab)), key=lambda j: (-scores[j], vocab.keywords[j]))
        )
        scores.setflags(write=False)
        return cls(vocab=vocab, scores=scores, order=order)

    def ranked_keywords(self) -> tuple[str, ...]:
        return tuple(self.vocab.keywords[j] for j in self.order)

    def rank_of(self, keyword: str) -> int:
        """1-based position of ``keyword`` in the ranking."""
        j = self.vocab.index_of(keyword)
        if j is None:
            raise KeyError(keyword)
        return self.order.index(j) + 1


def compute_prior(vocab: VocabularyIndex) -> PriorDistribution:
    """Mean of Dirichlet(idf): p[j] = idf[j] / sum(idf)."""
    total = float(vocab.idf.sum())
    if total <= 0.0:
        raise ValueError("degenerate prior: IDF table sums to zero")
    return PriorDistribution(vocab=vocab, p=vocab.idf / total)


def compute_local_likelihood(
    user_docs: Sequence[Document],
    vocab: VocabularyIndex,
    k: int = 5,
    user_id: str = "",
    alpha0: float = 0.0,
) -> LikelihoodVector:
    """Dirichlet-mean likelihood from primary-keyword-set document counts.

    c[j] counts the user's documents (per copy, if a document was sampled
    more than once) whose primary keyword set contains keyword j.  Keywords
    outside every primary keyword set keep likelihood 0.  ``alpha0`` adds a
    symmetric pseudo-count for callers who want nonzero support everywhere.
    The result sums to 1 unless the user contributes no counts at all, in
    which case it is all zeros.
    """
    if alpha0 < 0:
        raise ValueError("alpha0 must be nonnegative")
    counts = np.zeros(len(vocab), dtype=np.float64)
    for doc in user_docs:
        for keyword in primary_keyword_set(doc, k).keywords:
            j = vocab.index_of(keyword)
            if j is not None:
                counts[j] += 1.0
    if alpha0 > 0:
        counts += alpha0
    total = float(counts.sum())
    values = counts / total if total > 0 else counts
    return LikelihoodVector(
        user_id=user_id, values=FeatureVector(values=values, bounds=(0.0, 1.0))
    )


def posterior_scores(
    aggregated_likelihood: FeatureVector,
    prior: PriorDistribution,
    resolution: float = 0.0,
) -> PosteriorRanking:
    """Score keywords by aggregated likelihood times prior and rank them.

    ``resolution`` > 0 rounds the aggregated likelihood onto a grid of that
    pitch first.  Set it just above the secure-aggregation reconstruction
    noise (and below any genuine score separation) so that coordinates that
    are mathematically tied stay exactly tied after a noisy aggregation.
    """
    if len(aggregated_likelihood) != len(prior.vocab):
        raise ValueError("aggregated likelihood and prior use different vocabularies")
    values = aggregated_likelihood.values
    if resolution > 0.0:
        values = np.round(values / resolution) * resolution
    return PosteriorRanking.from_scores(prior.vocab, values * prior.p)


def update_prior(posterior: PosteriorRanking) -> PriorDistribution:
    """Normalize posterior scores into the next round's prior."""
    total = float(posterior.scores.sum())
    if total <= 0.0:
        raise ValueError("no evidence to update on: posterior scores are all zero")
    return PriorDistribution(vocab=posterior.vocab, p=posterior.scores / total)
