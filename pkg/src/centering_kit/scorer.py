"""Coherence scoring by ranking a discourse against its own permutations.

The score of a discourse under a metric is the percentage of candidate
orderings that do worse than the original, counting ties as half:
``100 * (worse + equal / 2) / candidates``. Candidates never include the
original ordering. Small discourses are enumerated exhaustively; larger ones
are sampled without replacement from a seeded shuffle.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass
from typing import Iterator, Sequence

from .core import Discourse, InstantiationConfig, MentionMap, Utterance, forward_centers, run_centering
from .metrics import Comparison, Metric, Scorecard, compare_orderings, compute_scorecard

log = logging.getLogger(__name__)

EXHAUSTIVE = "exhaustive"
SAMPLED = "sampled"


class UnscorableDiscourse(ValueError):
    """The original ordering yields no valid scorecard, or too few utterances."""


@dataclass(frozen=True)
class PermutationPlan:
    """How candidate orderings are produced.

    ``mode=None`` resolves per discourse: exhaustive up to ``threshold``
    utterances, sampled beyond it. Sampling degrades to exhaustive whenever
    ``sample_size`` covers every non-original ordering.
    """

    mode: str | None = None
    sample_size: int = 100
    threshold: int = 5
    seed: int = 42

    def __post_init__(self):
        if self.mode not in (None, EXHAUSTIVE, SAMPLED):
            raise ValueError(f"unknown permutation mode {self.mode!r}")
        if self.sample_size < 1:
            raise ValueError("sample_size must be positive")
        if self.threshold < 1:
            raise ValueError("threshold must be positive")

    def resolve_mode(self, n_utterances: int) -> str:
        if self.mode is None:
            return EXHAUSTIVE if n_utterances <= self.threshold else SAMPLED
        if self.mode == EXHAUSTIVE and n_utterances > self.threshold:
            raise ValueError(
                f"exhaustive mode is limited to {self.threshold} utterances, "
                f"got {n_utterances}"
            )
        return self.mode


@dataclass(frozen=True)
class CoherenceResult:
    doc_id: str
    metric: Metric
    n_utterances: int
    worse: int
    equal: int
    better: int

    @property
    def ch(self) -> float:
        total = self.worse + self.equal + self.better
        return 100.0 * (self.worse + self.equal / 2.0) / total


def permutations_of(
    utterances: Sequence[Utterance], plan: PermutationPlan
) -> Iterator[tuple[int, ...]]:
    """Candidate orderings as index tuples, the original excluded."""
    n = len(utterances)
    if n < 2:
        raise ValueError("need at least two utterances to permute")
    identity = tuple(range(n))
    mode = plan.resolve_mode(n)
    total_others = math.factorial(n) - 1
    if mode == SAMPLED and plan.sample_size >= total_others:
        mode = EXHAUSTIVE
    if mode == EXHAUSTIVE:
        for perm in itertools.permutations(range(n)):
            if perm != identity:
                yield perm
        return
    rng = random.Random(plan.seed)
    seen: set[tuple[int, ...]] = set()
    want = min(plan.sample_size, total_others)
    while len(seen) < want:
        perm = list(identity)
        rng.shuffle(perm)
        t = tuple(perm)
        if t == identity or t in seen:
            continue
        seen.add(t)
        yield t


def scoreable_utterances(
    utterances: Sequence[Utterance], f: MentionMap, config: InstantiationConfig
) -> list[Utterance]:
    """Drop null utterances before permuting when skip-null mode is on."""
    if not config.skip_null_utterances:
        return list(utterances)
    return [u for u in utterances if forward_centers(u, f, config)]


def coherence_scores(
    utterances: Sequence[Utterance],
    f: MentionMap,
    config: InstantiationConfig,
    metrics: Sequence[Metric],
    plan: PermutationPlan,
    doc_id: str = "<discourse>",
) -> dict[Metric, CoherenceResult]:
    """Rank one discourse under several metrics over a single permutation pass."""
    kept = scoreable_utterances(utterances, f, config)
    if len(kept) < 2:
        raise UnscorableDiscourse(
            f"{doc_id}: {len(kept)} scoreable utterance(s), need at least 2"
        )
    original = compute_scorecard(run_centering(kept, f, config))
    if not original.valid:
        raise UnscorableDiscourse(f"{doc_id}: original ordering has no valid scorecard")
    tallies = {m: [0, 0, 0] for m in metrics}
    for order in permutations_of(kept, plan):
        candidate = compute_scorecard(
            run_centering([kept[i] for i in order], f, config)
        )
        for metric in metrics:
            outcome = compare_orderings(metric, original, candidate)
            if outcome is Comparison.A_BETTER:
                tallies[metric][0] += 1
            elif outcome is Comparison.EQUAL:
                tallies[metric][1] += 1
            else:
                tallies[metric][2] += 1
    return {
        m: CoherenceResult(doc_id, m, len(kept), *tallies[m]) for m in metrics
    }


def coherence_score(
    utterances: Sequence[Utterance],
    f: MentionMap,
    config: InstantiationConfig,
    metric: Metric,
    plan: PermutationPlan,
    doc_id: str = "<discourse>",
) -> CoherenceResult:
    """Score one discourse; raises UnscorableDiscourse when it cannot be ranked."""
    return coherence_scores(utterances, f, config, [metric], plan, doc_id)[metric]


@dataclass(frozen=True)
class CorpusCoherence:
    metric: Metric
    results: tuple[CoherenceResult, ...]
    skipped: tuple[str, ...]

    @property
    def mean_ch(self) -> float:
        if not self.results:
            raise ValueError("no scoreable discourse in corpus")
        return sum(r.ch for r in self.results) / len(self.results)


def corpus_coherence(
    corpus: Sequence[Discourse],
    config: InstantiationConfig,
    metric: Metric,
    plan: PermutationPlan,
) -> CorpusCoherence:
    """Score every discourse, skipping unscorable ones with a diagnostic."""
    results: list[CoherenceResult] = []
    skipped: list[str] = []
    for disc in corpus:
        try:
            results.append(
                coherence_score(
                    disc.utterances, disc.mention_map, config, metric, plan, disc.doc_id
                )
            )
        except UnscorableDiscourse as exc:
            log.warning("skipping discourse: %s", exc)
            skipped.append(disc.doc_id)
    if not results:
        raise ValueError(f"every discourse was skipped ({len(skipped)} total)")
    return CorpusCoherence(metric, tuple(results), tuple(skipped))
