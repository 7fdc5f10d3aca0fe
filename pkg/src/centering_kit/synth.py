"""Synthetic discourse generators and coreference corruption.

Three families are bundled: fully random discourses for stress tests,
narrative discourses whose adjacent utterances share an entity (so the
original order scores well), and lag-2 discourses where the main entities
recur every other utterance (so only a carried-over backward center sees
them). Corruption reassigns a fraction of mentions, either to another chain
or to a fresh singleton, mimicking degraded coreference output.
"""

from __future__ import annotations

import random
from typing import Iterable, Sequence

from .conll import MentionSpan
from .core import Discourse, MentionMap, Utterance
from .evalstats import corpus_conll_f1
from .roles import GrammaticalRole, RoleLabel, SemanticRole

_GRAM_HINT = {
    GrammaticalRole.SUBJECT: "subj",
    GrammaticalRole.OBJECT: "obj",
    GrammaticalRole.OTHER: "other",
}
_SEM_HINT = {
    SemanticRole.AGENT: "agent",
    SemanticRole.PATIENT: "patient",
    SemanticRole.OTHER: "other",
}


def _doc_rng(seed: int, tag: str) -> random.Random:
    return random.Random(f"{seed}:{tag}")


def _make_discourse(
    doc_id: str, per_utterance: Sequence[Sequence[tuple[int, RoleLabel]]]
) -> Discourse:
    """Build a discourse from per-utterance (entity, role) lists."""
    utterances = []
    assignments: dict[tuple[int, int, int], int] = {}
    for ordinal, entries in enumerate(per_utterance):
        mentions = []
        for position, (entity, role) in enumerate(entries):
            span = MentionSpan(ordinal, position, position, entity)
            mentions.append((span, role))
            assignments[span.key] = entity
        utterances.append(
            Utterance(ordinal=ordinal, sentence_index=ordinal, mentions=tuple(mentions))
        )
    return Discourse(doc_id, tuple(utterances), MentionMap(assignments))


def random_discourse(
    doc_id: str,
    rng: random.Random,
    n_utterances: int | None = None,
    n_entities: int = 5,
    max_mentions: int = 3,
    p_null: float = 0.12,
    with_semantic: bool = False,
) -> Discourse:
    """A discourse with random entity realizations, roles and null utterances."""
    if n_utterances is None:
        n_utterances = rng.randint(4, 10)
    grams = (GrammaticalRole.SUBJECT, GrammaticalRole.OBJECT, GrammaticalRole.OTHER)
    sems = (None, SemanticRole.AGENT, SemanticRole.PATIENT, SemanticRole.OTHER)
    per_utterance = []
    for _ in range(n_utterances):
        if rng.random() < p_null:
            per_utterance.append([])
            continue
        entries = []
        for _ in range(rng.randint(1, max_mentions)):
            role = RoleLabel(
                grammatical=rng.choice(grams),
                is_pronoun=rng.random() < 0.3,
                semantic=rng.choice(sems) if with_semantic else None,
            )
            entries.append((rng.randint(1, n_entities), role))
        per_utterance.append(entries)
    return _make_discourse(doc_id, per_utterance)


def narrative_corpus(n_docs: int = 50, seed: int = 11) -> list[Discourse]:
    """Coherent documents: consecutive utterances share one bridging entity."""
    docs = []
    for d in range(n_docs):
        rng = _doc_rng(seed, f"narrative:{d}")
        n = rng.randint(7, 9)
        fresh = 1000
        per_utterance: list[list[tuple[int, RoleLabel]]] = []
        for i in range(n):
            entries: list[tuple[int, RoleLabel]] = []
            if i < n - 1:
                # bridge entity i links this utterance to the next one
                entries.append(
                    (
                        i + 1,
                        RoleLabel(GrammaticalRole.SUBJECT, rng.random() < 0.3),
                    )
                )
            if i > 0:
                entries.append(
                    (i, RoleLabel(GrammaticalRole.OBJECT, rng.random() < 0.5))
                )
            if i >= 2 and rng.random() < 0.25:
                entries.append((i - 1, RoleLabel(GrammaticalRole.OTHER, False)))
            if rng.random() < 0.4:
                entries.append((fresh, RoleLabel(GrammaticalRole.OTHER, False)))
                fresh += 1
            per_utterance.append(entries)
        docs.append(_make_discourse(f"narrative-{d:03d}#0", per_utterance))
    return docs


def lag2_corpus(
    n_docs: int = 24, n_utterances: int = 12, seed: int = 23
) -> list[Discourse]:
    """Documents whose strong entity surfaces only at every other utterance.

    Odd utterances carry entity 1 as a subject, even ones carry entity 2 in a
    weak slot; a quarter of the utterances also repeat the previous main
    entity so that adjacency-only scoring is not fully blind.
    """
    docs = []
    for d in range(n_docs):
        rng = _doc_rng(seed, f"lag2:{d}")
        fresh = 1000
        per_utterance: list[list[tuple[int, RoleLabel]]] = []
        for i in range(n_utterances):
            entries: list[tuple[int, RoleLabel]] = []
            main = 1 if i % 2 == 0 else 2
            if main == 1:
                entries.append((1, RoleLabel(GrammaticalRole.SUBJECT, rng.random() < 0.3)))
            else:
                entries.append((2, RoleLabel(GrammaticalRole.OTHER, False)))
            if i >= 1 and rng.random() < 0.25:
                prev_main = 1 if (i - 1) % 2 == 0 else 2
                entries.append((prev_main, RoleLabel(GrammaticalRole.OTHER, False)))
            if rng.random() < 0.3:
                entries.append((fresh, RoleLabel(GrammaticalRole.OTHER, False)))
                fresh += 1
            per_utterance.append(entries)
        docs.append(_make_discourse(f"lag2-{d:03d}#0", per_utterance))
    return docs


def corrupt_map(discourse: Discourse, noise: float, rng: random.Random) -> MentionMap:
    """Reassign a ``noise`` fraction of mentions to wrong or fresh chains."""
    if not 0.0 <= noise <= 1.0:
        raise ValueError(f"noise must lie in [0, 1], got {noise}")
    assignments = discourse.mention_map.as_dict()
    pool = sorted(set(assignments.values()))
    fresh = (max(pool) + 1 if pool else 1) + 10_000
    for key in sorted(assignments):
        if rng.random() >= noise:
            continue
        current = assignments[key]
        others = [e for e in pool if e != current]
        if others and rng.random() < 0.5:
            assignments[key] = rng.choice(others)
        else:
            assignments[key] = fresh
            fresh += 1
    return MentionMap(assignments)


def corrupt_corpus(
    corpus: Sequence[Discourse], noise: float, seed: int
) -> list[Discourse]:
    """Same discourses with corrupted mention maps."""
    out = []
    for disc in corpus:
        rng = _doc_rng(seed, f"corrupt:{disc.doc_id}:{noise}")
        out.append(
            Discourse(disc.doc_id, disc.utterances, corrupt_map(disc, noise, rng))
        )
    return out


def variant_maps(
    corpus: Sequence[Discourse], noise_levels: Sequence[float], seed: int
) -> list[tuple[dict[str, MentionMap], float]]:
    """Per-document corrupted maps plus their corpus-level coreference F1."""
    variants = []
    for noise in noise_levels:
        maps: dict[str, MentionMap] = {}
        pairs = []
        for disc in corpus:
            rng = _doc_rng(seed, f"variant:{disc.doc_id}:{noise}")
            corrupted = corrupt_map(disc, noise, rng)
            maps[disc.doc_id] = corrupted
            pairs.append((disc.mention_map.chain_sets(), corrupted.chain_sets()))
        variants.append((maps, corpus_conll_f1([
            ([frozenset(c) for c in gold], [frozenset(c) for c in pred])
            for gold, pred in pairs
        ])))
    return variants


def write_minimal(
    corpus: Iterable[Discourse], maps: dict[str, MentionMap] | None = None
) -> str:
    """Serialize synthetic discourses in the 5-column corpus layout."""
    lines: list[str] = []
    for disc in corpus:
        f = disc.mention_map if maps is None else maps[disc.doc_id]
        doc_id, _, part = disc.doc_id.partition("#")
        lines.append(f"#begin document ({doc_id}); part {part or 0}")
        for utterance in disc.utterances:
            by_pos: dict[int, tuple[MentionSpan, RoleLabel]] = {
                m.start: (m, role) for m, role in utterance.mentions
            }
            width = max(by_pos) + 1 if by_pos else 1
            for t in range(width):
                if t in by_pos:
                    span, role = by_pos[t]
                    entity = f.entity_of(span)
                    pos = "PRP" if role.is_pronoun else "NNP"
                    tag = f"{pos}:{_GRAM_HINT[role.grammatical]}"
                    if role.semantic is not None:
                        tag += f":{_SEM_HINT[role.semantic]}"
                    word = "it" if role.is_pronoun else f"E{span.chain_id}"
                    coref = f"({entity})" if entity is not None else "-"
                else:
                    word, tag, coref = "w", "XX", "-"
                marker = "S" if t == 0 else "-"
                lines.append(f"{doc_id} {marker} {word} {tag} {coref}")
            lines.append("")
        lines.append("#end document")
    return "\n".join(lines) + "\n"
