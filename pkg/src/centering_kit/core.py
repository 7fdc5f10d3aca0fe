"""Center tracking over a discourse.

Every utterance yields a frame holding its weighted forward centers (one
entry per entity realized there), the preferred center (highest-weighted
entity), the backward center (highest-weighted entity of the *previous*
utterance that is realized again), and a transition label relating the frame
to its predecessor.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .conll import Document, MentionSpan
from .roles import GrammaticalRole, RoleLabel, SemanticRole, role_labels

SpanKey = tuple[int, int, int]


class UtteranceUnit(Enum):
    SENTENCE = "sentence"


class CfCandidate(Enum):
    CLUSTER_ONLY = "cluster_only"
    INCLUDE_SINGLETON = "include_singleton"


class Weighting(Enum):
    GRAMMATICAL_ROLE = "grammatical_role"
    SEMANTIC_ROLE = "semantic_role"


class Aggregator(Enum):
    MAX = "max"
    SUM = "sum"


class Transition(Enum):
    INITIAL = "initial"
    CONTINUE = "continue"
    RETAIN = "retain"
    SMOOTH_SHIFT = "smooth_shift"
    ROUGH_SHIFT = "rough_shift"
    NOCB = "nocb"


@dataclass(frozen=True)
class InstantiationConfig:
    """Knobs fixing one instantiation of the center-tracking model."""

    utterance_unit: UtteranceUnit = UtteranceUnit.SENTENCE
    skip_null_utterances: bool = True
    cf_candidate: CfCandidate = CfCandidate.CLUSTER_ONLY
    weighting: Weighting = Weighting.GRAMMATICAL_ROLE
    aggregator: Aggregator = Aggregator.MAX
    rng_seed: int = 42

    def to_json(self) -> dict:
        return {
            "utterance_unit": self.utterance_unit.value,
            "skip_null_utterances": self.skip_null_utterances,
            "cf_candidate": self.cf_candidate.value,
            "weighting": self.weighting.value,
            "aggregator": self.aggregator.value,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "InstantiationConfig":
        known = {
            "utterance_unit",
            "skip_null_utterances",
            "cf_candidate",
            "weighting",
            "aggregator",
            "rng_seed",
        }
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        base = cls()
        return cls(
            utterance_unit=UtteranceUnit(data.get("utterance_unit", base.utterance_unit.value)),
            skip_null_utterances=bool(
                data.get("skip_null_utterances", base.skip_null_utterances)
            ),
            cf_candidate=CfCandidate(data.get("cf_candidate", base.cf_candidate.value)),
            weighting=Weighting(data.get("weighting", base.weighting.value)),
            aggregator=Aggregator(data.get("aggregator", base.aggregator.value)),
            rng_seed=int(data.get("rng_seed", base.rng_seed)),
        )


@dataclass(frozen=True)
class Utterance:
    """One utterance: ordered (mention, role) pairs from a single sentence."""

    ordinal: int
    sentence_index: int
    mentions: tuple[tuple[MentionSpan, RoleLabel], ...]


class MentionMap:
    """The mention-to-entity assignment for one document.

    Spans missing from the assignment denote mentions that resolve to no
    entity and drop out of every forward-center set. Chain sizes are counted
    document-wide over this assignment, not over the spans' stored chain ids.
    """

    def __init__(self, assignments: Mapping[SpanKey, int]):
        self._map = dict(assignments)
        self._sizes = Counter(self._map.values())

    @classmethod
    def from_document(cls, document: Document) -> "MentionMap":
        return cls({m.key: m.chain_id for m in document.mentions})

    def entity_of(self, mention: MentionSpan) -> int | None:
        return self._map.get(mention.key)

    def size_of(self, entity: int) -> int:
        return self._sizes.get(entity, 0)

    def entities(self) -> set[int]:
        return set(self._sizes)

    def as_dict(self) -> dict[SpanKey, int]:
        return dict(self._map)

    def chain_sets(self) -> list[set[SpanKey]]:
        chains: dict[int, set[SpanKey]] = {}
        for key, entity in self._map.items():
            chains.setdefault(entity, set()).add(key)
        return [chains[e] for e in sorted(chains)]


@dataclass(frozen=True)
class Discourse:
    doc_id: str
    utterances: tuple[Utterance, ...]
    mention_map: MentionMap


@dataclass(frozen=True)
class CenteringFrame:
    """Computed centers for one utterance.

    ``linked`` marks frames that take part in the transition chain; null
    utterances under skip-null mode emit unlinked frames that metrics ignore.
    """

    ordinal: int
    cf: dict[int, float]
    cp: int | None
    cb: int | None
    transition: Transition
    linked: bool = True


_GRAM_RANK = {GrammaticalRole.SUBJECT: 3, GrammaticalRole.OBJECT: 2, GrammaticalRole.OTHER: 1}
_SEM_RANK = {SemanticRole.AGENT: 3, SemanticRole.PATIENT: 2, SemanticRole.OTHER: 1}


def mention_weight(role: RoleLabel, weighting: Weighting) -> int:
    """Rank weight of one mention: pronouns boost Subject/Agent and Object/Patient."""
    if weighting is Weighting.GRAMMATICAL_ROLE:
        base = _GRAM_RANK[role.grammatical]
    else:
        sem = role.semantic if role.semantic is not None else SemanticRole.OTHER
        base = _SEM_RANK[sem]
    if role.is_pronoun and base > 1:
        return base + 2
    return base


def _entity_mentions(
    utterance: Utterance, f: MentionMap
) -> dict[int, list[tuple[MentionSpan, RoleLabel]]]:
    grouped: dict[int, list[tuple[MentionSpan, RoleLabel]]] = {}
    for mention, role in utterance.mentions:
        entity = f.entity_of(mention)
        if entity is not None:
            grouped.setdefault(entity, []).append((mention, role))
    return grouped


def entity_weight(
    utterance: Utterance,
    entity: int,
    f: MentionMap,
    weighting: Weighting,
    aggregator: Aggregator,
) -> float:
    """Aggregate mention weights of one entity inside one utterance."""
    weights = [
        mention_weight(role, weighting)
        for mention, role in utterance.mentions
        if f.entity_of(mention) == entity
    ]
    if not weights:
        raise ValueError(f"entity {entity} not realized in utterance {utterance.ordinal}")
    return float(max(weights) if aggregator is Aggregator.MAX else sum(weights))


def forward_centers(
    utterance: Utterance, f: MentionMap, config: InstantiationConfig
) -> dict[int, float]:
    """Weighted entity map of one utterance, after candidate filtering."""
    cf: dict[int, float] = {}
    for entity, pairs in _entity_mentions(utterance, f).items():
        if config.cf_candidate is CfCandidate.CLUSTER_ONLY and f.size_of(entity) <= 1:
            continue
        weights = [mention_weight(role, config.weighting) for _, role in pairs]
        cf[entity] = float(
            max(weights) if config.aggregator is Aggregator.MAX else sum(weights)
        )
    return cf


def _first_positions(utterance: Utterance, f: MentionMap) -> dict[int, int]:
    pos: dict[int, int] = {}
    for mention, _ in utterance.mentions:
        entity = f.entity_of(mention)
        if entity is not None and entity not in pos:
            pos[entity] = mention.start
    return pos


def preferred_center(
    cf: Mapping[int, float], utterance: Utterance, f: MentionMap
) -> int | None:
    """Highest-weighted entity; ties fall to the earliest-mentioned, then smallest id."""
    if not cf:
        return None
    pos = _first_positions(utterance, f)
    return min(cf, key=lambda e: (-cf[e], pos.get(e, float("inf")), e))


def backward_center(
    prev_cf: Mapping[int, float],
    cur_cf: Mapping[int, float],
    prev_utterance: Utterance | None = None,
    f: MentionMap | None = None,
) -> int | None:
    """Strongest previous-utterance entity realized again in the current one.

    The argmax uses the previous utterance's weights; ties fall to the entity
    mentioned earliest in the previous utterance, then to the smaller id.
    """
    shared = set(prev_cf) & set(cur_cf)
    if not shared:
        return None
    if prev_utterance is not None and f is not None:
        pos = _first_positions(prev_utterance, f)
    else:
        pos = {}
    return min(shared, key=lambda e: (-prev_cf[e], pos.get(e, float("inf")), e))


def _classify(prev_cb: int | None, cb: int | None, cp: int | None) -> Transition:
    if cb is None:
        return Transition.NOCB
    if cb == prev_cb or prev_cb is None:
        return Transition.CONTINUE if cb == cp else Transition.RETAIN
    return Transition.SMOOTH_SHIFT if cb == cp else Transition.ROUGH_SHIFT


def classify_transition(prev_frame: CenteringFrame | None, cur_frame: CenteringFrame) -> Transition:
    """Transition label of ``cur_frame`` given its linkage predecessor."""
    if prev_frame is None:
        return Transition.INITIAL
    return _classify(prev_frame.cb, cur_frame.cb, cur_frame.cp)


def build_utterances(document: Document, config: InstantiationConfig) -> tuple[Utterance, ...]:
    """One utterance per sentence, mentions ordered by span position."""
    if config.utterance_unit is not UtteranceUnit.SENTENCE:
        raise ValueError(f"unsupported utterance unit {config.utterance_unit}")
    labels = role_labels(document)
    per_sentence: dict[int, list[tuple[MentionSpan, RoleLabel]]] = {
        i: [] for i in range(len(document.sentences))
    }
    for m in document.mentions:
        per_sentence[m.sentence].append((m, labels[m.key]))
    return tuple(
        Utterance(
            ordinal=i,
            sentence_index=i,
            mentions=tuple(sorted(per_sentence[i], key=lambda p: (p[0].start, p[0].end))),
        )
        for i in range(len(document.sentences))
    )


def discourse_from_document(document: Document, config: InstantiationConfig) -> Discourse:
    return Discourse(
        doc_id=document.key,
        utterances=build_utterances(document, config),
        mention_map=MentionMap.from_document(document),
    )


def run_centering(
    utterances: Sequence[Utterance],
    f: MentionMap,
    config: InstantiationConfig,
) -> list[CenteringFrame]:
    """Compute one frame per utterance, linking frames in list order.

    Under skip-null mode, utterances with an empty forward-center set emit
    unlinked frames labeled Nocb and the transition chain passes over them;
    otherwise every frame participates. The first linked frame is Initial and
    carries no backward center.
    """
    frames: list[CenteringFrame] = []
    prev: CenteringFrame | None = None
    prev_utterance: Utterance | None = None
    for ordinal, utterance in enumerate(utterances):
        cf = forward_centers(utterance, f, config)
        if not cf and config.skip_null_utterances:
            frames.append(
                CenteringFrame(ordinal, cf, None, None, Transition.NOCB, linked=False)
            )
            continue
        cp = preferred_center(cf, utterance, f)
        if prev is None:
            frame = CenteringFrame(ordinal, cf, cp, None, Transition.INITIAL)
        else:
            cb = backward_center(prev.cf, cf, prev_utterance, f)
            frame = CenteringFrame(ordinal, cf, cp, cb, _classify(prev.cb, cb, cp))
        frames.append(frame)
        prev = frame
        prev_utterance = utterance
    return frames
