"""Recency-weighted backward-center tracking.

The candidate set for the backward center is generalized to a weighted entity
set carried across utterances: at each step the previous set is decayed by a
forget function and combined, through a semiring, with the gated weights of
the previous utterance's forward centers. A Zero forget with a membership
gate reproduces plain center tracking exactly; a positive decay keeps
entities reachable across gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Sequence

from .core import (
    CenteringFrame,
    Discourse,
    InstantiationConfig,
    MentionMap,
    Transition,
    Utterance,
    _classify,
    _first_positions,
    forward_centers,
    preferred_center,
)
from .metrics import compute_scorecard
from .evalstats import pearson


@dataclass(frozen=True)
class Semiring:
    name: str
    add: Callable[[float, float], float]
    mul: Callable[[float, float], float]
    zero: float
    one: float


REAL_PLUS_TIMES = Semiring(
    name="real_plus_times",
    add=lambda a, b: a + b,
    mul=lambda a, b: a * b,
    zero=0.0,
    one=1.0,
)

_SEMIRINGS = {REAL_PLUS_TIMES.name: REAL_PLUS_TIMES}


class Gate(Enum):
    ONE = "one"
    MEMBERSHIP_INDICATOR = "membership_indicator"


@dataclass(frozen=True)
class ZeroForget:
    def apply(self, weight: float) -> float:
        return 0.0

    def to_json(self) -> dict:
        return {"kind": "zero"}


@dataclass(frozen=True)
class ExponentialDecay:
    gamma: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"decay rate must lie in [0, 1], got {self.gamma}")

    def apply(self, weight: float) -> float:
        return self.gamma * weight

    def to_json(self) -> dict:
        return {"kind": "exponential_decay", "gamma": self.gamma}


@dataclass(frozen=True)
class AffineForget:
    """Multiplies the old weight by a logistic squash of ``a * weight + b``."""

    a: float
    b: float

    def apply(self, weight: float) -> float:
        return weight / (1.0 + math.exp(-(self.a * weight + self.b)))

    def to_json(self) -> dict:
        return {"kind": "affine", "a": self.a, "b": self.b}


Forget = ZeroForget | ExponentialDecay | AffineForget


def forget_from_json(data: Mapping) -> Forget:
    kind = data.get("kind")
    if kind == "zero":
        return ZeroForget()
    if kind == "exponential_decay":
        return ExponentialDecay(float(data["gamma"]))
    if kind == "affine":
        return AffineForget(float(data["a"]), float(data["b"]))
    raise ValueError(f"unknown forget kind {kind!r}")


@dataclass(frozen=True)
class RecencyConfig:
    forget: Forget = ZeroForget()
    gate: Gate = Gate.MEMBERSHIP_INDICATOR
    semiring: str = REAL_PLUS_TIMES.name

    def __post_init__(self):
        if self.semiring not in _SEMIRINGS:
            raise ValueError(f"unknown semiring {self.semiring!r}")

    @property
    def ring(self) -> Semiring:
        return _SEMIRINGS[self.semiring]

    def is_vanilla(self) -> bool:
        return (
            isinstance(self.forget, ZeroForget)
            and self.gate is Gate.MEMBERSHIP_INDICATOR
        )

    def to_json(self) -> dict:
        return {
            "semiring": self.semiring,
            "forget": self.forget.to_json(),
            "gate": self.gate.value,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "RecencyConfig":
        known = {"semiring", "forget", "gate"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown recency fields: {sorted(unknown)}")
        return cls(
            forget=forget_from_json(data.get("forget", {"kind": "zero"})),
            gate=Gate(data.get("gate", Gate.MEMBERSHIP_INDICATOR.value)),
            semiring=data.get("semiring", REAL_PLUS_TIMES.name),
        )


WeightedCenterSet = dict[int, float]


def update_center_set(
    prev: Mapping[int, float],
    prev_cf: Mapping[int, float],
    cur_cf: Mapping[int, float],
    rc: RecencyConfig,
) -> WeightedCenterSet:
    """One carry-over step of the weighted candidate set.

    Each entity of ``keys(prev) | keys(prev_cf)`` gets
    ``forget(prev[e]) (+) gate(e) (*) prev_cf[e]``, with missing operands
    replaced by the semiring zero. Entities whose weight lands on the zero
    are dropped.
    """
    ring = rc.ring
    out: WeightedCenterSet = {}
    for entity in set(prev) | set(prev_cf):
        carried = ring.zero
        if entity in prev:
            carried = rc.forget.apply(prev[entity])
            if carried < 0:
                raise ValueError(
                    f"forget produced negative weight {carried} for entity {entity}"
                )
        fresh = ring.zero
        if entity in prev_cf:
            if rc.gate is Gate.ONE:
                gate = ring.one
            else:
                gate = ring.one if entity in cur_cf else ring.zero
            fresh = ring.mul(gate, prev_cf[entity])
        weight = ring.add(carried, fresh)
        if weight != ring.zero:
            out[entity] = weight
    return out


def backward_center_recency(center_set: Mapping[int, float]) -> int | None:
    """Highest-weighted entity of the carried set; ties fall to the smaller id."""
    if not center_set:
        return None
    return min(center_set, key=lambda e: (-center_set[e], e))


def run_centering_recency(
    utterances: Sequence[Utterance],
    f: MentionMap,
    config: InstantiationConfig,
    rc: RecencyConfig,
) -> list[CenteringFrame]:
    """Frame computation with the backward center drawn from the carried set.

    Linkage skips null utterances exactly as the plain runner does. Ties in
    the argmax prefer entities mentioned earlier in the previous linked
    utterance, which makes the vanilla configuration reduce to the plain
    backward center even on tied weights. Unlike plain frames, the backward
    center may fall outside the current forward-center set.
    """
    frames: list[CenteringFrame] = []
    prev: CenteringFrame | None = None
    prev_utterance: Utterance | None = None
    center_set: WeightedCenterSet = {}
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
            center_set = update_center_set(center_set, prev.cf, cf, rc)
            if center_set:
                pos = _first_positions(prev_utterance, f) if prev_utterance else {}
                cb = min(
                    center_set,
                    key=lambda e: (-center_set[e], pos.get(e, float("inf")), e),
                )
            else:
                cb = None
            frame = CenteringFrame(ordinal, cf, cp, cb, _classify(prev.cb, cb, cp))
        frames.append(frame)
        prev = frame
        prev_utterance = utterance
    return frames


def mean_kp(
    corpus: Sequence[Discourse],
    maps: Mapping[str, MentionMap] | None,
    config: InstantiationConfig,
    rc: RecencyConfig,
) -> float:
    """Mean scorecard KP over the corpus, with the recency backward center."""
    values = []
    for disc in corpus:
        f = disc.mention_map if maps is None else maps[disc.doc_id]
        card = compute_scorecard(run_centering_recency(disc.utterances, f, config, rc))
        if card.valid:
            values.append(card.kp)
    if not values:
        raise ValueError("no discourse yields a valid scorecard")
    return sum(values) / len(values)


Variant = tuple[Mapping[str, MentionMap], float]

DEFAULT_GAMMA_GRID = tuple(round(0.05 * i, 2) for i in range(21))
DEFAULT_A_GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)
DEFAULT_B_GRID = (-2.0, -1.0, 0.0, 1.0, 2.0)


@dataclass(frozen=True)
class FitPoint:
    forget: Forget
    r: float | None
    kp_series: tuple[float, ...]


@dataclass(frozen=True)
class FitResult:
    best: RecencyConfig
    best_r: float
    baseline_r: float | None
    grid: tuple[FitPoint, ...]
    n_variants: int

    def to_json(self) -> dict:
        return {
            "best": self.best.to_json(),
            "best_r": self.best_r,
            "baseline_r": self.baseline_r,
            "n_variants": self.n_variants,
            "grid": [
                {
                    "forget": p.forget.to_json(),
                    "r": p.r,
                    "kp_series": list(p.kp_series),
                }
                for p in self.grid
            ],
        }


def fit_forget(
    corpus: Sequence[Discourse],
    variants: Sequence[Variant],
    config: InstantiationConfig,
    family: str = "exponential_decay",
    gamma_grid: Sequence[float] = DEFAULT_GAMMA_GRID,
    a_grid: Sequence[float] = DEFAULT_A_GRID,
    b_grid: Sequence[float] = DEFAULT_B_GRID,
    gate: Gate = Gate.ONE,
) -> FitResult:
    """Grid-search a forget function maximizing corr(recency KP, external F1).

    Each variant is a per-document mention map plus its coreference F1; the
    fitted score series is the mean recency KP per variant. Grid points whose
    KP series is constant are skipped.
    """
    if len(variants) < 3:
        raise ValueError(f"need at least 3 variants to fit, got {len(variants)}")
    f1s = [f1 for _, f1 in variants]
    if max(f1s) - min(f1s) == 0:
        raise ValueError("conll_f1 series is constant across variants")

    if family == "exponential_decay":
        candidates: list[Forget] = [ExponentialDecay(g) for g in gamma_grid]
    elif family == "affine":
        candidates = [AffineForget(a, b) for a in a_grid for b in b_grid]
    else:
        raise ValueError(f"unknown forget family {family!r}")

    grid: list[FitPoint] = []
    for forget in candidates:
        rc = RecencyConfig(forget=forget, gate=gate)
        series = tuple(mean_kp(corpus, maps, config, rc) for maps, _ in variants)
        if max(series) - min(series) == 0:
            grid.append(FitPoint(forget, None, series))
            continue
        grid.append(FitPoint(forget, pearson(series, f1s), series))

    scored = [p for p in grid if p.r is not None]
    if not scored:
        raise ValueError("recency KP series is constant at every grid point")
    best_point = max(scored, key=lambda p: p.r)
    baseline_rc = RecencyConfig(forget=ZeroForget(), gate=gate)
    baseline = tuple(mean_kp(corpus, maps, config, baseline_rc) for maps, _ in variants)
    baseline_r = None
    if max(baseline) - min(baseline) > 0:
        baseline_r = pearson(baseline, f1s)
    return FitResult(
        best=RecencyConfig(forget=best_point.forget, gate=gate),
        best_r=best_point.r,
        baseline_r=baseline_r,
        grid=tuple(grid),
        n_variants=len(variants),
    )
