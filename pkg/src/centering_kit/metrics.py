"""Discourse scorecards and the ordering comparator.

All four rate metrics are satisfaction rates over the T transitions that
follow the initial linked frame, so higher is always better. The transition
profile compares lexicographically: more Continues, then more Retains, then
more Smooth-Shifts, then *fewer* Rough-Shifts.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .core import CenteringFrame, Transition

SCALAR_TOL = 1e-12


class Metric(Enum):
    NOCB = "nocb"
    CHEAP = "cheap"
    COHERENCE = "coherence"
    SALIENCE = "salience"
    KP = "kp"
    TRAN = "tran"


class Comparison(Enum):
    A_BETTER = "a_better"
    EQUAL = "equal"
    B_BETTER = "b_better"


@dataclass(frozen=True)
class Scorecard:
    """Per-discourse summary; ``t`` counts scored transitions."""

    t: int
    not_nocb: float
    cheap: float
    coherence: float
    salience: float
    kp: float
    tran_key: tuple[int, int, int, int]
    nocb_count: int = 0

    @property
    def valid(self) -> bool:
        return self.t >= 1

    def value(self, metric: Metric) -> float:
        return {
            Metric.NOCB: self.not_nocb,
            Metric.CHEAP: self.cheap,
            Metric.COHERENCE: self.coherence,
            Metric.SALIENCE: self.salience,
            Metric.KP: self.kp,
        }[metric]


def compute_scorecard(frames: Sequence[CenteringFrame]) -> Scorecard:
    """Score a frame sequence; with fewer than two linked frames it is invalid."""
    linked = [fr for fr in frames if fr.linked]
    if len(linked) <= 1:
        return Scorecard(0, 0.0, 0.0, 0.0, 0.0, 0.0, (0, 0, 0, 0))
    t = len(linked) - 1
    not_nocb = cheap = coherence = salience = 0
    counts = {
        Transition.CONTINUE: 0,
        Transition.RETAIN: 0,
        Transition.SMOOTH_SHIFT: 0,
        Transition.ROUGH_SHIFT: 0,
        Transition.NOCB: 0,
    }
    for prev, cur in zip(linked, linked[1:]):
        counts[cur.transition] += 1
        if cur.cb is None:
            continue
        not_nocb += 1
        if prev.cb is not None and cur.cb == prev.cb:
            coherence += 1
        if cur.cb == cur.cp:
            salience += 1
        if prev.cp is not None and cur.cb == prev.cp:
            cheap += 1
    rates = (not_nocb / t, cheap / t, coherence / t, salience / t)
    return Scorecard(
        t=t,
        not_nocb=rates[0],
        cheap=rates[1],
        coherence=rates[2],
        salience=rates[3],
        kp=sum(rates),
        tran_key=(
            counts[Transition.CONTINUE],
            counts[Transition.RETAIN],
            counts[Transition.SMOOTH_SHIFT],
            counts[Transition.ROUGH_SHIFT],
        ),
        nocb_count=counts[Transition.NOCB],
    )


def compare_orderings(metric: Metric, a: Scorecard, b: Scorecard) -> Comparison:
    """Rank two orderings of the same discourse under one metric."""
    if a.t != b.t:
        raise ValueError(f"scorecards cover different transition counts: {a.t} != {b.t}")
    if metric is Metric.TRAN:
        # fewer rough shifts win, so flip that component's sign
        key_a = (*a.tran_key[:3], -a.tran_key[3])
        key_b = (*b.tran_key[:3], -b.tran_key[3])
        if key_a == key_b:
            return Comparison.EQUAL
        return Comparison.A_BETTER if key_a > key_b else Comparison.B_BETTER
    va, vb = a.value(metric), b.value(metric)
    if abs(va - vb) <= SCALAR_TOL:
        return Comparison.EQUAL
    return Comparison.A_BETTER if va > vb else Comparison.B_BETTER


def scorecard_csv_row(doc_id: str, card: Scorecard) -> list[str]:
    """CSV cells for one scorecard; rate cells stay empty when t = 0."""
    if not card.valid:
        metrics = [""] * 5
    else:
        metrics = [
            repr(card.not_nocb),
            repr(card.cheap),
            repr(card.coherence),
            repr(card.salience),
            repr(card.kp),
        ]
    return [doc_id, str(card.t), *metrics, *[str(c) for c in card.tran_key]]


SCORECARD_CSV_HEADER = [
    "doc_id",
    "t",
    "not_nocb",
    "cheap",
    "coherence",
    "salience",
    "kp",
    "cont",
    "ret",
    "sshift",
    "rshift",
]
