"""Coreference scoring and the statistics behind score/quality comparisons.

The three coreference scorers are total: every degenerate denominator yields
0 rather than an error, and the summary score is the unweighted mean of the
three F1s. Corpus-level figures accumulate numerators and denominators over
documents before forming ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import stdtr

Chain = frozenset
ChainSet = Sequence[Chain]


def validate_chain_set(chains: ChainSet) -> None:
    seen: set[Hashable] = set()
    for chain in chains:
        if not chain:
            raise ValueError("empty chain")
        for m in chain:
            if m in seen:
                raise ValueError(f"mention {m!r} appears in two chains")
            seen.add(m)


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


def _prf(pn: float, pd: float, rn: float, rd: float) -> tuple[float, float, float]:
    p = _ratio(pn, pd)
    r = _ratio(rn, rd)
    f1 = _ratio(2 * p * r, p + r)
    return p, r, f1


@dataclass
class CorefCounts:
    """Accumulable precision/recall numerators and denominators."""

    p_num: float = 0.0
    p_den: float = 0.0
    r_num: float = 0.0
    r_den: float = 0.0

    def add(self, other: "CorefCounts") -> None:
        self.p_num += other.p_num
        self.p_den += other.p_den
        self.r_num += other.r_num
        self.r_den += other.r_den

    @property
    def prf(self) -> tuple[float, float, float]:
        return _prf(self.p_num, self.p_den, self.r_num, self.r_den)


def _partition_of(chains: ChainSet) -> dict[Hashable, int]:
    cell = {}
    for i, chain in enumerate(chains):
        for m in chain:
            cell[m] = i
    return cell


def _muc_half(key: ChainSet, response: ChainSet) -> tuple[float, float]:
    """Link-based recall numerator/denominator of ``key`` against ``response``."""
    cell = _partition_of(response)
    num = den = 0
    for chain in key:
        den += len(chain) - 1
        parts = {cell[m] for m in chain if m in cell}
        unaligned = sum(1 for m in chain if m not in cell)
        num += len(chain) - (len(parts) + unaligned)
    return float(num), float(den)


def muc_counts(gold: ChainSet, pred: ChainSet) -> CorefCounts:
    rn, rd = _muc_half(gold, pred)
    pn, pd = _muc_half(pred, gold)
    return CorefCounts(pn, pd, rn, rd)


def muc(gold: ChainSet, pred: ChainSet) -> tuple[float, float, float]:
    """Link-based precision, recall, F1."""
    return muc_counts(gold, pred).prf


def _b3_half(key: ChainSet, response: ChainSet) -> tuple[float, float]:
    """Mention-averaged recall numerator/denominator of ``key``."""
    by_mention = {m: chain for chain in response for m in chain}
    num = 0.0
    den = 0
    for chain in key:
        for m in chain:
            den += 1
            other = by_mention.get(m)
            if other:
                num += len(chain & other) / len(chain)
    return num, float(den)


def b_cubed_counts(gold: ChainSet, pred: ChainSet) -> CorefCounts:
    rn, rd = _b3_half(gold, pred)
    pn, pd = _b3_half(pred, gold)
    return CorefCounts(pn, pd, rn, rd)


def b_cubed(gold: ChainSet, pred: ChainSet) -> tuple[float, float, float]:
    """Mention-averaged precision, recall, F1."""
    return b_cubed_counts(gold, pred).prf


def phi4(key: Chain, response: Chain) -> float:
    return 2.0 * len(key & response) / (len(key) + len(response))


def ceaf_phi4_counts(gold: ChainSet, pred: ChainSet) -> CorefCounts:
    if not gold or not pred:
        return CorefCounts(0.0, float(len(pred)), 0.0, float(len(gold)))
    scores = np.array([[phi4(g, p) for p in pred] for g in gold])
    rows, cols = linear_sum_assignment(-scores)
    total = float(scores[rows, cols].sum())
    return CorefCounts(total, float(len(pred)), total, float(len(gold)))


def ceaf_phi4(gold: ChainSet, pred: ChainSet) -> tuple[float, float, float]:
    """Entity-aligned precision, recall, F1 under the phi4 similarity."""
    return ceaf_phi4_counts(gold, pred).prf


def conll_f1(gold: ChainSet, pred: ChainSet) -> float:
    """Unweighted mean of the MUC, B-cubed and CEAF-phi4 F1s."""
    return (muc(gold, pred)[2] + b_cubed(gold, pred)[2] + ceaf_phi4(gold, pred)[2]) / 3.0


def corpus_coref_counts(
    pairs: Sequence[tuple[ChainSet, ChainSet]]
) -> dict[str, CorefCounts]:
    """Accumulated counts for aligned (gold, pred) document pairs."""
    totals = {"muc": CorefCounts(), "b3": CorefCounts(), "ceaf4": CorefCounts()}
    for gold, pred in pairs:
        totals["muc"].add(muc_counts(gold, pred))
        totals["b3"].add(b_cubed_counts(gold, pred))
        totals["ceaf4"].add(ceaf_phi4_counts(gold, pred))
    return totals


def corpus_conll_f1(pairs: Sequence[tuple[ChainSet, ChainSet]]) -> float:
    totals = corpus_coref_counts(pairs)
    return sum(c.prf[2] for c in totals.values()) / 3.0


def _check_series(xs: Sequence[float], ys: Sequence[float], min_len: int) -> None:
    if len(xs) != len(ys):
        raise ValueError(f"series lengths differ: {len(xs)} != {len(ys)}")
    if len(xs) < min_len:
        raise ValueError(f"need at least {min_len} points, got {len(xs)}")


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample correlation coefficient; constant input is an error."""
    _check_series(xs, ys, 3)
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    for name, arr in (("first", x), ("second", y)):
        if np.all(arr == arr[0]):
            raise ValueError(f"{name} series is constant")
    xc = x - x.mean()
    yc = y - y.mean()
    return float((xc @ yc) / math.sqrt((xc @ xc) * (yc @ yc)))


def t_test_p(r: float, n: int) -> float:
    """Two-tailed p-value for a correlation r under the null, n - 2 df."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    if not -1.0 <= r <= 1.0:
        raise ValueError(f"correlation out of range: {r}")
    if abs(r) == 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return float(2.0 * (1.0 - stdtr(n - 2, abs(t))))


def fisher_z(r1: float, n1: int, r2: float, n2: int) -> float:
    """z statistic for comparing two independent correlations."""
    if n1 <= 3 or n2 <= 3:
        raise ValueError("both samples must exceed 3 points")
    num = math.atanh(r1) - math.atanh(r2)
    return num / math.sqrt(1.0 / (n1 - 3) + 1.0 / (n2 - 3))


def fisher_z_compare(r1: float, n1: int, r2: float, n2: int) -> float:
    """Two-tailed p-value for the difference of two independent correlations."""
    z = fisher_z(r1, n1, r2, n2)
    return float(math.erfc(abs(z) / math.sqrt(2.0)))


def default_nbins(n: int) -> int:
    """Smallest k with k**3 >= n; float cube roots overshoot on perfect cubes."""
    k = math.ceil(n ** (1.0 / 3.0))
    if n > 0 and (k - 1) ** 3 >= n:
        k -= 1
    return k


def equal_frequency_bins(values: Sequence[float], nbins: int) -> np.ndarray:
    """Assign each value a bin so bin occupancies differ by at most one."""
    n = len(values)
    order = np.argsort(np.asarray(values, dtype=float), kind="stable")
    assignment = np.empty(n, dtype=int)
    edges = [(b * n) // nbins for b in range(nbins + 1)]
    for b in range(nbins):
        assignment[order[edges[b] : edges[b + 1]]] = b
    return assignment


def mutual_information(
    xs: Sequence[float], ys: Sequence[float], nbins: int | None = None
) -> float:
    """Plug-in mutual information, in nats, over equal-frequency bins."""
    _check_series(xs, ys, 4)
    n = len(xs)
    if nbins is None:
        nbins = default_nbins(n)
    if nbins < 2:
        raise ValueError(f"need at least 2 bins, got {nbins}")
    bx = equal_frequency_bins(xs, nbins)
    by = equal_frequency_bins(ys, nbins)
    joint = np.zeros((nbins, nbins))
    np.add.at(joint, (bx, by), 1.0)
    joint /= n
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    mi = 0.0
    for i in range(nbins):
        for j in range(nbins):
            pij = joint[i, j]
            if pij > 0.0:
                mi += pij * math.log(pij / (px[i] * py[j]))
    return mi


@dataclass(frozen=True)
class AnalysisReport:
    n: int
    pearson_r: float
    p_value: float
    mi: float
    nbins: int

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "pearson_r": self.pearson_r,
            "p_value": self.p_value,
            "mi": self.mi,
            "nbins": self.nbins,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "AnalysisReport":
        return cls(
            n=int(data["n"]),
            pearson_r=float(data["pearson_r"]),
            p_value=float(data["p_value"]),
            mi=float(data["mi"]),
            nbins=int(data["nbins"]),
        )


def analyze(
    xs: Sequence[float], ys: Sequence[float], nbins: int | None = None
) -> AnalysisReport:
    """Correlation, its p-value, and binned mutual information for two series."""
    r = pearson(xs, ys)
    used_bins = nbins if nbins is not None else default_nbins(len(xs))
    return AnalysisReport(
        n=len(xs),
        pearson_r=r,
        p_value=t_test_p(r, len(xs)),
        mi=mutual_information(xs, ys, used_bins),
        nbins=used_bins,
    )
