"""Coreference scoring and statistics, checked against brute-force routes."""

import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centering_kit.evalstats import (
    AnalysisReport,
    CorefCounts,
    analyze,
    b_cubed,
    b_cubed_counts,
    ceaf_phi4,
    ceaf_phi4_counts,
    conll_f1,
    corpus_conll_f1,
    corpus_coref_counts,
    default_nbins,
    equal_frequency_bins,
    fisher_z,
    fisher_z_compare,
    mutual_information,
    muc,
    muc_counts,
    pearson,
    phi4,
    t_test_p,
    validate_chain_set,
)

F = frozenset


def _ratio(num, den):
    return num / den if den else 0.0


def _prf(pn, pd, rn, rd):
    p, r = _ratio(pn, pd), _ratio(rn, rd)
    return p, r, _ratio(2 * p * r, p + r)


# ------------------------------------------------- brute-force references

def brute_muc(gold, pred):
    """Spanning-link counts via per-chain piece counting with list scans."""

    def half(key, response):
        num = den = 0
        for chain in key:
            den += len(chain) - 1
            pieces = set()
            for m in chain:
                homes = [i for i, r in enumerate(response) if m in r]
                pieces.add(homes[0] if homes else ("twinless", m))
            num += len(chain) - len(pieces)
        return num, den

    rn, rd = half(gold, pred)
    pn, pd = half(pred, gold)
    return _prf(pn, pd, rn, rd)


def brute_b3(gold, pred):
    """Per-mention overlap ratios written as a flat double loop."""

    def half(key, response):
        num, den = 0.0, 0
        for chain in key:
            for m in chain:
                den += 1
                for r in response:
                    if m in r:
                        num += len(chain & r) / len(chain)
                        break
        return num, den

    rn, rd = half(gold, pred)
    pn, pd = half(pred, gold)
    return _prf(pn, pd, rn, rd)


def brute_ceaf4(gold, pred):
    """Best injective alignment by exhaustive enumeration."""
    if not gold or not pred:
        return _prf(0.0, len(pred), 0.0, len(gold))
    small, large = (gold, pred) if len(gold) <= len(pred) else (pred, gold)
    best = max(
        sum(phi4(a, large[j]) for a, j in zip(small, picked))
        for picked in itertools.permutations(range(len(large)), len(small))
    )
    return _prf(best, len(pred), best, len(gold))


# ------------------------------------------------------------ hand oracles

ABC_GOLD = [F("abc")]
ABC_PRED = [F("ab"), F("c")]


def test_muc_split_chain():
    p, r, f1 = muc(ABC_GOLD, ABC_PRED)
    assert (p, r) == (1.0, 0.5)
    assert f1 == pytest.approx(2 / 3)


def test_b_cubed_split_chain():
    p, r, f1 = b_cubed(ABC_GOLD, ABC_PRED)
    assert p == 1.0
    assert r == pytest.approx(5 / 9)
    assert f1 == pytest.approx(5 / 7)


def test_ceaf_phi4_split_chain():
    p, r, f1 = ceaf_phi4(ABC_GOLD, ABC_PRED)
    assert r == pytest.approx(0.8)
    assert p == pytest.approx(0.4)
    assert f1 == pytest.approx(8 / 15)


def test_conll_f1_split_chain():
    assert conll_f1(ABC_GOLD, ABC_PRED) == pytest.approx((2 / 3 + 5 / 7 + 8 / 15) / 3)


def test_perfect_and_disjoint():
    chains = [F("ab"), F("cde")]
    assert muc(chains, chains) == (1.0, 1.0, 1.0)
    assert b_cubed(chains, chains) == (1.0, 1.0, 1.0)
    assert ceaf_phi4(chains, chains) == (1.0, 1.0, 1.0)
    assert conll_f1(chains, chains) == 1.0

    other = [F("xy"), F("zw")]
    assert muc(chains, other)[2] == 0.0
    assert b_cubed(chains, other)[2] == 0.0
    assert ceaf_phi4(chains, other)[2] == 0.0


def test_degenerate_denominators_score_zero():
    # singleton-only chain sets have no links for the link-based scorer
    assert muc([F("a")], [F("a")]) == (0.0, 0.0, 0.0)
    assert ceaf_phi4([], [F("a")]) == (0.0, 0.0, 0.0)
    assert b_cubed([], []) == (0.0, 0.0, 0.0)


def test_validate_chain_set():
    validate_chain_set([F("ab"), F("c")])
    with pytest.raises(ValueError, match="empty chain"):
        validate_chain_set([F("ab"), F()])
    with pytest.raises(ValueError, match="appears in two chains"):
        validate_chain_set([F("ab"), F("bc")])


def test_counts_expose_symmetry():
    gold = [F("abc"), F("de")]
    pred = [F("ab"), F("ce"), F("d")]
    for counts_of in (muc_counts, b_cubed_counts, ceaf_phi4_counts):
        fwd = counts_of(gold, pred)
        rev = counts_of(pred, gold)
        assert (fwd.p_num, fwd.p_den) == (rev.r_num, rev.r_den)
        assert (fwd.r_num, fwd.r_den) == (rev.p_num, rev.p_den)


def test_corpus_scores_accumulate_counts_not_ratios():
    perfect = ([F("ab")], [F("ab")])
    shattered = ([F("cd")], [F("c"), F("d")])
    pairs = [perfect, shattered]

    totals = corpus_coref_counts(pairs)
    assert totals["muc"].prf == pytest.approx((1.0, 0.5, 2 / 3))
    assert totals["b3"].prf == pytest.approx((1.0, 0.75, 6 / 7))
    assert totals["ceaf4"].prf == pytest.approx((5 / 9, 5 / 6, 2 / 3))

    corpus = corpus_conll_f1(pairs)
    assert corpus == pytest.approx(46 / 63)
    doc_mean = (conll_f1(*perfect) + conll_f1(*shattered)) / 2
    assert doc_mean == pytest.approx(37 / 54)
    assert abs(corpus - doc_mean) > 0.04


def test_coref_counts_add():
    acc = CorefCounts()
    acc.add(CorefCounts(1, 2, 3, 4))
    acc.add(CorefCounts(1, 0, 1, 0))
    assert (acc.p_num, acc.p_den, acc.r_num, acc.r_den) == (2, 2, 4, 4)
    assert acc.prf == (1.0, 1.0, 1.0)


# ------------------------------------------------------ randomized duals

@st.composite
def chain_pairs(draw, max_mentions=8, max_chains=4):
    n = draw(st.integers(1, max_mentions))
    gold_labels = draw(st.lists(st.integers(0, max_chains - 1), min_size=n, max_size=n))
    pred_labels = draw(st.lists(st.integers(0, max_chains - 1), min_size=n, max_size=n))
    keep = draw(st.lists(st.booleans(), min_size=n, max_size=n))

    def partition(labels, members):
        cells = {}
        for m in members:
            cells.setdefault(labels[m], set()).add(m)
        return [F(cell) for cell in cells.values()]

    gold = partition(gold_labels, range(n))
    pred = partition(pred_labels, [m for m in range(n) if keep[m]])
    return gold, pred


@settings(max_examples=300, deadline=None)
@given(pair=chain_pairs())
def test_scorers_match_brute_force(pair):
    gold, pred = pair
    assert muc(gold, pred) == pytest.approx(brute_muc(gold, pred), abs=1e-9)
    assert b_cubed(gold, pred) == pytest.approx(brute_b3(gold, pred), abs=1e-9)
    assert ceaf_phi4(gold, pred) == pytest.approx(brute_ceaf4(gold, pred), abs=1e-9)


def test_ceaf_alignment_on_seeded_random_sets():
    rng = random.Random(17)
    for _ in range(60):
        mentions = list(range(rng.randint(2, 8)))
        gold = [F(c) for c in _random_partition(rng, mentions, 4)]
        pred = [F(c) for c in _random_partition(rng, mentions, 4)]
        assert ceaf_phi4(gold, pred) == pytest.approx(brute_ceaf4(gold, pred), abs=1e-12)


def _random_partition(rng, mentions, max_cells):
    cells = {}
    for m in mentions:
        cells.setdefault(rng.randrange(max_cells), set()).add(m)
    return cells.values()


# -------------------------------------------------------------- pearson

def test_pearson_oracles():
    assert pearson((1.0, 2.0, 3.0), (2.0, 4.0, 6.0)) == 1.0
    assert pearson((1.0, 2.0, 3.0), (-2.0, -4.0, -6.0)) == -1.0
    assert pearson((1.0, 2.0, 3.0, 4.0), (1.0, 3.0, 2.0, 4.0)) == pytest.approx(0.8)


def test_pearson_input_errors():
    with pytest.raises(ValueError, match="lengths differ"):
        pearson((1.0, 2.0), (1.0, 2.0, 3.0))
    with pytest.raises(ValueError, match="at least 3"):
        pearson((1.0, 2.0), (3.0, 4.0))
    with pytest.raises(ValueError, match="first series is constant"):
        pearson((5.0, 5.0, 5.0), (1.0, 2.0, 3.0))
    with pytest.raises(ValueError, match="second series is constant"):
        pearson((1.0, 2.0, 3.0), (7.0, 7.0, 7.0))


@st.composite
def paired_series(draw):
    n = draw(st.integers(3, 12))
    ints = st.lists(st.integers(-50, 50), min_size=n, max_size=n)
    return draw(ints), draw(ints)


@settings(max_examples=200, deadline=None)
@given(pair=paired_series())
def test_pearson_matches_numpy(pair):
    xs, ys = pair
    if min(xs) == max(xs) or min(ys) == max(ys):
        return
    expected = float(np.corrcoef(xs, ys)[0, 1])
    assert pearson(xs, ys) == pytest.approx(expected, abs=1e-10)


# --------------------------------------------------------- significance

def _student_upper_tail(t, df):
    """P(T > t) for t >= 0 by Simpson quadrature of the t density."""
    const = math.exp(
        math.lgamma((df + 1) / 2.0) - math.lgamma(df / 2.0)
    ) / math.sqrt(df * math.pi)

    def density(x):
        return const * (1.0 + x * x / df) ** (-(df + 1) / 2.0)

    steps = 20_000
    h = t / steps
    acc = density(0.0) + density(t)
    for i in range(1, steps):
        acc += density(i * h) * (4 if i % 2 else 2)
    return 0.5 - acc * h / 3.0


def test_t_test_extremes():
    assert t_test_p(1.0, 10) == 0.0
    assert t_test_p(-1.0, 10) == 0.0
    assert t_test_p(0.0, 10) == 1.0


def test_t_test_errors():
    with pytest.raises(ValueError, match="n >= 3"):
        t_test_p(0.5, 2)
    with pytest.raises(ValueError, match="out of range"):
        t_test_p(1.5, 10)


def test_t_test_against_quadrature():
    for r, n in ((0.5, 10), (0.8, 4), (-0.3, 20), (0.95, 30), (0.1, 5)):
        t = abs(r) * math.sqrt((n - 2) / (1.0 - r * r))
        expected = 2.0 * _student_upper_tail(t, n - 2)
        assert t_test_p(r, n) == pytest.approx(expected, abs=1e-6)


def test_t_test_sign_symmetric_and_monotone():
    assert t_test_p(0.6, 12) == t_test_p(-0.6, 12)
    ps = [t_test_p(r, 12) for r in (0.0, 0.2, 0.4, 0.6, 0.8, 0.99)]
    assert ps == sorted(ps, reverse=True)


def test_fisher_z_oracle():
    # (atanh .9 - atanh .5) / sqrt(1/100 + 1/100)
    z = fisher_z(0.9, 103, 0.5, 103)
    assert z == pytest.approx(6.525982848732463, abs=1e-9)
    assert fisher_z_compare(0.9, 103, 0.5, 103) == pytest.approx(6.7557e-11, rel=1e-3)
    assert fisher_z(0.5, 103, 0.9, 103) == pytest.approx(-z)
    assert fisher_z_compare(0.4, 50, 0.4, 80) == pytest.approx(1.0)


def test_fisher_z_sample_size_floor():
    with pytest.raises(ValueError, match="exceed 3"):
        fisher_z(0.5, 3, 0.5, 100)
    with pytest.raises(ValueError, match="exceed 3"):
        fisher_z_compare(0.5, 100, 0.5, 3)


# -------------------------------------------------- mutual information

def test_mi_dependent_fixture():
    xs = [0.0] * 4 + [1.0] * 4
    ys = [10.0, 10.0, 10.0, 20.0, 10.0, 20.0, 20.0, 20.0]
    # joint counts [[3, 1], [1, 3]] over 8 points
    assert mutual_information(xs, ys, nbins=2) == pytest.approx(
        0.130812035941137, abs=1e-12
    )


def test_mi_independent_fixture():
    xs = [0.0] * 4 + [1.0] * 4
    ys = [10.0, 20.0, 10.0, 20.0, 20.0, 10.0, 20.0, 10.0]
    assert mutual_information(xs, ys, nbins=2) == pytest.approx(0.0, abs=1e-12)


def test_mi_self_is_log_nbins():
    xs = [float(v) for v in range(16)]
    assert mutual_information(xs, xs, nbins=2) == pytest.approx(math.log(2), abs=1e-9)
    assert mutual_information(xs, xs, nbins=4) == pytest.approx(math.log(4), abs=1e-9)


def test_mi_input_errors():
    with pytest.raises(ValueError, match="at least 4"):
        mutual_information([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="at least 2 bins"):
        mutual_information([1.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0], nbins=1)


@settings(max_examples=200, deadline=None)
@given(pair=paired_series())
def test_mi_nonnegative_and_monotone_invariant(pair):
    xs, ys = pair
    if len(xs) < 4:
        return
    value = mutual_information(xs, ys)
    assert value >= -1e-12
    stretched = [2.0 * x + 1.0 for x in xs]
    cubed = [y ** 3 for y in ys]
    assert mutual_information(stretched, cubed) == value


def test_equal_frequency_bins_blocks():
    got = equal_frequency_bins([5.0, 1.0, 5.0, 1.0, 5.0], 2)
    assert got.tolist() == [1, 0, 1, 0, 1]
    both = equal_frequency_bins([3.0, 1.0, 2.0, 4.0], 2)
    assert both.tolist() == [1, 0, 0, 1]


@settings(max_examples=150, deadline=None)
@given(
    values=st.lists(st.integers(-30, 30), min_size=2, max_size=40),
    nbins=st.integers(2, 6),
)
def test_equal_frequency_bins_balance(values, nbins):
    if nbins > len(values):
        return
    assignment = equal_frequency_bins([float(v) for v in values], nbins)
    counts = np.bincount(assignment, minlength=nbins)
    assert counts.max() - counts.min() <= 1
    assert counts.sum() == len(values)


def test_default_nbins_is_ceiled_cube_root():
    assert [default_nbins(n) for n in (2, 4, 8, 9, 27, 30, 64, 1000)] == [
        2, 2, 2, 3, 3, 4, 4, 10,
    ]


# -------------------------------------------------------------- analyze

def test_analyze_report():
    xs = (1.0, 2.0, 3.0, 4.0)
    ys = (1.0, 3.0, 2.0, 4.0)
    report = analyze(xs, ys)
    assert report.n == 4
    assert report.nbins == default_nbins(4)
    assert report.pearson_r == pytest.approx(0.8)
    assert report.p_value == pytest.approx(t_test_p(0.8, 4))
    assert report.mi == pytest.approx(mutual_information(xs, ys, report.nbins))
    assert AnalysisReport.from_json(report.to_json()) == report

    wide = analyze(xs, ys, nbins=4)
    assert wide.nbins == 4
