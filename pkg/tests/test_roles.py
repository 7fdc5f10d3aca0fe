"""Role derivation tests: constituency reconstruction, argument spans, hints."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centering_kit.conll import MentionSpan, SrlSpan, Token, make_document, parse_conll
from centering_kit.roles import (
    GrammaticalRole,
    RoleLabel,
    SemanticRole,
    build_sentence_tree,
    grammatical_role,
    role_labels,
    semantic_role,
)


def sentence_doc(words_pos_bits, mentions=(), srl=()):
    tokens = [
        Token(index=i, surface=w, pos=p, parse_bit=b)
        for i, (w, p, b) in enumerate(words_pos_bits)
    ]
    return make_document("t", 0, [tokens], mentions, srl)


# ------------------------------------------------------------- grammatical

def test_worked_example_grammatical_roles(john_mike_doc):
    labels = role_labels(john_mike_doc)
    expected = {
        (0, 0, 0): (GrammaticalRole.SUBJECT, False),   # John
        (0, 7, 7): (GrammaticalRole.OBJECT, False),    # trouble
        (0, 9, 9): (GrammaticalRole.OBJECT, True),     # his, inside the object NP
        (0, 10, 10): (GrammaticalRole.OBJECT, False),  # vacation
        (1, 0, 0): (GrammaticalRole.SUBJECT, True),    # He
        (1, 7, 7): (GrammaticalRole.OBJECT, True),     # his
        (1, 8, 8): (GrammaticalRole.OBJECT, False),    # responsibilities
        (2, 0, 0): (GrammaticalRole.SUBJECT, True),
        (2, 3, 3): (GrammaticalRole.OBJECT, False),    # Mike
        (2, 9, 9): (GrammaticalRole.OBJECT, False),    # plan
        (3, 0, 0): (GrammaticalRole.SUBJECT, False),   # Mike
        (3, 3, 3): (GrammaticalRole.OBJECT, False),    # John
        (4, 0, 0): (GrammaticalRole.SUBJECT, True),
        (4, 2, 2): (GrammaticalRole.OBJECT, False),    # John
    }
    got = {key: (label.grammatical, label.is_pronoun) for key, label in labels.items()}
    assert got == expected
    assert all(label.semantic is None for label in labels.values())


def test_prepositional_object_counts_as_object():
    doc = sentence_doc(
        [
            ("Sam", "NNP", "(TOP(S(NP*)"),
            ("sat", "VBD", "(VP*"),
            ("on", "IN", "(PP*"),
            ("Lee", "NNP", "(NP*)))))"),
        ],
        [MentionSpan(0, 3, 3, 1)],
    )
    assert grammatical_role(doc, doc.mentions[0]).grammatical is GrammaticalRole.OBJECT


def test_subject_inside_embedded_clause():
    doc = sentence_doc(
        [
            ("Sam", "NNP", "(TOP(S(NP*)"),
            ("said", "VBD", "(VP*"),
            ("that", "IN", "(SBAR*"),
            ("Lee", "NNP", "(S(NP*)"),
            ("left", "VBD", "(VP*))))))"),
        ],
        [MentionSpan(0, 3, 3, 1)],
    )
    assert grammatical_role(doc, doc.mentions[0]).grammatical is GrammaticalRole.SUBJECT


def test_bare_np_fragment_is_other():
    doc = sentence_doc(
        [("The", "DT", "(TOP(NP*"), ("dog", "NN", "*))")],
        [MentionSpan(0, 0, 1, 1)],
    )
    assert grammatical_role(doc, doc.mentions[0]).grammatical is GrammaticalRole.OTHER


def test_postposed_np_without_later_vp_is_other():
    doc = sentence_doc(
        [
            ("said", "VBD", "(TOP(SINV(VP*)"),
            ("Lee", "NNP", "(NP*)))"),
        ],
        [MentionSpan(0, 1, 1, 1)],
    )
    # the VP is a sibling, not an ancestor, and there is no VP to the right
    assert grammatical_role(doc, doc.mentions[0]).grammatical is GrammaticalRole.OTHER


def test_np_in_vp_with_no_verb_to_its_left_is_other():
    doc = sentence_doc(
        [
            ("quickly", "RB", "(TOP(S(VP(ADVP*)"),
            ("Lee", "NNP", "(NP*)"),
            ("ran", "VBD", "*)))"),
        ],
        [MentionSpan(0, 1, 1, 1)],
    )
    assert grammatical_role(doc, doc.mentions[0]).grammatical is GrammaticalRole.OTHER


def test_degenerate_parse_bits_fall_back_to_other():
    flat = sentence_doc(
        [("a", "NN", "*"), ("b", "NN", "*")],
        [MentionSpan(0, 0, 0, 1)],
    )
    assert grammatical_role(flat, flat.mentions[0]).grammatical is GrammaticalRole.OTHER

    unbalanced = sentence_doc(
        [("a", "NN", "(TOP(NP*"), ("b", "NN", "*")],
        [MentionSpan(0, 0, 0, 1)],
    )
    assert build_sentence_tree(unbalanced.sentences[0]) is None
    assert grammatical_role(unbalanced, unbalanced.mentions[0]).grammatical is GrammaticalRole.OTHER


def test_tree_rejects_extra_closes():
    tokens = (Token(index=0, surface="a", pos="NN", parse_bit="*)"),)
    assert build_sentence_tree(tokens) is None


@settings(max_examples=150, deadline=None)
@given(bits=st.lists(
    st.text(alphabet="()*NPVS", min_size=1, max_size=8), min_size=1, max_size=5,
))
def test_arbitrary_parse_bits_never_crash_role_lookup(bits):
    doc = sentence_doc(
        [(f"w{i}", "NN", bit) for i, bit in enumerate(bits)],
        [MentionSpan(0, 0, 0, 1)],
    )
    label = grammatical_role(doc, doc.mentions[0])
    assert isinstance(label.grammatical, GrammaticalRole)


def test_head_is_last_token_of_span():
    doc = sentence_doc(
        [
            ("the", "DT", "(TOP(S(NP*"),
            ("boy", "NN", "*)"),
            ("ran", "VBD", "(VP*)))"),
        ],
        [MentionSpan(0, 0, 1, 1)],
    )
    label = grammatical_role(doc, doc.mentions[0])
    assert label.grammatical is GrammaticalRole.SUBJECT
    assert not label.is_pronoun


def test_pronoun_detection_covers_all_four_tags():
    for pos, expected in [("PRP", True), ("PRP$", True), ("WP", True),
                          ("WP$", True), ("NN", False), ("NNP", False)]:
        doc = sentence_doc([("w", pos, "*")], [MentionSpan(0, 0, 0, 1)])
        assert grammatical_role(doc, doc.mentions[0]).is_pronoun is expected


def test_mention_outside_sentence_raises():
    doc = sentence_doc([("a", "NN", "*")])
    with pytest.raises(ValueError, match="outside sentence"):
        grammatical_role(doc, MentionSpan(0, 0, 5, 1))
    with pytest.raises(ValueError, match="outside document"):
        grammatical_role(doc, MentionSpan(3, 0, 0, 1))


# ---------------------------------------------------------------- semantic

def test_worked_example_semantic_roles(john_mike_srl_doc):
    labels = role_labels(john_mike_srl_doc)
    agents = {(0, 0, 0), (1, 0, 0), (2, 0, 0), (3, 0, 0), (4, 0, 0)}
    for key, label in labels.items():
        if key in agents:
            assert label.semantic is SemanticRole.AGENT
        else:
            assert label.semantic is SemanticRole.PATIENT


def test_plain_fixture_has_no_semantic_roles(john_mike_doc):
    for m in john_mike_doc.mentions:
        assert semantic_role(john_mike_doc, m) is None


def test_exact_argument_match_beats_covering_span():
    doc = sentence_doc(
        [("a", "NN", "*"), ("b", "NN", "*"), ("c", "NN", "*")],
        [MentionSpan(0, 1, 1, 1)],
        [SrlSpan(0, 0, "ARG0", 0, 2), SrlSpan(0, 0, "ARG1", 1, 1)],
    )
    assert semantic_role(doc, doc.mentions[0]) is SemanticRole.PATIENT


def test_smallest_covering_span_wins():
    doc = sentence_doc(
        [("a", "NN", "*"), ("b", "NN", "*"), ("c", "NN", "*")],
        [MentionSpan(0, 1, 2, 1)],
        [SrlSpan(0, 0, "ARG0", 0, 2), SrlSpan(0, 0, "ARG1", 1, 2)],
    )
    assert semantic_role(doc, doc.mentions[0]) is SemanticRole.PATIENT


def test_agent_outranks_patient_on_equal_size():
    doc = sentence_doc(
        [("a", "NN", "*")],
        [MentionSpan(0, 0, 0, 1)],
        [SrlSpan(0, 0, "ARG1", 0, 0), SrlSpan(0, 1, "ARG0", 0, 0)],
    )
    assert semantic_role(doc, doc.mentions[0]) is SemanticRole.AGENT


def test_modifier_label_maps_to_other():
    doc = sentence_doc(
        [("now", "RB", "*")],
        [MentionSpan(0, 0, 0, 1)],
        [SrlSpan(0, 0, "ARGM-TMP", 0, 0)],
    )
    assert semantic_role(doc, doc.mentions[0]) is SemanticRole.OTHER


def test_verb_spans_never_carry_a_role():
    doc = sentence_doc(
        [("runs", "VBZ", "*")],
        [MentionSpan(0, 0, 0, 1)],
        [SrlSpan(0, 0, "V", 0, 0), SrlSpan(0, 0, "C-V", 0, 0)],
    )
    assert semantic_role(doc, doc.mentions[0]) is None


def test_uncovered_mention_has_no_semantic_role():
    doc = sentence_doc(
        [("a", "NN", "*"), ("b", "NN", "*")],
        [MentionSpan(0, 1, 1, 1)],
        [SrlSpan(0, 0, "ARG0", 0, 0)],
    )
    assert semantic_role(doc, doc.mentions[0]) is None


# ------------------------------------------------------------------- hints

HINTED = """\
#begin document (h); part 0
h S Maria NNP:subj:agent (0)
h - greeted VBD -
h - Lee NNP:obj:patient (1)

h S She PRP:subj (0)
h - smiled VBD -

#end document
"""


def test_role_hints_drive_both_role_kinds():
    doc = parse_conll(HINTED.splitlines())[0]
    labels = role_labels(doc)
    assert labels[(0, 0, 0)] == RoleLabel(GrammaticalRole.SUBJECT, False, SemanticRole.AGENT)
    assert labels[(0, 2, 2)] == RoleLabel(GrammaticalRole.OBJECT, False, SemanticRole.PATIENT)
    assert labels[(1, 0, 0)] == RoleLabel(GrammaticalRole.SUBJECT, True, None)


def test_hint_beats_absent_tree():
    # the flat default parse bit would classify as Other without the hint
    bare = sentence_doc([("Maria", "NNP", "*")], [MentionSpan(0, 0, 0, 1)])
    assert grammatical_role(bare, bare.mentions[0]).grammatical is GrammaticalRole.OTHER
    doc = parse_conll(HINTED.splitlines())[0]
    assert role_labels(doc)[(0, 0, 0)].grammatical is GrammaticalRole.SUBJECT
