"""Shared fixtures and discourse builders for the test suite."""

from pathlib import Path

import pytest

from centering_kit.conll import MentionSpan, read_conll
from centering_kit.core import Discourse, MentionMap, Utterance
from centering_kit.roles import GrammaticalRole, RoleLabel

FIXTURES = Path(__file__).parent / "fixtures"


def discourse_of(doc_id, *utterances):
    """Build a discourse from per-utterance (entity, role) pair lists.

    Mentions are laid out left to right, one token each, so position ties
    never occur unless constructed explicitly elsewhere.
    """
    assignments = {}
    built = []
    for ordinal, entries in enumerate(utterances):
        mentions = []
        for position, (entity, role) in enumerate(entries):
            span = MentionSpan(ordinal, position, position, entity)
            mentions.append((span, role))
            assignments[span.key] = entity
        built.append(
            Utterance(ordinal=ordinal, sentence_index=ordinal, mentions=tuple(mentions))
        )
    return Discourse(doc_id, tuple(built), MentionMap(assignments))


def subj(entity, pronoun=False):
    return (entity, RoleLabel(GrammaticalRole.SUBJECT, pronoun))


def obj(entity, pronoun=False):
    return (entity, RoleLabel(GrammaticalRole.OBJECT, pronoun))


def other(entity, pronoun=False):
    return (entity, RoleLabel(GrammaticalRole.OTHER, pronoun))


@pytest.fixture(scope="session")
def john_mike_doc():
    return read_conll(str(FIXTURES / "john_mike.conll"))[0]


@pytest.fixture(scope="session")
def john_mike_srl_doc():
    return read_conll(str(FIXTURES / "john_mike_srl.conll"))[0]
