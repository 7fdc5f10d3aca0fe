"""Grammatical and semantic role derivation for mentions.

Grammatical roles come from the reconstructed constituency bracketing: the
mention's covering NP counts as Subject when it hangs off a clause node with a
VP to its right, as Object when a VP ancestor has a verb to the NP's left, and
as Other everywhere else (including whenever the parse bits are unusable).
Semantic roles come from predicate argument spans: ARG0 maps to Agent, ARG1 to
Patient, any other label to Other; mentions outside every argument span have
no semantic role.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .conll import PRONOUN_TAGS, Document, MentionSpan, Token

CLAUSE_LABELS = frozenset({"S", "SINV", "SQ", "SBAR"})

_PARSE_BIT_RE = re.compile(r"^((?:\([^\s()*]+)*)\*+(\)*)$")


class GrammaticalRole(Enum):
    SUBJECT = "subject"
    OBJECT = "object"
    OTHER = "other"


class SemanticRole(Enum):
    AGENT = "agent"
    PATIENT = "patient"
    OTHER = "other"


@dataclass(frozen=True)
class RoleLabel:
    grammatical: GrammaticalRole
    is_pronoun: bool
    semantic: SemanticRole | None = None


@dataclass
class _Node:
    label: str
    start: int
    end: int = -1
    children: list["_Node"] = field(default_factory=list)
    parent: "_Node | None" = None


def build_sentence_tree(tokens: tuple[Token, ...]) -> _Node | None:
    """Rebuild the constituency tree from per-token parse bits.

    Returns None for degenerate bits (unbalanced or unparseable), in which
    case every mention in the sentence falls back to the Other role.
    """
    root = _Node(label="", start=0)
    node = root
    for i, tok in enumerate(tokens):
        m = _PARSE_BIT_RE.match(tok.parse_bit)
        if not m:
            return None
        for label in re.findall(r"\(([^\s()*]+)", m.group(1)):
            child = _Node(label=label, start=i, parent=node)
            node.children.append(child)
            node = child
        for _ in m.group(2):
            if node is root:
                return None
            node.end = i
            node = node.parent  # type: ignore[assignment]
    if node is not root:
        return None
    root.end = len(tokens) - 1
    return root


def _covering_np(root: _Node, start: int, end: int) -> _Node | None:
    """Smallest NP whose span covers [start, end]; innermost wins on ties."""
    best: _Node | None = None
    stack = [root]
    while stack:
        node = stack.pop()
        stack.extend(node.children)
        if node.label == "NP" and node.start <= start and end <= node.end:
            if best is None or (node.end - node.start) <= (best.end - best.start):
                best = node
    return best


def _is_verb(pos: str) -> bool:
    return pos.startswith("VB") or pos == "MD"


def _grammatical_from_tree(
    tokens: tuple[Token, ...], root: _Node, start: int, end: int
) -> GrammaticalRole:
    np = _covering_np(root, start, end)
    if np is None:
        return GrammaticalRole.OTHER
    parent = np.parent
    if parent is not None and parent.label in CLAUSE_LABELS:
        idx = parent.children.index(np)
        if any(sib.label == "VP" for sib in parent.children[idx + 1 :]):
            return GrammaticalRole.SUBJECT
    node = np.parent
    while node is not None:
        if node.label == "VP":
            if any(_is_verb(tokens[t].pos) for t in range(node.start, np.start)):
                return GrammaticalRole.OBJECT
            return GrammaticalRole.OTHER
        node = node.parent
    return GrammaticalRole.OTHER


def _check_mention(document: Document, mention: MentionSpan) -> tuple[Token, ...]:
    if not 0 <= mention.sentence < len(document.sentences):
        raise ValueError(f"mention sentence {mention.sentence} outside document")
    sent = document.sentences[mention.sentence]
    if not (0 <= mention.start <= mention.end < len(sent)):
        raise ValueError(f"mention span {mention.key} outside sentence")
    return sent


_HINT_GRAM = {
    "subj": GrammaticalRole.SUBJECT,
    "obj": GrammaticalRole.OBJECT,
    "other": GrammaticalRole.OTHER,
}
_HINT_SEM = {
    "agent": SemanticRole.AGENT,
    "patient": SemanticRole.PATIENT,
    "other": SemanticRole.OTHER,
}


def grammatical_role(document: Document, mention: MentionSpan) -> RoleLabel:
    """Grammatical role of a mention; the span's last token is its head."""
    sent = _check_mention(document, mention)
    head = sent[mention.end]
    pronoun = head.pos in PRONOUN_TAGS
    if head.role_hint is not None:
        gram = _HINT_GRAM[head.role_hint[0]]
        return RoleLabel(gram, pronoun, semantic_role(document, mention))
    tree = build_sentence_tree(sent)
    if tree is None:
        gram = GrammaticalRole.OTHER
    else:
        gram = _grammatical_from_tree(sent, tree, mention.start, mention.end)
    return RoleLabel(gram, pronoun, semantic_role(document, mention))


_SEM_BY_LABEL = {"ARG0": SemanticRole.AGENT, "ARG1": SemanticRole.PATIENT}


def semantic_role(document: Document, mention: MentionSpan) -> SemanticRole | None:
    """Semantic role from argument spans, or None when no span covers the mention."""
    sent = _check_mention(document, mention)
    head = sent[mention.end]
    if head.role_hint is not None:
        sem = head.role_hint[1]
        return _HINT_SEM[sem] if sem is not None else None
    spans = [
        s
        for s in document.srl_spans
        if s.sentence == mention.sentence
        and s.label not in ("V", "C-V")
        and s.start <= mention.start
        and mention.end <= s.end
    ]
    if not spans:
        return None
    exact = [s for s in spans if s.start == mention.start and s.end == mention.end]
    if exact:
        candidates = exact
    else:
        smallest = min(s.end - s.start for s in spans)
        candidates = [s for s in spans if s.end - s.start == smallest]
    labels = {s.label for s in candidates}
    if "ARG0" in labels:
        return SemanticRole.AGENT
    if "ARG1" in labels:
        return SemanticRole.PATIENT
    return SemanticRole.OTHER


def role_labels(document: Document) -> dict[tuple[int, int, int], RoleLabel]:
    """Role labels for every mention, building each sentence tree once."""
    trees: dict[int, _Node | None] = {}
    out: dict[tuple[int, int, int], RoleLabel] = {}
    for m in document.mentions:
        sent = _check_mention(document, m)
        head = sent[m.end]
        pronoun = head.pos in PRONOUN_TAGS
        if head.role_hint is not None:
            gram = _HINT_GRAM[head.role_hint[0]]
        else:
            if m.sentence not in trees:
                trees[m.sentence] = build_sentence_tree(sent)
            tree = trees[m.sentence]
            if tree is None:
                gram = GrammaticalRole.OTHER
            else:
                gram = _grammatical_from_tree(sent, tree, m.start, m.end)
        out[m.key] = RoleLabel(gram, pronoun, semantic_role(document, m))
    return out
