"""CoNLL-2012 ingestion and the immutable document model.

Two row layouts are accepted:

* the full CoNLL-2012 skeleton (12+ whitespace-separated columns, coreference
  in the last column, one argument column per predicate), and
* a minimal 5-column fixture layout ``doc-id  marker  word  tag  coref`` where
  ``marker`` is ``S`` on the first token of a sentence and ``-`` elsewhere,
  and ``tag`` is a POS tag optionally suffixed with role hints, e.g.
  ``PRP:subj`` or ``NN:obj:patient``.

Documents are delimited by ``#begin document (id); part N`` / ``#end document``
lines; blank lines separate sentences in both layouts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator

PRONOUN_TAGS = frozenset({"PRP", "PRP$", "WP", "WP$"})

_BEGIN_RE = re.compile(r"#begin document \((?P<doc>[^)]*)\)(?:;\s*part\s*(?P<part>\d+))?")
_OPEN_RE = re.compile(r"^\((\d+)$")
_CLOSE_RE = re.compile(r"^(\d+)\)$")
_UNIT_RE = re.compile(r"^\((\d+)\)$")
_SRL_BIT_RE = re.compile(r"^((?:\([A-Za-z0-9$-]+)*)\*(\)*)$")

_GRAM_HINTS = ("subj", "obj", "other")
_SEM_HINTS = ("agent", "patient", "other")


class ConllParseError(ValueError):
    """Malformed corpus input; carries file path and line number."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


@dataclass(frozen=True)
class Token:
    """One corpus token; ``srl_args`` holds (predicate token index, label) pairs."""

    index: int
    surface: str
    pos: str
    parse_bit: str = "*"
    speaker: str = ""
    srl_args: tuple[tuple[int, str], ...] = ()
    role_hint: tuple[str, str | None] | None = None


@dataclass(frozen=True, order=True)
class MentionSpan:
    """Token span ``[start, end]`` (inclusive) inside one sentence."""

    sentence: int
    start: int
    end: int
    chain_id: int

    @property
    def key(self) -> tuple[int, int, int]:
        return (self.sentence, self.start, self.end)


@dataclass(frozen=True)
class SrlSpan:
    sentence: int
    predicate: int
    label: str
    start: int
    end: int


@dataclass(frozen=True)
class Document:
    """A parsed document; treated as immutable after construction."""

    doc_id: str
    part: int
    sentences: tuple[tuple[Token, ...], ...]
    mentions: tuple[MentionSpan, ...]
    chains: dict[int, tuple[MentionSpan, ...]]
    srl_spans: tuple[SrlSpan, ...] = ()

    @property
    def key(self) -> str:
        return f"{self.doc_id}#{self.part}"

    def has_srl(self) -> bool:
        if self.srl_spans:
            return True
        return any(
            tok.role_hint is not None and tok.role_hint[1] is not None
            for sent in self.sentences
            for tok in sent
        )


def _build_chains(mentions: Iterable[MentionSpan]) -> dict[int, tuple[MentionSpan, ...]]:
    grouped: dict[int, list[MentionSpan]] = {}
    for m in sorted(mentions):
        grouped.setdefault(m.chain_id, []).append(m)
    return {cid: tuple(ms) for cid, ms in sorted(grouped.items())}


def make_document(
    doc_id: str,
    part: int,
    sentences: Iterable[Iterable[Token]],
    mentions: Iterable[MentionSpan],
    srl_spans: Iterable[SrlSpan] = (),
) -> Document:
    """Assemble a Document, deriving the chains map from the mention list."""
    sent_tuple = tuple(tuple(s) for s in sentences)
    ment_tuple = tuple(sorted(set(mentions)))
    by_key: dict[tuple[int, int, int], int] = {}
    for m in ment_tuple:
        prev = by_key.setdefault(m.key, m.chain_id)
        if prev != m.chain_id:
            raise ValueError(
                f"span {m.key} assigned to both chain {prev} and chain {m.chain_id}"
            )
    return Document(
        doc_id=doc_id,
        part=part,
        sentences=sent_tuple,
        mentions=ment_tuple,
        chains=_build_chains(ment_tuple),
        srl_spans=tuple(srl_spans),
    )


def _parse_tag(tag: str, path: str, line: int) -> tuple[str, tuple[str, str | None] | None]:
    """Split a minimal-layout tag into (pos, role hint)."""
    parts = tag.split(":")
    if len(parts) == 1:
        return tag, None
    pos, gram = parts[0], parts[1]
    sem: str | None = None
    if len(parts) == 3:
        sem = parts[2]
    elif len(parts) > 3:
        raise ConllParseError(path, line, f"unparseable tag {tag!r}")
    if gram not in _GRAM_HINTS:
        raise ConllParseError(path, line, f"unknown grammatical hint {gram!r} in {tag!r}")
    if sem is not None and sem not in _SEM_HINTS:
        raise ConllParseError(path, line, f"unknown semantic hint {sem!r} in {tag!r}")
    return pos, (gram, sem)


class _CorefTracker:
    """Bracket bookkeeping for the coreference column, one stack per chain id."""

    def __init__(self, path: str):
        self.path = path
        self.open: dict[int, tuple[int, int, int]] = {}
        self.mentions: list[MentionSpan] = []

    def feed(self, cell: str, sentence: int, token: int, line: int) -> None:
        if cell in ("-", "_", ""):
            return
        for item in cell.split("|"):
            if m := _UNIT_RE.match(item):
                self._add(int(m.group(1)), sentence, token, token, line)
            elif m := _OPEN_RE.match(item):
                cid = int(m.group(1))
                if cid in self.open:
                    raise ConllParseError(
                        self.path, line, f"chain {cid} re-opened while still open"
                    )
                self.open[cid] = (sentence, token, line)
            elif m := _CLOSE_RE.match(item):
                cid = int(m.group(1))
                if cid not in self.open:
                    raise ConllParseError(
                        self.path, line, f"close of chain {cid} without a matching open"
                    )
                osent, ostart, oline = self.open.pop(cid)
                if osent != sentence:
                    raise ConllParseError(
                        self.path,
                        line,
                        f"chain {cid} opened in sentence {osent} closes in sentence "
                        f"{sentence}; spans must stay within one sentence",
                    )
                self._add(cid, sentence, ostart, token, line)
            else:
                raise ConllParseError(self.path, line, f"malformed coreference item {item!r}")

    def _add(self, cid: int, sentence: int, start: int, end: int, line: int) -> None:
        for seen in self.mentions:
            if seen.key == (sentence, start, end) and seen.chain_id != cid:
                raise ConllParseError(
                    self.path,
                    line,
                    f"span {(sentence, start, end)} assigned to chains "
                    f"{seen.chain_id} and {cid}",
                )
        span = MentionSpan(sentence, start, end, cid)
        if span not in self.mentions:
            self.mentions.append(span)

    def finish(self, line: int) -> list[MentionSpan]:
        if self.open:
            cid = sorted(self.open)[0]
            raise ConllParseError(
                self.path, line, f"chain {cid} still open at end of document"
            )
        return self.mentions


def _parse_srl_column(
    rows: list[tuple[int, list[str]]],
    col: int,
    predicate: int,
    sentence: int,
    path: str,
) -> list[SrlSpan]:
    spans: list[SrlSpan] = []
    stack: list[tuple[str, int]] = []
    for tok_idx, (line, cols) in enumerate(rows):
        bit = cols[col]
        m = _SRL_BIT_RE.match(bit)
        if not m:
            raise ConllParseError(path, line, f"malformed argument cell {bit!r}")
        for label in re.findall(r"\(([A-Za-z0-9$-]+)", m.group(1)):
            stack.append((label, tok_idx))
        for _ in m.group(2):
            if not stack:
                raise ConllParseError(path, line, "argument close without open")
            label, start = stack.pop()
            spans.append(SrlSpan(sentence, predicate, label, start, tok_idx))
    if stack:
        last_line = rows[-1][0]
        raise ConllParseError(path, last_line, "argument span still open at sentence end")
    return spans


class _DocBuilder:
    def __init__(self, doc_id: str, part: int, path: str):
        self.doc_id = doc_id
        self.part = part
        self.path = path
        self.layout: int | None = None  # column count class: 5 or >=12
        self.sentences: list[tuple[Token, ...]] = []
        self.pending: list[tuple[int, list[str]]] = []
        self.tracker = _CorefTracker(path)
        self.srl: list[SrlSpan] = []

    def add_row(self, line: int, cols: list[str]) -> None:
        if self.layout is None:
            if len(cols) == 5:
                self.layout = 5
            elif len(cols) >= 12:
                self.layout = 12
            else:
                raise ConllParseError(
                    self.path, line, f"unsupported column count {len(cols)}"
                )
        self.pending.append((line, cols))

    def end_sentence(self) -> None:
        if not self.pending:
            return
        rows = self.pending
        self.pending = []
        width = len(rows[0][1])
        for line, cols in rows:
            if len(cols) != width:
                raise ConllParseError(
                    self.path, line,
                    f"ragged row: {len(cols)} columns where sentence has {width}",
                )
        sent_idx = len(self.sentences)
        if self.layout == 5:
            self.sentences.append(self._minimal_sentence(sent_idx, rows))
        else:
            self.sentences.append(self._full_sentence(sent_idx, rows, width))

    def _minimal_sentence(
        self, sent_idx: int, rows: list[tuple[int, list[str]]]
    ) -> tuple[Token, ...]:
        tokens = []
        for tok_idx, (line, cols) in enumerate(rows):
            _, marker, word, tag, coref = cols
            if tok_idx == 0 and marker != "S":
                raise ConllParseError(
                    self.path, line, f"expected sentence marker 'S', got {marker!r}"
                )
            if tok_idx > 0 and marker == "S":
                raise ConllParseError(
                    self.path, line, "sentence marker 'S' in mid-sentence"
                )
            pos, hint = _parse_tag(tag, self.path, line)
            if not pos:
                raise ConllParseError(self.path, line, "empty POS tag")
            tokens.append(Token(index=tok_idx, surface=word, pos=pos, role_hint=hint))
            self.tracker.feed(coref, sent_idx, tok_idx, line)
        return tuple(tokens)

    def _full_sentence(
        self, sent_idx: int, rows: list[tuple[int, list[str]]], width: int
    ) -> tuple[Token, ...]:
        predicates = [
            tok_idx for tok_idx, (_, cols) in enumerate(rows) if cols[7] != "-"
        ]
        n_arg_cols = width - 12
        if n_arg_cols != len(predicates):
            line = rows[0][0]
            raise ConllParseError(
                self.path, line,
                f"{len(predicates)} predicates but {n_arg_cols} argument columns",
            )
        spans: list[SrlSpan] = []
        for j, pred in enumerate(predicates):
            spans.extend(
                _parse_srl_column(rows, 11 + j, pred, sent_idx, self.path)
            )
        self.srl.extend(spans)

        covering: dict[int, list[tuple[int, str]]] = {}
        for s in spans:
            for t in range(s.start, s.end + 1):
                covering.setdefault(t, []).append((s.predicate, s.label))

        tokens = []
        for tok_idx, (line, cols) in enumerate(rows):
            try:
                stated = int(cols[2])
            except ValueError:
                raise ConllParseError(
                    self.path, line, f"non-integer token index {cols[2]!r}"
                ) from None
            if stated != tok_idx:
                raise ConllParseError(
                    self.path, line, f"token index {stated} out of order (expected {tok_idx})"
                )
            if not cols[4]:
                raise ConllParseError(self.path, line, "empty POS tag")
            tokens.append(
                Token(
                    index=tok_idx,
                    surface=cols[3],
                    pos=cols[4],
                    parse_bit=cols[5],
                    speaker=cols[9],
                    srl_args=tuple(covering.get(tok_idx, ())),
                )
            )
            self.tracker.feed(cols[-1], sent_idx, tok_idx, line)
        return tuple(tokens)

    def finish(self, line: int) -> Document:
        self.end_sentence()
        mentions = self.tracker.finish(line)
        return make_document(
            self.doc_id, self.part, self.sentences, mentions, self.srl
        )


def parse_conll(lines: Iterable[str], path: str = "<stream>") -> list[Document]:
    """Parse one or more documents from an iterable of text lines."""
    docs: list[Document] = []
    builder: _DocBuilder | None = None
    lineno = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if line.startswith("#begin document"):
            if builder is not None:
                raise ConllParseError(path, lineno, "nested #begin document")
            m = _BEGIN_RE.match(line)
            if not m:
                raise ConllParseError(path, lineno, f"malformed header {line!r}")
            builder = _DocBuilder(m.group("doc"), int(m.group("part") or 0), path)
            continue
        if line.startswith("#end document"):
            if builder is None:
                raise ConllParseError(path, lineno, "#end document without #begin")
            docs.append(builder.finish(lineno))
            builder = None
            continue
        if builder is None:
            if line.strip() and not line.startswith("#"):
                raise ConllParseError(path, lineno, "content outside any document")
            continue
        if not line.strip():
            builder.end_sentence()
            continue
        if line.startswith("#"):
            continue
        builder.add_row(lineno, line.split())
    if builder is not None:
        raise ConllParseError(path, lineno, "document not closed by #end document")
    return docs


def read_conll(path: str) -> list[Document]:
    with open(path, encoding="utf8") as handle:
        return parse_conll(handle, path=path)


def format_coref_column(document: Document) -> list[list[str]]:
    """Render the coreference chains back to bracket cells, one per token."""
    opens: dict[tuple[int, int], list[MentionSpan]] = {}
    closes: dict[tuple[int, int], list[MentionSpan]] = {}
    units: dict[tuple[int, int], list[MentionSpan]] = {}
    for m in document.mentions:
        if m.start == m.end:
            units.setdefault((m.sentence, m.start), []).append(m)
        else:
            opens.setdefault((m.sentence, m.start), []).append(m)
            closes.setdefault((m.sentence, m.end), []).append(m)

    cells: list[list[str]] = []
    for s, sent in enumerate(document.sentences):
        row = []
        for t in range(len(sent)):
            items: list[str] = []
            # outermost spans open first; closes go innermost first
            for m in sorted(opens.get((s, t), []), key=lambda m: (-m.end, m.chain_id)):
                items.append(f"({m.chain_id}")
            for m in sorted(units.get((s, t), []), key=lambda m: m.chain_id):
                items.append(f"({m.chain_id})")
            for m in sorted(closes.get((s, t), []), key=lambda m: (-m.start, m.chain_id)):
                items.append(f"{m.chain_id})")
            row.append("|".join(items) if items else "-")
        cells.append(row)
    return cells


def document_to_minimal(document: Document) -> str:
    """Serialize a document in the 5-column layout (round-trip helper)."""
    coref = format_coref_column(document)
    out = [f"#begin document ({document.doc_id}); part {document.part}"]
    for s, sent in enumerate(document.sentences):
        for t, tok in enumerate(sent):
            tag = tok.pos
            if tok.role_hint is not None:
                gram, sem = tok.role_hint
                tag = f"{tok.pos}:{gram}" if sem is None else f"{tok.pos}:{gram}:{sem}"
            marker = "S" if t == 0 else "-"
            out.append(f"{document.doc_id} {marker} {tok.surface} {tag} {coref[s][t]}")
        out.append("")
    out.append("#end document")
    return "\n".join(out) + "\n"
