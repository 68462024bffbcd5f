"""Tokenized-sentence data model and corpus I/O.

Everything downstream operates on whitespace-free token sequences. Two
ingestion paths are supported: plain parallel text (one pre-tokenized
sentence per line in a source file and a reference file) and the M2
annotation format (``S``/``A`` line blocks). Output is a fixed JSONL
schema shared by all modules; see :data:`JSONL_SCHEMA_DOC`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class DataError(ValueError):
    """Fatal problem in user-supplied data (maps to CLI exit code 2)."""


JSONL_SCHEMA_DOC = """\
JSONL record schema (one JSON object per line, keys in this order):

  {"origin_id": int, "turn": int, "strategy": str,
   "src": [str], "tgt": [str], "labels": [str], "mask": [0|1]}

labels[i] is one of "$KEEP", "$DELETE", "$APPEND_<t>", "$REPLACE_<t>"
with the token substituted verbatim, and len(labels) == len(mask) ==
len(src). When an insertion is anchored before the first source token,
the record carries an extra leading element in "labels" and "mask"
(so both have length len(src) + 1) and the flag "sentinel": true is
appended as the final key.\
"""


@dataclass(frozen=True)
class Sentence:
    """An ordered sequence of non-empty, whitespace-free tokens."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        for i, tok in enumerate(self.tokens):
            if not tok:
                raise DataError(f"empty token at position {i}")
            if any(ch.isspace() for ch in tok):
                raise DataError(f"token at position {i} contains whitespace: {tok!r}")

    @classmethod
    def from_text(cls, text: str) -> "Sentence":
        """Split ``text`` on runs of whitespace. Empty text gives an empty sentence."""
        return cls(tuple(text.split()))

    def text(self) -> str:
        return " ".join(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, idx):
        return self.tokens[idx]


def sentence(text: str) -> Sentence:
    """Shorthand constructor used pervasively in tests."""
    return Sentence.from_text(text)


@dataclass(frozen=True)
class ParallelInstance:
    """A (source, reference) sentence pair with its 0-based corpus index."""

    id: int
    source: Sentence
    reference: Sentence

    def __post_init__(self) -> None:
        if self.id < 0:
            raise DataError(f"instance id must be non-negative, got {self.id}")


@dataclass(frozen=True)
class M2Annotation:
    """One correction span: replace tokens in [start, end) by ``correction``.

    ``start == end`` encodes an insertion; an empty correction with
    ``end > start`` encodes a deletion.
    """

    start: int
    end: int
    error_type: str
    correction: tuple[str, ...]
    annotator: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise DataError(f"invalid span [{self.start},{self.end})")


@dataclass(frozen=True)
class M2Entry:
    source: Sentence
    annotations: tuple[M2Annotation, ...]

    def by_annotator(self, annotator: int) -> tuple[M2Annotation, ...]:
        return tuple(a for a in self.annotations if a.annotator == annotator)

    def annotator_ids(self) -> tuple[int, ...]:
        return tuple(sorted({a.annotator for a in self.annotations}))


@dataclass(frozen=True)
class M2Document:
    entries: tuple[M2Entry, ...] = field(default_factory=tuple)


def read_sentences(path: str) -> list[Sentence]:
    """Read one whitespace-tokenized sentence per line. Empty lines are legal."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: invalid UTF-8 at byte {exc.start}") from exc
    if raw == "":
        return []
    lines = raw.split("\n")
    if lines and lines[-1] == "":  # trailing newline
        lines.pop()
    return [Sentence.from_text(line) for line in lines]


def read_parallel(source_path: str, reference_path: str) -> list[ParallelInstance]:
    """Pair line i of ``source_path`` with line i of ``reference_path``.

    Raises :class:`DataError` when the line counts differ.
    """
    sources = read_sentences(source_path)
    references = read_sentences(reference_path)
    if len(sources) != len(references):
        raise DataError(
            f"line-count mismatch: {source_path} has {len(sources)} lines, "
            f"{reference_path} has {len(references)}"
        )
    return [
        ParallelInstance(id=i, source=src, reference=ref)
        for i, (src, ref) in enumerate(zip(sources, references))
    ]


def write_sentences(sentences: Iterable[Sentence], path: str) -> None:
    """One sentence per line, tokens joined by single spaces, LF endings."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sent in sentences:
            fh.write(sent.text())
            fh.write("\n")


_M2_FIELD_SEP = "|||"


def parse_m2(path: str) -> M2Document:
    """Parse an M2 file into entries of (source, annotations).

    Annotations with error type ``noop`` are dropped and a correction
    field of ``-NONE-`` maps to an empty correction. Malformed A-lines
    and out-of-bounds spans are fatal, reported with their line number.
    """
    entries: list[M2Entry] = []
    current_source: Sentence | None = None
    current_anns: list[M2Annotation] = []
    seen_blank = True

    def flush() -> None:
        nonlocal current_source, current_anns
        if current_source is not None:
            anns = sorted(current_anns, key=lambda a: (a.annotator, a.start, a.end))
            entries.append(M2Entry(source=current_source, annotations=tuple(anns)))
        current_source = None
        current_anns = []

    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.read().split("\n")
    except UnicodeDecodeError as exc:
        raise DataError(f"{path}: invalid UTF-8 at byte {exc.start}") from exc

    for lineno, line in enumerate(raw_lines, start=1):
        stripped = line.rstrip()
        if stripped == "":
            flush()
            seen_blank = True
            continue
        if stripped.startswith("S ") or stripped == "S":
            if current_source is not None and not seen_blank:
                raise DataError(
                    f"{path}:{lineno}: S-line without blank separator from previous block"
                )
            flush()
            current_source = Sentence.from_text(stripped[2:])
            seen_blank = False
        elif stripped.startswith("A "):
            if current_source is None:
                raise DataError(f"{path}:{lineno}: A-line before any S-line")
            current_anns.extend(_parse_a_line(stripped, current_source, path, lineno))
            seen_blank = False
        else:
            raise DataError(f"{path}:{lineno}: unrecognized line {stripped!r}")
    flush()
    return M2Document(entries=tuple(entries))


def _parse_a_line(
    line: str, source: Sentence, path: str, lineno: int
) -> list[M2Annotation]:
    body = line[2:]
    fields = body.split(_M2_FIELD_SEP)
    if len(fields) != 6:
        raise DataError(
            f"{path}:{lineno}: expected 6 '|||'-separated fields, got {len(fields)}"
        )
    span_part, error_type, correction, _required, _comment, annotator_part = fields
    span_tokens = span_part.split()
    if len(span_tokens) != 2:
        raise DataError(f"{path}:{lineno}: span field must be two integers")
    try:
        start, end = int(span_tokens[0]), int(span_tokens[1])
    except ValueError:
        raise DataError(f"{path}:{lineno}: non-integer span offsets") from None
    try:
        annotator = int(annotator_part.strip())
    except ValueError:
        raise DataError(f"{path}:{lineno}: non-integer annotator id") from None
    if error_type == "noop":
        return []
    if start < 0 or end < start or end > len(source):
        raise DataError(
            f"{path}:{lineno}: span [{start},{end}) out of bounds for "
            f"{len(source)}-token sentence"
        )
    corr_tokens: tuple[str, ...]
    if correction == "-NONE-" or correction == "":
        corr_tokens = ()
    else:
        corr_tokens = tuple(correction.split())
    return [
        M2Annotation(
            start=start,
            end=end,
            error_type=error_type,
            correction=corr_tokens,
            annotator=annotator,
        )
    ]


def render_m2(doc: M2Document) -> str:
    """Inverse of :func:`parse_m2` up to annotation ordering."""
    blocks: list[str] = []
    for entry in doc.entries:
        lines = [f"S {entry.source.text()}".rstrip()]
        for a in entry.annotations:
            correction = " ".join(a.correction) if a.correction else "-NONE-"
            lines.append(
                f"A {a.start} {a.end}|||{a.error_type}|||{correction}"
                f"|||REQUIRED|||-NONE-|||{a.annotator}"
            )
        blocks.append("\n".join(lines))
    if not blocks:
        return ""
    return "\n\n".join(blocks) + "\n"


def apply_annotations(
    source: Sentence, annotations: Sequence[M2Annotation], entry_index: int = -1
) -> Sentence:
    """Apply annotations right-to-left so earlier offsets stay valid."""
    ordered = sorted(annotations, key=lambda a: (a.start, a.end))
    for prev, nxt in zip(ordered, ordered[1:]):
        # Two insertions at the same point, or a span starting inside the
        # previous span, cannot be applied unambiguously.
        if nxt.start < prev.end or (prev.start == prev.end == nxt.start == nxt.end):
            raise DataError(
                f"overlapping annotations at entry {entry_index}: "
                f"[{prev.start},{prev.end}) and [{nxt.start},{nxt.end})"
            )
    tokens = list(source.tokens)
    for a in reversed(ordered):
        if a.end > len(source):
            raise DataError(
                f"annotation span [{a.start},{a.end}) out of bounds at entry {entry_index}"
            )
        tokens[a.start : a.end] = list(a.correction)
    return Sentence(tuple(tokens))


def m2_to_parallel(doc: M2Document, annotator: int = 0) -> list[ParallelInstance]:
    """Build (source, reference) pairs using one annotator's corrections.

    Entries that carry no annotation from the chosen annotator use the
    source itself as the reference.
    """
    instances = []
    for i, entry in enumerate(doc.entries):
        anns = entry.by_annotator(annotator)
        reference = apply_annotations(entry.source, anns, entry_index=i) if anns else entry.source
        instances.append(ParallelInstance(id=i, source=entry.source, reference=reference))
    return instances


def write_jsonl(records: Iterable, path: str) -> None:
    """Write records as JSONL, one object per line, byte-stable.

    Accepts plain dicts or objects exposing ``to_record()``. Key order
    is preserved as given; callers are responsible for schema order.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            obj = rec.to_record() if hasattr(rec, "to_record") else rec
            fh.write(json.dumps(obj, ensure_ascii=False))
            fh.write("\n")


def read_jsonl(path: str) -> list[dict]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from exc
    return out
