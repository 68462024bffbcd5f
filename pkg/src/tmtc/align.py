"""Minimal token-level edit scripts between two sentences.

The aligner is a classic Levenshtein dynamic program with unit costs
(match 0, replace/insert/delete 1 per token) and a fixed backtracking
preference of Equal > Replace > Delete > Insert at every cell, so equal
sentences always produce the same script. Consecutive insertions at one
anchor are coalesced into a single :class:`EditOp` of kind ``insert``
(an "insert run"), which counts as ONE error unit no matter how many
tokens it carries — ratio-based selection downstream counts errors, not
tokens.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

from .textcore import DataError, Sentence

EQUAL = "equal"
REPLACE = "replace"
DELETE = "delete"
INSERT = "insert"


@dataclass(frozen=True)
class EditOp:
    """One aligned operation.

    ``src_pos`` is the source token offset of the op. For an insert run
    it is the offset of the source token the run FOLLOWS, and -1 means
    the run precedes the first token. ``src_token`` is present for
    equal/replace/delete; ``new_tokens`` holds exactly one token for a
    replace and one or more for an insert run.
    """

    kind: str
    src_pos: int
    src_token: str | None = None
    new_tokens: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in (EQUAL, REPLACE, DELETE, INSERT):
            raise ValueError(f"unknown op kind {self.kind!r}")
        if self.kind == INSERT:
            if not self.new_tokens:
                raise ValueError("insert run must carry at least one token")
            if self.src_pos < -1:
                raise ValueError("insert anchor below -1")
        elif self.kind == REPLACE:
            if len(self.new_tokens) != 1:
                raise ValueError("replace must carry exactly one token")
            if self.new_tokens[0] == self.src_token:
                raise ValueError("replace token equals source token")
        elif self.new_tokens:
            raise ValueError(f"{self.kind} op must not carry new tokens")

    @property
    def token_cost(self) -> int:
        if self.kind == EQUAL:
            return 0
        if self.kind == INSERT:
            return len(self.new_tokens)
        return 1


@dataclass(frozen=True)
class EditScript:
    """Ordered ops covering every source position, plus interleaved inserts."""

    ops: tuple[EditOp, ...]
    src_len: int
    tgt_len: int

    @property
    def units(self) -> tuple[EditOp, ...]:
        """The non-Equal ops: one entry per error unit."""
        return tuple(op for op in self.ops if op.kind != EQUAL)

    @property
    def cost(self) -> int:
        """Token-level Levenshtein cost (insert runs cost their length)."""
        return sum(op.token_cost for op in self.ops)


def align(source: Sentence, target: Sentence) -> EditScript:
    """Compute the minimal edit script from ``source`` to ``target``."""
    s, t = source.tokens, target.tokens
    n, m = len(s), len(t)

    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row, prev = dist[i], dist[i - 1]
        si = s[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if si == t[j - 1] else 1)
            row[j] = min(sub, prev[j] + 1, row[j - 1] + 1)

    # Backtrack with the fixed preference order; ops come out reversed.
    rev: list[tuple[str, int, str | None, str | None]] = []
    i, j = n, m
    while i > 0 or j > 0:
        cell = dist[i][j]
        if i > 0 and j > 0 and s[i - 1] == t[j - 1] and cell == dist[i - 1][j - 1]:
            rev.append((EQUAL, i - 1, s[i - 1], None))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and cell == dist[i - 1][j - 1] + 1:
            rev.append((REPLACE, i - 1, s[i - 1], t[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and cell == dist[i - 1][j] + 1:
            rev.append((DELETE, i - 1, s[i - 1], None))
            i = i - 1
        else:
            rev.append((INSERT, i - 1, None, t[j - 1]))
            j = j - 1

    ops: list[EditOp] = []
    pending_run: list[str] = []
    pending_anchor: int | None = None

    def flush_run() -> None:
        nonlocal pending_anchor
        if pending_run:
            ops.append(
                EditOp(kind=INSERT, src_pos=pending_anchor, new_tokens=tuple(pending_run))
            )
            pending_run.clear()
        pending_anchor = None

    for kind, pos, src_tok, new_tok in reversed(rev):
        if kind == INSERT:
            if pending_anchor is None:
                pending_anchor = pos
            pending_run.append(new_tok)
            continue
        flush_run()
        if kind == EQUAL:
            ops.append(EditOp(kind=EQUAL, src_pos=pos, src_token=src_tok))
        elif kind == REPLACE:
            ops.append(EditOp(kind=REPLACE, src_pos=pos, src_token=src_tok, new_tokens=(new_tok,)))
        else:
            ops.append(EditOp(kind=DELETE, src_pos=pos, src_token=src_tok))
    flush_run()

    return EditScript(ops=tuple(ops), src_len=n, tgt_len=m)


def apply_script(source: Sentence, script: EditScript) -> Sentence:
    """Replay ``script`` against ``source``, validating every position."""
    if script.src_len != len(source):
        raise DataError(
            f"script built for {script.src_len}-token source, got {len(source)} tokens"
        )
    out: list[str] = []
    cursor = 0
    for op in script.ops:
        if op.kind == INSERT:
            if op.src_pos != cursor - 1:
                raise DataError(
                    f"insert run anchored at {op.src_pos} but cursor follows token {cursor - 1}"
                )
            out.extend(op.new_tokens)
            continue
        if op.src_pos != cursor:
            raise DataError(f"op at source position {op.src_pos} out of order (expected {cursor})")
        if source.tokens[op.src_pos] != op.src_token:
            raise DataError(
                f"source token mismatch at position {op.src_pos}: "
                f"script expects {op.src_token!r}, sentence has {source.tokens[op.src_pos]!r}"
            )
        if op.kind == EQUAL:
            out.append(op.src_token)
        elif op.kind == REPLACE:
            out.append(op.new_tokens[0])
        cursor += 1
    if cursor != script.src_len:
        raise DataError(f"script covers {cursor} source tokens, expected {script.src_len}")
    return Sentence(tuple(out))


def filter_script(
    script: EditScript, predicate: Callable[[EditOp], bool]
) -> EditScript:
    """Keep only the error units passing ``predicate``.

    Rejected replace/delete units degrade to Equal on the source token;
    rejected insert runs vanish. The result is a valid script from the
    same source to a partially corrected target.
    """
    ops: list[EditOp] = []
    for op in script.ops:
        if op.kind == EQUAL or predicate(op):
            ops.append(op)
        elif op.kind in (REPLACE, DELETE):
            ops.append(EditOp(kind=EQUAL, src_pos=op.src_pos, src_token=op.src_token))
        # rejected insert run: dropped
    tgt_len = sum(
        len(op.new_tokens) if op.kind == INSERT else (0 if op.kind == DELETE else 1)
        for op in ops
    )
    return EditScript(ops=tuple(ops), src_len=script.src_len, tgt_len=tgt_len)


def select_units(script: EditScript, selected: Iterable[EditOp]) -> EditScript:
    """:func:`filter_script` specialized to an explicit unit collection."""
    chosen = set(selected)
    return filter_script(script, lambda op: op in chosen)


_UNIT_KINDS = {INSERT: "append", REPLACE: "replace", DELETE: "delete"}


def unit_kind(op: EditOp) -> str:
    """Label-kind name of an error unit (insert runs surface as appends)."""
    try:
        return _UNIT_KINDS[op.kind]
    except KeyError:
        raise ValueError(f"{op.kind} op is not an error unit") from None
