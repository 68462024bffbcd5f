"""Editing-action labels over source tokens.

A label sequence assigns one action to every source token — keep it,
delete it, replace it by a token, or append a token after it — plus a
leading sentinel slot that anchors insertions before the first token.
A single labeling pass can only express the first token of a multi-token
insertion; :func:`iterate_derive` resolves the rest by relabeling the
partially corrected sentence, mirroring how tagging models are applied
over several inference iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .align import DELETE, EQUAL, INSERT, REPLACE, EditScript, align
from .textcore import DataError, Sentence

KEEP = "keep"
# label kinds reuse the op-kind strings where they coincide; the insert
# op surfaces as an "append" label anchored on the preceding token
APPEND = "append"

LABEL_KEEP = "$KEEP"
LABEL_DELETE = "$DELETE"
LABEL_APPEND_PREFIX = "$APPEND_"
LABEL_REPLACE_PREFIX = "$REPLACE_"


@dataclass(frozen=True)
class EditLabel:
    """One of Keep | Delete | Append(t) | Replace(t)."""

    kind: str
    token: str | None = None

    def __post_init__(self) -> None:
        if self.kind in (KEEP, DELETE):
            if self.token is not None:
                raise ValueError(f"{self.kind} label carries no token")
        elif self.kind in (APPEND, REPLACE):
            if not self.token:
                raise ValueError(f"{self.kind} label needs a non-empty token")
        else:
            raise ValueError(f"unknown label kind {self.kind!r}")

    def render(self) -> str:
        if self.kind == KEEP:
            return LABEL_KEEP
        if self.kind == DELETE:
            return LABEL_DELETE
        if self.kind == APPEND:
            return LABEL_APPEND_PREFIX + self.token
        return LABEL_REPLACE_PREFIX + self.token


KEEP_LABEL = EditLabel(KEEP)
DELETE_LABEL = EditLabel(DELETE)


def parse_label(text: str) -> EditLabel:
    if text == LABEL_KEEP:
        return KEEP_LABEL
    if text == LABEL_DELETE:
        return DELETE_LABEL
    if text.startswith(LABEL_APPEND_PREFIX):
        return EditLabel(APPEND, text[len(LABEL_APPEND_PREFIX):])
    if text.startswith(LABEL_REPLACE_PREFIX):
        return EditLabel(REPLACE, text[len(LABEL_REPLACE_PREFIX):])
    raise DataError(f"unparseable label {text!r}")


@dataclass(frozen=True)
class LabelSequence:
    """Per-token labels plus a sentinel slot for leading insertions.

    ``labels[i]`` acts on source token i. ``sentinel`` only ever holds
    Keep or Append.
    """

    labels: tuple[EditLabel, ...]
    sentinel: EditLabel = KEEP_LABEL

    def __post_init__(self) -> None:
        if self.sentinel.kind not in (KEEP, APPEND):
            raise ValueError("sentinel slot only holds Keep or Append")

    def __len__(self) -> int:
        return len(self.labels)

    def with_sentinel_slot(self) -> tuple[EditLabel, ...]:
        return (self.sentinel,) + self.labels

    def render(self, include_sentinel: bool = False) -> list[str]:
        rendered = [lab.render() for lab in self.labels]
        if include_sentinel or self.sentinel.kind != KEEP:
            rendered.insert(0, self.sentinel.render())
        return rendered

    @property
    def has_visible_sentinel(self) -> bool:
        return self.sentinel.kind != KEEP


@dataclass(frozen=True)
class GedLabelSequence:
    """Binary error-detection flags: 1 wherever the label is not Keep."""

    labels: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.labels)


def labels_from_script(script: EditScript) -> LabelSequence:
    """Single-pass labels for an edit script.

    Equal→Keep, Replace(w)→Replace(w), Delete→Delete; an insert run
    anchored after position i contributes Append(first run token) at i,
    or at the sentinel slot for anchor -1. Remaining run tokens are left
    for later iterations. Should a position carry both a replace/delete
    and an append anchor (not produced by this package's aligner, but
    legal in hand-built scripts), the replace/delete wins and the append
    is deferred too.
    """
    n = script.src_len
    slots: list[EditLabel | None] = [None] * n
    sentinel = KEEP_LABEL
    for op in script.ops:
        if op.kind == EQUAL:
            if slots[op.src_pos] is None:
                slots[op.src_pos] = KEEP_LABEL
        elif op.kind == REPLACE:
            slots[op.src_pos] = EditLabel(REPLACE, op.new_tokens[0])
        elif op.kind == DELETE:
            slots[op.src_pos] = DELETE_LABEL
        else:  # insert run
            head = EditLabel(APPEND, op.new_tokens[0])
            if op.src_pos == -1:
                sentinel = head
            elif slots[op.src_pos] in (None, KEEP_LABEL):
                slots[op.src_pos] = head
            # else: anchor already consumed by replace/delete; defer
    filled = tuple(KEEP_LABEL if lab is None else lab for lab in slots)
    return LabelSequence(labels=filled, sentinel=sentinel)


def derive_labels(source: Sentence, target: Sentence) -> LabelSequence:
    """Labels turning ``source`` toward ``target`` in one pass."""
    return labels_from_script(align(source, target))


def apply_labels(source: Sentence, labels: LabelSequence) -> Sentence:
    """Execute labels left to right."""
    if len(labels) != len(source):
        raise DataError(
            f"label sequence length {len(labels)} != sentence length {len(source)}"
        )
    out: list[str] = []
    if labels.sentinel.kind == APPEND:
        out.append(labels.sentinel.token)
    for tok, lab in zip(source.tokens, labels.labels):
        if lab.kind == KEEP:
            out.append(tok)
        elif lab.kind == DELETE:
            continue
        elif lab.kind == REPLACE:
            out.append(lab.token)
        else:  # append
            out.append(tok)
            out.append(lab.token)
    return Sentence(tuple(out))


def iterate_derive(
    source: Sentence, target: Sentence, max_iters: int = 5
) -> tuple[Sentence, int]:
    """Relabel-and-apply until ``target`` is reached or ``max_iters`` spent.

    Returns the final sentence and the number of passes performed (at
    least 1, even for an already-correct source). Non-convergence shows
    up as ``final != target``.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    current = source
    iterations = 0
    while iterations < max_iters:
        current = apply_labels(current, derive_labels(current, target))
        iterations += 1
        if current.tokens == target.tokens:
            break
    return current, iterations


def ged_labels(labels: LabelSequence) -> GedLabelSequence:
    """Binary flags over the N source positions; the sentinel is excluded."""
    return GedLabelSequence(
        labels=tuple(0 if lab.kind == KEEP else 1 for lab in labels.labels)
    )
