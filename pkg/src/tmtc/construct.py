"""Multi-turn training-instance construction.

Each (erroneous, reference) pair is expanded into a chain of sentences
X_e = X^(0), X^(1), ..., X^(m) = X_c where every step corrects a chosen
subset of the remaining errors. Consecutive chain elements become
training turns; a supervision mask marks the positions whose turn label
already agrees with the label derived against the final reference, so
that positions still carrying uncorrected errors contribute no loss in
early turns. The subset choice is the strategy:

* ``Random(ratio)`` — a seeded uniform sample of the error units.
* ``TypeFirst(kind)`` — all units of one kind are corrected in the
  first hop and everything else in the second (``invert=True`` flips
  this: the featured kind is corrected last).
* ``Ordered(kinds)`` — two or three distinct kinds corrected
  accumulatively, one kind per hop.
* ``KTurn(k)`` — the shuffled units are split into k near-equal groups
  corrected accumulatively.

All randomness flows from a per-instance stream derived by hashing
(seed, origin id), so output is byte-identical regardless of processing
order or worker count.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .align import EditOp, align, apply_script, select_units, unit_kind
from .labels import LabelSequence, derive_labels
from .textcore import DataError, ParallelInstance, Sentence

KINDS = ("append", "delete", "replace")
KIND_ABBREV = {"append": "app", "delete": "del", "replace": "rep"}
ABBREV_KIND = {v: k for k, v in KIND_ABBREV.items()}


def parse_kind(text: str) -> str:
    """Accept full kind names or the app/del/rep abbreviations."""
    norm = text.strip().lower()
    if norm in KINDS:
        return norm
    if norm in ABBREV_KIND:
        return ABBREV_KIND[norm]
    raise DataError(f"unknown label kind {text!r} (expected one of {', '.join(KINDS)})")


@dataclass(frozen=True)
class Random:
    """Correct a seeded uniform sample of round(ratio * #units) units first."""

    ratio: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.ratio <= 1.0:
            raise DataError(f"ratio must lie in [0,1], got {self.ratio}")

    @property
    def tag(self) -> str:
        return f"random:{self.ratio:g}"


@dataclass(frozen=True)
class TypeFirst:
    """Correct all units of ``kind`` in the first hop, the rest in the second.

    With ``invert=True`` the featured kind is instead LEFT UNCORRECTED in
    the intermediate sentence (and thus learned last). The strategy tag is
    the same either way; the run configuration echoed into reports records
    the flag.
    """

    kind: str
    invert: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise DataError(f"unknown kind {self.kind!r}")

    @property
    def tag(self) -> str:
        return f"{self.kind}-first"


@dataclass(frozen=True)
class Ordered:
    """Correct whole kinds accumulatively in the given order."""

    kinds: tuple[str, ...]

    def __post_init__(self) -> None:
        if not 2 <= len(self.kinds) <= 3:
            raise DataError("ordered strategy takes 2 or 3 kinds")
        if len(set(self.kinds)) != len(self.kinds):
            raise DataError("ordered strategy kinds must be distinct")
        for k in self.kinds:
            if k not in KINDS:
                raise DataError(f"unknown kind {k!r}")

    @property
    def tag(self) -> str:
        return "ordered:" + "+".join(KIND_ABBREV[k] for k in self.kinds)


@dataclass(frozen=True)
class KTurn:
    """Split the shuffled units into k near-equal groups, corrected accumulatively."""

    k: int

    def __post_init__(self) -> None:
        if self.k < 2:
            raise DataError(f"k must be >= 2, got {self.k}")

    @property
    def tag(self) -> str:
        return f"kturn:{self.k}"


Strategy = Random | TypeFirst | Ordered | KTurn

ORIGINAL_TAG = "original"


@dataclass(frozen=True)
class TurnInstance:
    """One emitted training record.

    ``mask`` runs over the sentinel slot plus the N source positions, in
    step with ``labels.with_sentinel_slot()``; rendering drops the
    sentinel element unless it is visible (or forced by configuration).
    """

    origin_id: int
    turn: int
    strategy: str
    source: Sentence
    target: Sentence
    labels: LabelSequence
    mask: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.mask) != len(self.labels) + 1:
            raise ValueError(
                f"mask length {len(self.mask)} != sentinel+labels length {len(self.labels) + 1}"
            )

    def to_record(self, force_sentinel: bool = False) -> dict:
        visible = self.labels.has_visible_sentinel or force_sentinel
        rendered_labels = self.labels.render(include_sentinel=force_sentinel)
        rendered_mask = list(self.mask) if visible else list(self.mask[1:])
        record = {
            "origin_id": self.origin_id,
            "turn": self.turn,
            "strategy": self.strategy,
            "src": list(self.source.tokens),
            "tgt": list(self.target.tokens),
            "labels": rendered_labels,
            "mask": rendered_mask,
        }
        if visible:
            record["sentinel"] = True
        return record


def instance_seed(seed: int, origin_id: int) -> int:
    """Stable 64-bit per-instance stream seed, independent of process layout."""
    digest = hashlib.blake2b(f"{seed}:{origin_id}".encode("ascii"), digest_size=8)
    return int.from_bytes(digest.digest(), "big")


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def _dedupe_chain(chain: list[Sentence]) -> list[Sentence]:
    out = [chain[0]]
    for sent in chain[1:]:
        if sent.tokens != out[-1].tokens:
            out.append(sent)
    if len(out) == 1:  # error-free instance: keep the [X_e, X_c] shape
        out.append(chain[-1])
    return out


def build_intermediate(
    inst: ParallelInstance, strategy: Strategy, seed: int
) -> list[Sentence]:
    """The correction chain [X_e, ..., X_c] with degenerate hops removed.

    A result of length 2 means the instance is ineligible for additional
    turns under this strategy (no unit subset produced a genuinely
    intermediate sentence).
    """
    script = align(inst.source, inst.reference)
    units = list(script.units)
    source, reference = inst.source, inst.reference

    def correct(selected: Iterable[EditOp]) -> Sentence:
        return apply_script(source, select_units(script, selected))

    if isinstance(strategy, Random):
        rng = random.Random(instance_seed(seed, inst.id))
        count = _round_half_up(strategy.ratio * len(units))
        picked = rng.sample(range(len(units)), count) if count else []
        chain = [source, correct(units[i] for i in picked), reference]
    elif isinstance(strategy, TypeFirst):
        featured = [op for op in units if unit_kind(op) == strategy.kind]
        others = [op for op in units if unit_kind(op) != strategy.kind]
        first = others if strategy.invert else featured
        chain = [source, correct(first), reference]
    elif isinstance(strategy, Ordered):
        chain = [source]
        cumulative: set[str] = set()
        for kind in strategy.kinds:
            cumulative.add(kind)
            chain.append(correct(op for op in units if unit_kind(op) in cumulative))
        chain.append(reference)
    elif isinstance(strategy, KTurn):
        rng = random.Random(instance_seed(seed, inst.id))
        shuffled = list(units)
        rng.shuffle(shuffled)
        base, rem = divmod(len(shuffled), strategy.k)
        chain = [source]
        taken = 0
        for g in range(strategy.k - 1):
            taken += base + (1 if g < rem else 0)
            chain.append(correct(shuffled[:taken]))
        chain.append(reference)
    else:  # pragma: no cover - exhaustive over Strategy
        raise TypeError(f"unknown strategy {strategy!r}")

    return _dedupe_chain(chain)


def _mask_against_reference(
    turn_labels: LabelSequence, reference_labels: LabelSequence
) -> tuple[int, ...]:
    turn_slots = turn_labels.with_sentinel_slot()
    ref_slots = reference_labels.with_sentinel_slot()
    return tuple(1 if a == b else 0 for a, b in zip(turn_slots, ref_slots))


def _original_instance(inst: ParallelInstance, turn: int) -> TurnInstance:
    labels = derive_labels(inst.source, inst.reference)
    return TurnInstance(
        origin_id=inst.id,
        turn=turn,
        strategy=ORIGINAL_TAG,
        source=inst.source,
        target=inst.reference,
        labels=labels,
        mask=(1,) * (len(labels) + 1),
    )


def emit_turns(
    inst: ParallelInstance, chain: Sequence[Sentence], strategy: Strategy
) -> list[TurnInstance]:
    """Turn a correction chain into TurnInstances.

    Chains of length 2 (no surviving intermediate) yield the single
    original pair tagged ``original`` with turn 0. Longer chains yield
    turn j for hop j; every turn's mask flags the positions whose label
    agrees with the label derived from that turn's source to the final
    reference, which makes the last turn's mask all-ones by construction.
    """
    if len(chain) < 2:
        raise DataError("chain must contain at least [X_e, X_c]")
    if chain[0].tokens != inst.source.tokens:
        raise DataError(f"chain for instance {inst.id} does not start at the source")
    if chain[-1].tokens != inst.reference.tokens:
        raise DataError(f"chain for instance {inst.id} does not end at the reference")

    if len(chain) == 2:
        return [_original_instance(inst, turn=0)]

    out = []
    for j in range(len(chain) - 1):
        src, tgt = chain[j], chain[j + 1]
        turn_labels = derive_labels(src, tgt)
        ref_labels = derive_labels(src, inst.reference)
        out.append(
            TurnInstance(
                origin_id=inst.id,
                turn=j + 1,
                strategy=strategy.tag,
                source=src,
                target=tgt,
                labels=turn_labels,
                mask=_mask_against_reference(turn_labels, ref_labels),
            )
        )
    return out


def instance_records(
    inst: ParallelInstance,
    strategy: Strategy,
    seed: int,
    include_original: bool = True,
) -> list[TurnInstance]:
    """All records for one instance, ordered by turn.

    With ``include_original`` every origin contributes its full pair as a
    final-turn record (turn = chain length for eligible chains, turn 0
    otherwise); without it, only the additional multi-turn instances are
    emitted.
    """
    chain = build_intermediate(inst, strategy, seed)
    turns = emit_turns(inst, chain, strategy)
    if len(chain) == 2:
        return turns if include_original else []
    if include_original:
        turns.append(_original_instance(inst, turn=len(chain)))
    return turns


def construct_corpus(
    instances: Iterable[ParallelInstance],
    strategy: Strategy,
    seed: int,
    include_original: bool = True,
) -> Iterator[TurnInstance]:
    """Expand a corpus; output is ordered by (origin_id, turn)."""
    for inst in sorted(instances, key=lambda x: x.id):
        yield from instance_records(inst, strategy, seed, include_original)


LABEL_FAMILIES = ("$KEEP", "$DELETE", "$APPEND", "$REPLACE")


def _label_family(label: str) -> str:
    for family in LABEL_FAMILIES:
        if label == family or label.startswith(family + "_"):
            return family
    raise DataError(f"unrecognized label {label!r}")


def corpus_stats(records: Iterable[dict]) -> dict:
    """Exact counts over emitted records.

    ``additional_instances`` counts chain pairs (records not tagged
    ``original``); ``eligible_origins`` counts origins contributing at
    least one such record — both views of corpus growth are reported
    because either may be the quantity of interest.
    """
    total = 0
    originals = 0
    per_strategy: dict[str, int] = {}
    per_turn: dict[str, int] = {}
    label_freq = {family: 0 for family in LABEL_FAMILIES}
    mask_entries = 0
    mask_zeros = 0
    origins: set[int] = set()
    eligible: set[int] = set()

    for rec in records:
        total += 1
        origins.add(rec["origin_id"])
        tag = rec["strategy"]
        per_strategy[tag] = per_strategy.get(tag, 0) + 1
        per_turn[str(rec["turn"])] = per_turn.get(str(rec["turn"]), 0) + 1
        if tag == ORIGINAL_TAG:
            originals += 1
        else:
            eligible.add(rec["origin_id"])
        for label in rec["labels"]:
            label_freq[_label_family(label)] += 1
        for bit in rec["mask"]:
            mask_entries += 1
            if bit == 0:
                mask_zeros += 1

    return {
        "records": total,
        "originals": originals,
        "additional_instances": total - originals,
        "origins": len(origins),
        "eligible_origins": len(eligible),
        "per_strategy": dict(sorted(per_strategy.items())),
        "per_turn": dict(sorted(per_turn.items(), key=lambda kv: int(kv[0]))),
        "label_frequencies": label_freq,
        "mask_zero_rate": (mask_zeros / mask_entries) if mask_entries else 0.0,
    }


def render_stats_table(stats: dict) -> str:
    """Aligned plain-text rendering of :func:`corpus_stats` output."""
    lines = [
        f"records               {stats['records']:>10}",
        f"originals             {stats['originals']:>10}",
        f"additional instances  {stats['additional_instances']:>10}",
        f"origins               {stats['origins']:>10}",
        f"eligible origins      {stats['eligible_origins']:>10}",
        f"mask-zero rate        {stats['mask_zero_rate']:>10.4f}",
        "",
        "strategy                 records",
    ]
    for tag, count in stats["per_strategy"].items():
        lines.append(f"  {tag:<22} {count:>8}")
    lines.append("")
    lines.append("turn                     records")
    for turn, count in stats["per_turn"].items():
        lines.append(f"  {turn:<22} {count:>8}")
    lines.append("")
    lines.append("label                     tokens")
    for family, count in stats["label_frequencies"].items():
        lines.append(f"  {family:<22} {count:>8}")
    return "\n".join(lines)
