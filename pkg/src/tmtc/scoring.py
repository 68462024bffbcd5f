"""Evaluation: per-kind precision/recall/F-beta, interdependence
experiments over type-restricted subsets, and loss-value computation
from per-position label log-probability tables.

Edits are matched by exact (anchor, kind, tokens) keys extracted from
the minimal alignment of each sentence pair against the shared source —
a deliberately simple, deterministic stand-in for span-based scorers.
``kind_only=True`` relaxes matching to (anchor, kind).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .align import align, apply_script, filter_script, unit_kind
from .construct import KINDS
from .labels import LabelSequence
from .textcore import DataError, ParallelInstance, Sentence


@dataclass(frozen=True)
class EditMatchKey:
    """Identity of one edit for matching: anchor position, kind, argument tokens.

    ``anchor`` is the source position of the unit (-1 for an insertion
    before the first token); ``tokens`` is empty for deletes, the single
    replacement token for replaces, and the full run for appends.
    """

    anchor: int
    kind: str
    tokens: tuple[str, ...]


def edit_keys(source: Sentence, other: Sentence, kind_only: bool = False) -> set:
    """Match keys of all error units of align(source, other)."""
    keys = set()
    for op in align(source, other).units:
        kind = unit_kind(op)
        if kind_only:
            keys.add((op.src_pos, kind))
        else:
            keys.add(EditMatchKey(anchor=op.src_pos, kind=kind, tokens=op.new_tokens))
    return keys


def _key_kind(key) -> str:
    return key.kind if isinstance(key, EditMatchKey) else key[1]


def f_beta(precision: float, recall: float, beta: float) -> float:
    """(1+b^2) P R / (b^2 P + R), 0 when the denominator vanishes.

    Accepts fractions or percentages; the formula is homogeneous of
    degree 1, so the result comes back on the same scale as the inputs.
    Inputs above 1 are simply taken to be percentages.
    """
    if precision < 0 or recall < 0:
        raise DataError(f"negative precision/recall: {precision}, {recall}")
    if beta <= 0:
        raise DataError(f"beta must be positive, got {beta}")
    b2 = beta * beta
    denom = b2 * precision + recall
    if denom == 0:
        return 0.0
    return (1 + b2) * precision * recall / denom


@dataclass(frozen=True)
class KindScore:
    tp: int
    fp: int
    fn: int

    @property
    def num_gold(self) -> int:
        return self.tp + self.fn

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 0.0

    def f(self, beta: float) -> float:
        return f_beta(self.precision, self.recall, beta)


@dataclass(frozen=True)
class EvalReport:
    """Per-kind counts with derived metrics at a fixed beta."""

    kinds: Mapping[str, KindScore]
    beta: float

    def to_dict(self) -> dict:
        out: dict = {"beta": self.beta, "kinds": {}}
        for kind in KINDS:
            if kind not in self.kinds:
                continue
            ks = self.kinds[kind]
            out["kinds"][kind] = {
                "tp": ks.tp,
                "fp": ks.fp,
                "fn": ks.fn,
                "num_gold": ks.num_gold,
                "precision": round(100.0 * ks.precision, 2),
                "recall": round(100.0 * ks.recall, 2),
                "f": round(100.0 * ks.f(self.beta), 2),
            }
        return out


def render_eval_table(report: EvalReport) -> str:
    header = f"{'Kind':<10} {'Num.':>6} {'Prec.':>7} {'Rec.':>7} {'F':>7}"
    lines = [header, "-" * len(header)]
    for kind in KINDS:
        if kind not in report.kinds:
            continue
        ks = report.kinds[kind]
        lines.append(
            f"{kind:<10} {ks.num_gold:>6} {100 * ks.precision:>7.2f} "
            f"{100 * ks.recall:>7.2f} {100 * ks.f(report.beta):>7.2f}"
        )
    return "\n".join(lines)


def score(
    sources: Sequence[Sentence],
    hypotheses: Sequence[Sentence],
    references: Sequence[Sentence],
    kinds: Iterable[str] = KINDS,
    beta: float = 1.0,
    kind_only: bool = False,
) -> EvalReport:
    """Count tp/fp/fn per kind by exact key matching against the source.

    Predicted edits are the units of align(source, hypothesis), gold
    edits the units of align(source, reference); both restricted to the
    requested kinds.
    """
    if not (len(sources) == len(hypotheses) == len(references)):
        raise DataError(
            f"corpus length mismatch: {len(sources)} sources, "
            f"{len(hypotheses)} hypotheses, {len(references)} references"
        )
    wanted = tuple(kinds)
    counts = {kind: [0, 0, 0] for kind in wanted}  # tp, fp, fn
    for src, hyp, ref in zip(sources, hypotheses, references):
        pred = {k for k in edit_keys(src, hyp, kind_only) if _key_kind(k) in wanted}
        gold = {k for k in edit_keys(src, ref, kind_only) if _key_kind(k) in wanted}
        for key in pred & gold:
            counts[_key_kind(key)][0] += 1
        for key in pred - gold:
            counts[_key_kind(key)][1] += 1
        for key in gold - pred:
            counts[_key_kind(key)][2] += 1
    return EvalReport(
        kinds={k: KindScore(tp=c[0], fp=c[1], fn=c[2]) for k, c in counts.items()},
        beta=beta,
    )


def build_action_subsets(
    corpus: Sequence[ParallelInstance], kind: str
) -> tuple[list[ParallelInstance], list[ParallelInstance]]:
    """The type-restricted subset and its pre-corrected variant.

    The first list keeps every instance whose minimal script contains at
    least one unit of ``kind``. The second holds the same instances with
    all featured-kind errors already corrected in the source (everything
    else untouched); references are unchanged.
    """
    if kind not in KINDS:
        raise DataError(f"unknown kind {kind!r}")
    subset: list[ParallelInstance] = []
    checked: list[ParallelInstance] = []
    for inst in corpus:
        script = align(inst.source, inst.reference)
        if not any(unit_kind(op) == kind for op in script.units):
            continue
        subset.append(inst)
        fixed = filter_script(script, lambda op: unit_kind(op) == kind)
        checked.append(
            ParallelInstance(
                id=inst.id,
                source=apply_script(inst.source, fixed),
                reference=inst.reference,
            )
        )
    return subset, checked


def quantexp(
    corpus: Sequence[ParallelInstance],
    predictions_on_raw: Sequence[Sentence],
    predictions_on_checked: Sequence[Sentence],
    kind: str,
    beta: float = 1.0,
    kind_only: bool = False,
) -> dict:
    """Score single-iteration predictions on D(kind) and D(kind, corrected).

    Returns per-non-featured-kind paired reports with metric deltas
    (checked minus raw), all on the percentage scale.
    """
    subset, checked = build_action_subsets(corpus, kind)
    if len(predictions_on_raw) != len(subset):
        raise DataError(
            f"raw predictions: {len(predictions_on_raw)} lines for {len(subset)} instances"
        )
    if len(predictions_on_checked) != len(checked):
        raise DataError(
            f"checked predictions: {len(predictions_on_checked)} lines "
            f"for {len(checked)} instances"
        )
    other_kinds = tuple(k for k in KINDS if k != kind)
    raw_report = score(
        [i.source for i in subset],
        predictions_on_raw,
        [i.reference for i in subset],
        kinds=other_kinds,
        beta=beta,
        kind_only=kind_only,
    )
    checked_report = score(
        [i.source for i in checked],
        predictions_on_checked,
        [i.reference for i in checked],
        kinds=other_kinds,
        beta=beta,
        kind_only=kind_only,
    )
    result: dict = {
        "action": kind,
        "beta": beta,
        "subset_size": len(subset),
        "kinds": {},
    }
    raw_d, chk_d = raw_report.to_dict()["kinds"], checked_report.to_dict()["kinds"]
    for other in other_kinds:
        result["kinds"][other] = {
            "raw": raw_d[other],
            "checked": chk_d[other],
            "delta_precision": round(chk_d[other]["precision"] - raw_d[other]["precision"], 2),
            "delta_recall": round(chk_d[other]["recall"] - raw_d[other]["recall"], 2),
            "delta_f": round(chk_d[other]["f"] - raw_d[other]["f"], 2),
        }
    return result


def render_quantexp_table(result: dict) -> str:
    header = (
        f"{'Kind':<10} {'Subset':>8} {'Num.':>6} {'Prec.':>7} {'Rec.':>7} "
        f"{'F':>7} {'ΔF':>7}"
    )
    lines = [header, "-" * len(header)]
    for kind, pair in result["kinds"].items():
        raw, chk = pair["raw"], pair["checked"]
        lines.append(
            f"{kind:<10} {'raw':>8} {raw['num_gold']:>6} {raw['precision']:>7.2f} "
            f"{raw['recall']:>7.2f} {raw['f']:>7.2f} {'':>7}"
        )
        lines.append(
            f"{kind:<10} {'checked':>8} {chk['num_gold']:>6} {chk['precision']:>7.2f} "
            f"{chk['recall']:>7.2f} {chk['f']:>7.2f} {pair['delta_f']:>+7.2f}"
        )
    return "\n".join(lines)


@dataclass(frozen=True)
class LossReport:
    """Natural-log loss components.

    ``l_total`` is always the sum l_c1 + l_c2 + l_d + l_c; components not
    supplied by the caller contribute zero.
    """

    l_d: float
    l_c: float
    l_c1: float
    l_c2: float

    @property
    def l_total(self) -> float:
        return self.l_c1 + self.l_c2 + self.l_d + self.l_c

    def to_dict(self) -> dict:
        return {
            "l_d": self.l_d,
            "l_c": self.l_c,
            "l_c1": self.l_c1,
            "l_c2": self.l_c2,
            "l_total": self.l_total,
        }


_NORMALIZATION_TOLERANCE = 1e-6


def _nll(
    log_probs: Sequence[Mapping[str, float]],
    gold: Sequence[str],
    mask: Sequence[int] | None,
    what: str,
) -> float:
    if len(log_probs) != len(gold):
        raise DataError(
            f"{what}: {len(log_probs)} probability tables for {len(gold)} gold labels"
        )
    if mask is not None and len(mask) != len(gold):
        raise DataError(f"{what}: mask length {len(mask)} != {len(gold)}")
    total = 0.0
    for i, (table, gold_label) in enumerate(zip(log_probs, gold)):
        if not table:
            raise DataError(f"{what}: empty probability table at position {i}")
        mass = math.fsum(math.exp(lp) for lp in table.values())
        if abs(mass - 1.0) > _NORMALIZATION_TOLERANCE:
            raise DataError(
                f"{what}: distribution at position {i} sums to {mass:.8f}, not 1"
            )
        if mask is not None and not mask[i]:
            continue
        if gold_label not in table:
            raise DataError(f"{what}: gold label {gold_label!r} missing at position {i}")
        total -= table[gold_label]
    # tables may overshoot 1 by up to the tolerance; never report a negative loss
    return max(0.0, total)


def losses(
    log_probs: Sequence[Mapping[str, float]],
    gold: LabelSequence | Sequence[str],
    mask: Sequence[int] | None = None,
    ged_gold: Sequence[int] | None = None,
    ged_log_probs: Sequence[Mapping[str, float]] | None = None,
    second: tuple[Sequence[Mapping[str, float]], Sequence[str]] | None = None,
) -> LossReport:
    """Loss values from per-position label log-probability tables.

    ``l_c`` is the unmasked label NLL, ``l_c1`` the masked variant over
    the same positions, ``l_d`` the binary detection NLL (when the ged
    inputs are given), and ``l_c2`` the NLL of a second, later-turn
    (input, gold) pair when supplied. Tables may cover only the labels
    they assign mass to, but each must sum to 1 within 1e-6.
    """
    gold_strings = (
        [lab.render() for lab in gold.with_sentinel_slot()[1:]]
        if isinstance(gold, LabelSequence)
        else list(gold)
    )
    l_c = _nll(log_probs, gold_strings, None, "labels")
    if mask is None:
        l_c1 = l_c
    else:
        l_c1 = _nll(log_probs, gold_strings, mask, "masked labels")
    l_d = 0.0
    if ged_log_probs is not None:
        if ged_gold is None:
            raise DataError("ged_log_probs given without ged_gold")
        l_d = _nll(ged_log_probs, [str(int(g)) for g in ged_gold], None, "detection")
    l_c2 = 0.0
    if second is not None:
        second_probs, second_gold = second
        l_c2 = _nll(second_probs, list(second_gold), None, "second-turn labels")
    return LossReport(l_d=l_d, l_c=l_c, l_c1=l_c1, l_c2=l_c2)
