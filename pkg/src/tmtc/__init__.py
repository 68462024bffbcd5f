"""Multi-turn correction data construction and evaluation for GEC.

The package operates purely on token sequences: it aligns erroneous and
reference sentences into minimal edit scripts, derives per-token
editing-action labels, expands training pairs into supervision-masked
multi-turn instances under several selection strategies, and scores
correction hypotheses per label kind.
"""

from .align import (
    EditOp,
    EditScript,
    align,
    apply_script,
    filter_script,
    select_units,
    unit_kind,
)
from .construct import (
    KTurn,
    Ordered,
    Random,
    Strategy,
    TurnInstance,
    TypeFirst,
    build_intermediate,
    construct_corpus,
    corpus_stats,
    emit_turns,
    instance_records,
)
from .labels import (
    EditLabel,
    GedLabelSequence,
    LabelSequence,
    apply_labels,
    derive_labels,
    ged_labels,
    iterate_derive,
    labels_from_script,
    parse_label,
)
from .scoring import (
    EditMatchKey,
    EvalReport,
    KindScore,
    LossReport,
    build_action_subsets,
    edit_keys,
    f_beta,
    losses,
    quantexp,
    score,
)
from .textcore import (
    DataError,
    M2Annotation,
    M2Document,
    ParallelInstance,
    Sentence,
    m2_to_parallel,
    parse_m2,
    read_parallel,
    read_sentences,
    sentence,
    write_jsonl,
    write_sentences,
)

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "EditLabel",
    "EditMatchKey",
    "EditOp",
    "EditScript",
    "EvalReport",
    "KindScore",
    "GedLabelSequence",
    "KTurn",
    "LabelSequence",
    "LossReport",
    "M2Annotation",
    "M2Document",
    "Ordered",
    "ParallelInstance",
    "Random",
    "Sentence",
    "Strategy",
    "TurnInstance",
    "TypeFirst",
    "align",
    "apply_labels",
    "apply_script",
    "build_action_subsets",
    "build_intermediate",
    "construct_corpus",
    "corpus_stats",
    "derive_labels",
    "edit_keys",
    "emit_turns",
    "f_beta",
    "filter_script",
    "select_units",
    "ged_labels",
    "instance_records",
    "iterate_derive",
    "labels_from_script",
    "losses",
    "m2_to_parallel",
    "parse_label",
    "parse_m2",
    "quantexp",
    "read_parallel",
    "read_sentences",
    "score",
    "sentence",
    "unit_kind",
    "write_jsonl",
    "write_sentences",
]
