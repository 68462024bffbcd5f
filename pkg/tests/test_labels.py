import pytest
from hypothesis import assume, given, settings, strategies as st

from tmtc import (
    EditLabel,
    EditOp,
    EditScript,
    LabelSequence,
    Sentence,
    align,
    apply_labels,
    derive_labels,
    ged_labels,
    iterate_derive,
    labels_from_script,
    parse_label,
    sentence,
)
from tmtc.labels import APPEND, DELETE_LABEL, KEEP, KEEP_LABEL, REPLACE
from tmtc.textcore import DataError

words = st.sampled_from([f"t{i}" for i in range(12)])
token_lists = st.lists(words, max_size=10)


def test_label_rendering():
    assert KEEP_LABEL.render() == "$KEEP"
    assert DELETE_LABEL.render() == "$DELETE"
    assert EditLabel(APPEND, "to").render() == "$APPEND_to"
    assert EditLabel(REPLACE, "went").render() == "$REPLACE_went"


def test_parse_label_inverts_render():
    for text in ("$KEEP", "$DELETE", "$APPEND_to", "$REPLACE_went"):
        assert parse_label(text).render() == text
    with pytest.raises(DataError):
        parse_label("KEEP")
    with pytest.raises(DataError):
        parse_label("$FROB_x")


def test_label_validation():
    with pytest.raises(ValueError):
        EditLabel(KEEP, token="x")
    with pytest.raises(ValueError):
        EditLabel(APPEND)  # append needs its token
    with pytest.raises(ValueError):
        LabelSequence(labels=(), sentinel=DELETE_LABEL)


def test_derive_figure_pair():
    labels = derive_labels(
        sentence("How oldest are you !"), sentence("How old are you ?")
    )
    assert labels.render() == [
        "$KEEP",
        "$REPLACE_old",
        "$KEEP",
        "$KEEP",
        "$REPLACE_?",
    ]
    assert ged_labels(labels).labels == (0, 1, 0, 0, 1)


def test_derive_textbook_fragment():
    # small multi-error sample: replace at two positions, one append
    labels = derive_labels(
        sentence("there are little job because"),
        sentence("there are few jobs because"),
    )
    assert labels.render() == [
        "$KEEP",
        "$KEEP",
        "$REPLACE_few",
        "$REPLACE_jobs",
        "$KEEP",
    ]


def test_sentinel_append_for_leading_insertion():
    labels = derive_labels(sentence("go now"), sentence("we go now"))
    assert labels.sentinel == EditLabel(APPEND, "we")
    assert labels.has_visible_sentinel
    assert labels.render() == ["$APPEND_we", "$KEEP", "$KEEP"]
    # the sentinel renders at slot 0 only when visible or forced
    assert derive_labels(sentence("a"), sentence("a")).render() == ["$KEEP"]
    assert derive_labels(sentence("a"), sentence("a")).render(
        include_sentinel=True
    ) == ["$KEEP", "$KEEP"]


def test_append_label_keeps_first_run_token_only():
    labels = derive_labels(sentence("a b"), sentence("a x y z b"))
    assert labels.render() == ["$APPEND_x", "$KEEP"]


def test_apply_labels_matches_examples():
    src = sentence("He go to school yesterday now")
    labels = derive_labels(src, sentence("He went to school yesterday"))
    assert apply_labels(src, labels) == sentence("He went to school yesterday")


def test_apply_labels_length_check():
    with pytest.raises(DataError, match="length"):
        apply_labels(sentence("a b"), LabelSequence(labels=(KEEP_LABEL,)))


def test_collision_policy_defers_append():
    # hand-built script: delete at 0 plus an insert run anchored at 0
    script = EditScript(
        ops=(
            EditOp(kind="delete", src_pos=0, src_token="bad"),
            EditOp(kind="insert", src_pos=0, new_tokens=("x",)),
            EditOp(kind="equal", src_pos=1, src_token="end"),
        ),
        src_len=2,
        tgt_len=2,
    )
    labels = labels_from_script(script)
    assert labels.labels[0] == DELETE_LABEL  # replace/delete wins the slot
    assert labels.labels[1] == KEEP_LABEL


def test_iterate_derive_counts():
    final, iters = iterate_derive(sentence("a"), sentence("a"))
    assert final == sentence("a") and iters == 1

    final, iters = iterate_derive(sentence("a"), sentence("a x y z"))
    assert final == sentence("a x y z")
    assert iters == 3  # one appended token per pass

    final, iters = iterate_derive(
        sentence("How oldest are you !"), sentence("How old are you ?")
    )
    assert final == sentence("How old are you ?") and iters == 1


def test_iterate_derive_respects_cap():
    final, iters = iterate_derive(sentence("a"), sentence("a b c d e f g h"), max_iters=3)
    assert iters == 3
    assert final != sentence("a b c d e f g h")
    with pytest.raises(ValueError):
        iterate_derive(sentence("a"), sentence("a"), max_iters=0)


@given(token_lists, token_lists)
def test_single_pass_moves_toward_target(src_tokens, tgt_tokens):
    """One application never overshoots: the result is closer to the target."""
    src, tgt = Sentence(tuple(src_tokens)), Sentence(tuple(tgt_tokens))
    before = align(src, tgt).cost
    stepped = apply_labels(src, derive_labels(src, tgt))
    after = align(stepped, tgt).cost
    if before == 0:
        assert stepped == src
    else:
        assert after < before


@settings(max_examples=300)
@given(token_lists, token_lists)
def test_iterated_derivation_converges(src_tokens, tgt_tokens):
    src, tgt = Sentence(tuple(src_tokens)), Sentence(tuple(tgt_tokens))
    runs = [
        len(op.new_tokens)
        for op in align(src, tgt).units
        if op.kind == "insert"
    ]
    assume(max(runs, default=0) <= 5)
    final, iters = iterate_derive(src, tgt)
    assert final == tgt
    assert 1 <= iters <= 5


@given(token_lists, token_lists)
def test_iterated_derivation_converges_with_budget(src_tokens, tgt_tokens):
    # without the run-length cap, len(target) passes always suffice
    src, tgt = Sentence(tuple(src_tokens)), Sentence(tuple(tgt_tokens))
    final, _ = iterate_derive(src, tgt, max_iters=max(1, len(tgt)))
    assert final == tgt


@given(token_lists, token_lists)
def test_ged_flags_match_labels(src_tokens, tgt_tokens):
    src, tgt = Sentence(tuple(src_tokens)), Sentence(tuple(tgt_tokens))
    labels = derive_labels(src, tgt)
    flags = ged_labels(labels)
    assert len(flags) == len(src)
    for flag, lab in zip(flags.labels, labels.labels):
        assert flag == (0 if lab.kind == KEEP else 1)
