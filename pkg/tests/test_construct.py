import random

import pytest
from hypothesis import given, settings, strategies as st

from tmtc import (
    KTurn,
    Ordered,
    ParallelInstance,
    Random,
    Sentence,
    TypeFirst,
    align,
    build_intermediate,
    construct_corpus,
    corpus_stats,
    derive_labels,
    emit_turns,
    instance_records,
    sentence,
)
from tmtc.construct import (
    ORIGINAL_TAG,
    _round_half_up,
    instance_seed,
    render_stats_table,
)
from tmtc.textcore import DataError

FIGURE_PAIR = ParallelInstance(
    0, sentence("How oldest are you !"), sentence("How old are you ?")
)


def pair(i, src, ref):
    return ParallelInstance(i, sentence(src), sentence(ref))


# ---------------------------------------------------------------- strategies


def test_strategy_tags():
    assert Random().tag == "random:0.5"
    assert Random(ratio=0.25).tag == "random:0.25"
    assert TypeFirst("append").tag == "append-first"
    assert TypeFirst("delete").tag == "delete-first"
    assert TypeFirst("replace").tag == "replace-first"
    assert Ordered(("append", "replace", "delete")).tag == "ordered:app+rep+del"
    assert Ordered(("delete", "append")).tag == "ordered:del+app"
    assert KTurn(3).tag == "kturn:3"


def test_strategy_validation():
    with pytest.raises(DataError):
        Random(ratio=1.5)
    with pytest.raises(DataError):
        TypeFirst("insert")
    with pytest.raises(DataError):
        Ordered(("append",))
    with pytest.raises(DataError):
        Ordered(("append", "append"))
    with pytest.raises(DataError):
        KTurn(1)


def test_round_half_up():
    assert _round_half_up(0.5) == 1
    assert _round_half_up(1.5) == 2  # not banker's rounding
    assert _round_half_up(2.5) == 3
    assert _round_half_up(0.49) == 0
    assert _round_half_up(3.0) == 3


def test_instance_seed_is_stable():
    assert instance_seed(42, 0) == instance_seed(42, 0)
    assert instance_seed(42, 0) != instance_seed(42, 1)
    assert instance_seed(42, 0) != instance_seed(43, 0)
    assert 0 <= instance_seed(7, 123) < 2**64


# ------------------------------------------------------------ golden figure


def test_figure_golden_chain():
    # seed 0 selects the "!" error for the intermediate sentence
    chain = build_intermediate(FIGURE_PAIR, Random(ratio=0.5), seed=0)
    assert [s.text() for s in chain] == [
        "How oldest are you !",
        "How oldest are you ?",
        "How old are you ?",
    ]


def test_figure_golden_turns():
    chain = build_intermediate(FIGURE_PAIR, Random(ratio=0.5), seed=0)
    turns = emit_turns(FIGURE_PAIR, chain, Random(ratio=0.5))
    assert len(turns) == 2

    first, second = turns
    assert first.turn == 1
    assert first.labels.render() == ["$KEEP", "$KEEP", "$KEEP", "$KEEP", "$REPLACE_?"]
    rec = first.to_record()
    assert rec["mask"] == [1, 0, 1, 1, 1]  # the "oldest" slot is silenced

    assert second.turn == 2
    assert second.labels.render() == [
        "$KEEP",
        "$REPLACE_old",
        "$KEEP",
        "$KEEP",
        "$KEEP",
    ]
    assert second.to_record()["mask"] == [1, 1, 1, 1, 1]


def test_figure_record_schema_order():
    chain = build_intermediate(FIGURE_PAIR, Random(ratio=0.5), seed=0)
    rec = emit_turns(FIGURE_PAIR, chain, Random(ratio=0.5))[0].to_record()
    assert list(rec) == ["origin_id", "turn", "strategy", "src", "tgt", "labels", "mask"]
    assert rec["origin_id"] == 0
    assert rec["strategy"] == "random:0.5"
    assert rec["src"] == ["How", "oldest", "are", "you", "!"]
    assert rec["tgt"] == ["How", "oldest", "are", "you", "?"]
    assert len(rec["labels"]) == len(rec["mask"]) == len(rec["src"])


def test_sentinel_slot_in_records():
    inst = pair(3, "b c wrongg", "a b c right")
    first, second = instance_records(
        inst, TypeFirst("append"), seed=1, include_original=False
    )
    rec = first.to_record()
    assert rec["sentinel"] is True
    assert rec["labels"] == ["$APPEND_a", "$KEEP", "$KEEP", "$KEEP"]
    assert rec["mask"] == [1, 1, 1, 0]  # pending replace is silenced
    assert len(rec["labels"]) == len(rec["mask"]) == 4  # sentinel + 3 tokens

    rec2 = second.to_record()
    assert "sentinel" not in rec2
    assert rec2["labels"] == ["$KEEP", "$KEEP", "$KEEP", "$REPLACE_right"]


# --------------------------------------------------------- strategy chains


def test_type_first_corrects_featured_units_first():
    inst = pair(1, "He go to school yesterday now", "He went to school yesterday")
    chain = build_intermediate(inst, TypeFirst("replace"), seed=5)
    assert [s.text() for s in chain] == [
        "He go to school yesterday now",
        "He went to school yesterday now",
        "He went to school yesterday",
    ]
    chain = build_intermediate(inst, TypeFirst("delete"), seed=5)
    assert chain[1].text() == "He go to school yesterday"
    # no append errors here: append-first has no real intermediate
    assert len(build_intermediate(inst, TypeFirst("append"), seed=5)) == 2


def test_type_first_invert_corrects_the_rest_first():
    inst = pair(1, "He go to school yesterday now", "He went to school yesterday")
    chain = build_intermediate(inst, TypeFirst("replace", invert=True), seed=5)
    assert chain[1].text() == "He go to school yesterday"
    assert TypeFirst("replace", invert=True).tag == "replace-first"


def test_ordered_accumulates_kinds():
    inst = pair(
        2,
        "She like apples much and really sing",
        "She likes apples very much and sing",
    )
    # one of each kind: replace(like->likes), insert(very), delete(really)
    script = align(inst.source, inst.reference)
    assert sorted(op.kind for op in script.units) == ["delete", "insert", "replace"]

    chain = build_intermediate(
        inst, Ordered(("append", "replace", "delete")), seed=9
    )
    assert [s.text() for s in chain] == [
        "She like apples much and really sing",
        "She like apples very much and really sing",
        "She likes apples very much and really sing",
        "She likes apples very much and sing",
    ]


def test_ordered_drops_empty_hops():
    inst = pair(4, "one too three", "one two three")  # replace only
    chain = build_intermediate(inst, Ordered(("append", "replace")), seed=0)
    # append hop is degenerate and disappears; replace hop covers everything,
    # so nothing genuinely intermediate survives
    assert len(chain) == 2


def test_kturn_group_sizes():
    # five units, k=3 -> accumulated groups of 2, 2, 1
    inst = pair(
        5,
        "aa x bb cc y dd ee",
        "AA x BB CC y DD EE",
    )
    script = align(inst.source, inst.reference)
    assert len(script.units) == 5

    chain = build_intermediate(inst, KTurn(3), seed=11)
    assert len(chain) == 4  # source, two intermediates, reference
    costs = [align(step, inst.reference).cost for step in chain]
    assert costs == [5, 3, 1, 0]  # 2 then 2 then 1 corrections


def test_kturn_with_fewer_units_than_turns():
    inst = pair(6, "only won error", "only one error")
    chain = build_intermediate(inst, KTurn(3), seed=2)
    assert len(chain) == 2  # single unit cannot split into turns


def test_random_ratio_counts():
    # ten replace errors; ratio picks round-half-up(ratio * 10) of them
    src = " ".join(f"tok{i}" for i in range(10))
    ref = " ".join(f"TOK{i}" for i in range(10))
    inst = pair(7, src, ref)
    for ratio, expected in [(0.25, 3), (0.5, 5), (0.75, 8), (0.0, 0), (1.0, 10)]:
        chain = build_intermediate(inst, Random(ratio=ratio), seed=3)
        if expected in (0, 10):
            assert len(chain) == 2
        else:
            corrected = 10 - align(chain[1], inst.reference).cost
            assert corrected == expected


def test_chain_endpoint_validation():
    inst = FIGURE_PAIR
    with pytest.raises(DataError, match="start"):
        emit_turns(inst, [sentence("x"), inst.reference], Random())
    with pytest.raises(DataError, match="end"):
        emit_turns(inst, [inst.source, sentence("x")], Random())


# ------------------------------------------------------------ record layout


def test_instance_records_include_original_toggle():
    inst = pair(1, "He go to school yesterday now", "He went to school yesterday")
    with_orig = instance_records(inst, TypeFirst("replace"), seed=5)
    assert [r.turn for r in with_orig] == [1, 2, 3]
    assert with_orig[-1].strategy == ORIGINAL_TAG
    assert with_orig[-1].mask == (1,) * (len(inst.source) + 1)

    without = instance_records(inst, TypeFirst("replace"), seed=5, include_original=False)
    assert [r.turn for r in without] == [1, 2]


def test_ineligible_instance_emits_original_only():
    inst = pair(2, "all good here", "all good here")
    records = instance_records(inst, Random(), seed=0)
    assert [(r.turn, r.strategy) for r in records] == [(0, ORIGINAL_TAG)]
    assert instance_records(inst, Random(), seed=0, include_original=False) == []


def test_construct_corpus_ordering():
    instances = [
        pair(2, "c x", "c y"),
        pair(0, "a wrongg", "a right"),
        pair(1, "fine here", "fine here"),
    ]
    records = list(construct_corpus(instances, Random(ratio=0.5), seed=42))
    keys = [(r.origin_id, r.turn) for r in records]
    assert keys == sorted(keys)
    assert {r.origin_id for r in records} == {0, 1, 2}


# ------------------------------------------------------------------- masks


def random_instance(rng: random.Random, i: int) -> ParallelInstance:
    vocab = [f"w{k}" for k in range(14)]
    n = rng.randint(1, 9)
    src = [rng.choice(vocab) for _ in range(n)]
    ref = list(src)
    for _ in range(rng.randint(0, 4)):
        mode = rng.choice(("replace", "delete", "insert"))
        if mode == "replace" and ref:
            ref[rng.randrange(len(ref))] = rng.choice(vocab)
        elif mode == "delete" and ref:
            del ref[rng.randrange(len(ref))]
        else:
            ref.insert(rng.randint(0, len(ref)), rng.choice(vocab))
    return ParallelInstance(i, Sentence(tuple(src)), Sentence(tuple(ref)))


ALL_STRATEGIES = [
    Random(ratio=0.25),
    Random(ratio=0.5),
    Random(ratio=0.75),
    TypeFirst("append"),
    TypeFirst("delete"),
    TypeFirst("replace"),
    Ordered(("append", "replace", "delete")),
    KTurn(3),
]


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=lambda s: s.tag)
def test_mask_law_sampled(strategy):
    """mask[i] == 1 exactly when the turn label matches the to-reference label."""
    rng = random.Random(1234)
    for i in range(120):
        inst = random_instance(rng, i)
        for turn in instance_records(inst, strategy, seed=77, include_original=False):
            expect = derive_labels(turn.source, inst.reference)
            got = turn.labels.with_sentinel_slot()
            want = expect.with_sentinel_slot()
            assert turn.mask == tuple(
                1 if g == w else 0 for g, w in zip(got, want)
            )


@pytest.mark.parametrize("strategy", ALL_STRATEGIES, ids=lambda s: s.tag)
def test_final_turn_mask_is_all_ones(strategy):
    rng = random.Random(99)
    for i in range(60):
        inst = random_instance(rng, i)
        records = instance_records(inst, strategy, seed=5, include_original=False)
        if records:
            assert set(records[-1].mask) == {1}


def test_chain_applies_to_reference_under_every_strategy():
    rng = random.Random(4321)
    for i in range(80):
        inst = random_instance(rng, i)
        for strategy in ALL_STRATEGIES:
            chain = build_intermediate(inst, strategy, seed=13)
            assert chain[0] == inst.source
            assert chain[-1] == inst.reference
            # hops strictly reduce the remaining distance
            costs = [align(step, inst.reference).cost for step in chain]
            assert all(a > b for a, b in zip(costs, costs[1:])) or len(chain) == 2


# ------------------------------------------------------------------- stats


def test_corpus_stats_counts():
    instances = [
        pair(0, "a wrongg b missingtok", "a right b extra missingtok"),
        pair(1, "clean", "clean"),
    ]
    records = [
        t.to_record() for t in construct_corpus(instances, TypeFirst("replace"), seed=1)
    ]
    stats = corpus_stats(records)
    assert stats["records"] == 4  # two turns + original for 0, original for 1
    assert stats["originals"] == 2
    assert stats["additional_instances"] == 2
    assert stats["origins"] == 2
    assert stats["eligible_origins"] == 1
    assert stats["per_strategy"] == {"original": 2, "replace-first": 2}
    assert stats["per_turn"] == {"0": 1, "1": 1, "2": 1, "3": 1}
    assert stats["label_frequencies"]["$REPLACE"] == 2  # one per derivation pass
    assert stats["label_frequencies"]["$APPEND"] == 2
    assert 0.0 <= stats["mask_zero_rate"] < 1.0


def test_render_stats_table_mentions_counts():
    records = [
        t.to_record()
        for t in construct_corpus([pair(0, "x wrongg", "x right")], Random(), seed=0)
    ]
    table = render_stats_table(corpus_stats(records))
    assert "records" in table
    assert "eligible origins" in table
    assert "$KEEP" in table


# ------------------------------------------------------------ determinism


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**31), st.sampled_from(ALL_STRATEGIES))
def test_construction_is_seed_deterministic(seed, strategy):
    rng = random.Random(777)
    instances = [random_instance(rng, i) for i in range(10)]
    first = [t.to_record() for t in construct_corpus(instances, strategy, seed)]
    second = [t.to_record() for t in construct_corpus(instances, strategy, seed)]
    assert first == second
