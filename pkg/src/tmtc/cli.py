"""Command-line front end.

Subcommands: derive, apply, construct, stats, eval, quantexp, m2, loss.
Exit codes: 0 success, 1 usage error, 2 data error. The default seed is
42, overridable by the TMTC_SEED environment variable and then by
--seed. Every ``--json`` report embeds the full run configuration under
the key "config" and validates against the schemas published in
:mod:`tmtc.schema`.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

from . import construct as cstr
from .construct import (
    KINDS,
    TurnInstance,
    corpus_stats,
    instance_records,
    parse_kind,
    render_stats_table,
)
from .labels import (
    APPEND,
    KEEP,
    LabelSequence,
    apply_labels,
    derive_labels,
    parse_label,
)
from .scoring import (
    build_action_subsets,
    losses,
    quantexp,
    render_eval_table,
    render_quantexp_table,
    score,
)
from .textcore import (
    DataError,
    JSONL_SCHEMA_DOC,
    Sentence,
    m2_to_parallel,
    parse_m2,
    read_jsonl,
    read_parallel,
    read_sentences,
    write_jsonl,
    write_sentences,
)

DEFAULT_SEED = 42

LOSS_INPUT_DOC = """\
Loss input schema (one JSON object per line, one sentence each):

  {"log_probs": [{"<label>": <logp>, ...}, ...],   per-position tables
   "gold": ["$KEEP", ...],                          gold labels
   "mask": [0|1, ...],                              optional; default all-ones
   "ged_log_probs": [{"0": <logp>, "1": <logp>}, ...],  optional
   "ged_gold": [0|1, ...],                          optional (with ged_log_probs)
   "second": {"log_probs": [...], "gold": [...]}}   optional later-turn pair

Each table must describe a probability distribution summing to 1 within
1e-6 (labels may be omitted when they carry no mass). All logs natural.\
"""

QUANTEXP_DOC = """\
Two-phase protocol:

  1. `tmtc quantexp prepare SRC REF --action KIND --out-dir DIR` writes
     raw.src/raw.ref (instances containing >=1 KIND error) and
     checked.src/checked.ref (same instances with every KIND error
     already corrected; references unchanged).
  2. Run any external single-iteration predictor over raw.src and
     checked.src, producing one hypothesis file each.
  3. `tmtc quantexp score SRC REF --action KIND --pred-raw H1
     --pred-checked H2` scores both hypothesis files on the two
     non-featured kinds and reports the paired deltas.\
"""


class UsageError(Exception):
    """Bad flag/argument combination detected after parsing."""


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; this toolkit reserves 2 for
    data errors, so usage failures are remapped to exit code 1."""

    def error(self, message):  # noqa: D102
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    """Everything that influenced a run; echoed into every JSON report."""

    subcommand: str
    inputs: dict
    strategy: str | None
    seed: int
    beta: float
    annotator: int
    workers: int
    include_original: bool = True
    invert_typefirst: bool = False
    kind_only: bool = False
    sentinel: bool = False

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "inputs": dict(self.inputs),
            "strategy": self.strategy,
            "seed": self.seed,
            "beta": self.beta,
            "annotator": self.annotator,
            "workers": self.workers,
            "flags": {
                "include_original": self.include_original,
                "invert_typefirst": self.invert_typefirst,
                "kind_only": self.kind_only,
                "sentinel": self.sentinel,
            },
        }


def _resolve_seed(explicit: int | None) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("TMTC_SEED")
    if env is None or env == "":
        return DEFAULT_SEED
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"TMTC_SEED must be an integer, got {env!r}") from None


def _parse_kind_list(text: str) -> tuple[str, ...]:
    parts = [p for p in text.replace("+", ",").split(",") if p.strip()]
    if not parts:
        raise UsageError(f"no label kinds in {text!r}")
    try:
        return tuple(parse_kind(p) for p in parts)
    except DataError as exc:
        raise UsageError(str(exc)) from None


def _build_strategy(args) -> cstr.Strategy:
    name = args.strategy
    if name == "random":
        if not 0.0 <= args.ratio <= 1.0:
            raise UsageError(f"--ratio must lie in [0,1], got {args.ratio}")
        return cstr.Random(ratio=args.ratio)
    if name in ("append-first", "delete-first", "replace-first"):
        return cstr.TypeFirst(kind=name.split("-")[0], invert=args.invert_typefirst)
    if name == "ordered":
        if not args.order:
            raise UsageError("--order is required with --strategy ordered")
        kinds = _parse_kind_list(args.order)
        if not 2 <= len(kinds) <= 3 or len(set(kinds)) != len(kinds):
            raise UsageError("--order takes 2 or 3 distinct kinds, e.g. app+rep+del")
        return cstr.Ordered(kinds=kinds)
    if name == "kturn":
        if args.turns is None:
            raise UsageError("--turns is required with --strategy kturn")
        if args.turns < 2:
            raise UsageError(f"--turns must be >= 2, got {args.turns}")
        return cstr.KTurn(k=args.turns)
    raise UsageError(f"unknown strategy {name!r}")


def _print_json(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, indent=2, ensure_ascii=False))
    sys.stdout.write("\n")


def _all_ones_instance(inst) -> TurnInstance:
    labels = derive_labels(inst.source, inst.reference)
    return TurnInstance(
        origin_id=inst.id,
        turn=0,
        strategy="derive",
        source=inst.source,
        target=inst.reference,
        labels=labels,
        mask=(1,) * (len(labels) + 1),
    )


def cmd_derive(args) -> int:
    instances = read_parallel(args.src, args.ref)
    records = [_all_ones_instance(inst).to_record(args.sentinel) for inst in instances]
    write_jsonl(records, args.out)
    return 0


def _label_sequence_from_record(rec: dict, index: int) -> tuple[Sentence, LabelSequence]:
    for key in ("src", "labels"):
        if key not in rec:
            raise DataError(f"record {index}: missing key {key!r}")
    source = Sentence(tuple(rec["src"]))
    parsed = [parse_label(s) for s in rec["labels"]]
    if rec.get("sentinel"):
        if not parsed:
            raise DataError(f"record {index}: sentinel flag with empty labels")
        head = parsed[0]
        if head.kind not in (KEEP, APPEND):
            raise DataError(f"record {index}: sentinel slot holds {head.kind}")
        seq = LabelSequence(labels=tuple(parsed[1:]), sentinel=head)
    else:
        seq = LabelSequence(labels=tuple(parsed))
    if len(seq) != len(source):
        raise DataError(
            f"record {index}: {len(seq)} labels for {len(source)} source tokens"
        )
    return source, seq


def cmd_apply(args) -> int:
    records = read_jsonl(args.input)
    out = []
    for i, rec in enumerate(records):
        source, seq = _label_sequence_from_record(rec, i)
        out.append(apply_labels(source, seq))
    write_sentences(out, args.out)
    return 0


def _instance_dicts(inst, strategy, seed, include_original, force_sentinel) -> list[dict]:
    return [
        t.to_record(force_sentinel)
        for t in instance_records(inst, strategy, seed, include_original)
    ]


def _construct_records(instances, strategy, seed, include_original, force_sentinel, workers):
    work = partial(
        _instance_dicts,
        strategy=strategy,
        seed=seed,
        include_original=include_original,
        force_sentinel=force_sentinel,
    )
    if workers <= 1:
        mapped = map(work, instances)
        return [rec for chunk in mapped for rec in chunk]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(instances) // (workers * 8))
        mapped = pool.map(work, instances, chunksize=chunk)
        return [rec for chunk_ in mapped for rec in chunk_]


def cmd_construct(args) -> int:
    seed = _resolve_seed(args.seed)
    strategy = _build_strategy(args)
    if args.workers < 1:
        raise UsageError(f"--workers must be >= 1, got {args.workers}")
    instances = read_parallel(args.src, args.ref)
    records = _construct_records(
        instances, strategy, seed, args.include_original, args.sentinel, args.workers
    )
    write_jsonl(records, args.out)
    stats = corpus_stats(records)
    print(render_stats_table(stats), file=sys.stderr)
    cfg = RunConfig(
        subcommand="construct",
        inputs={"src": args.src, "ref": args.ref, "out": args.out},
        strategy=strategy.tag,
        seed=seed,
        beta=0.5,
        annotator=0,
        workers=args.workers,
        include_original=args.include_original,
        invert_typefirst=args.invert_typefirst,
        sentinel=args.sentinel,
    )
    if args.json:
        _print_json({"config": cfg.to_dict(), "stats": stats})
    if args.figure:
        from .figures import save_stats_figure

        save_stats_figure(stats, args.figure)
    return 0


def _require_record_keys(records: list[dict]) -> None:
    for i, rec in enumerate(records):
        for key in ("origin_id", "turn", "strategy", "src", "tgt", "labels", "mask"):
            if key not in rec:
                raise DataError(f"record {i}: missing key {key!r}")


def cmd_stats(args) -> int:
    records = read_jsonl(args.input)
    _require_record_keys(records)
    stats = corpus_stats(records)
    cfg = RunConfig(
        subcommand="stats",
        inputs={"input": args.input},
        strategy=None,
        seed=_resolve_seed(None),
        beta=0.5,
        annotator=0,
        workers=1,
    )
    if args.json:
        _print_json({"config": cfg.to_dict(), "stats": stats})
    else:
        print(render_stats_table(stats))
    if args.figure:
        from .figures import save_stats_figure

        save_stats_figure(stats, args.figure)
    return 0


def cmd_eval(args) -> int:
    sources = read_sentences(args.src)
    hypotheses = read_sentences(args.hyp)
    references = read_sentences(args.ref)
    kinds = _parse_kind_list(args.labels) if args.labels else KINDS
    report = score(
        sources,
        hypotheses,
        references,
        kinds=kinds,
        beta=args.beta,
        kind_only=args.kind_only,
    )
    body = report.to_dict()
    cfg = RunConfig(
        subcommand="eval",
        inputs={"src": args.src, "hyp": args.hyp, "ref": args.ref},
        strategy=None,
        seed=_resolve_seed(None),
        beta=args.beta,
        annotator=0,
        workers=1,
        kind_only=args.kind_only,
    )
    if args.json:
        _print_json({"config": cfg.to_dict(), "report": body})
    else:
        print(render_eval_table(report))
    if args.figure:
        from .figures import save_eval_figure

        save_eval_figure(body, args.figure)
    return 0


def cmd_quantexp(args) -> int:
    kind = parse_kind(args.action)
    corpus = read_parallel(args.src, args.ref)
    if args.mode == "prepare":
        subset, checked = build_action_subsets(corpus, kind)
        if not subset:
            print(
                f"warning: no instances with {kind} units; subset files are empty",
                file=sys.stderr,
            )
        os.makedirs(args.out_dir, exist_ok=True)
        write_sentences([i.source for i in subset], os.path.join(args.out_dir, "raw.src"))
        write_sentences([i.reference for i in subset], os.path.join(args.out_dir, "raw.ref"))
        write_sentences(
            [i.source for i in checked], os.path.join(args.out_dir, "checked.src")
        )
        write_sentences(
            [i.reference for i in checked], os.path.join(args.out_dir, "checked.ref")
        )
        return 0

    pred_raw = read_sentences(args.pred_raw)
    pred_checked = read_sentences(args.pred_checked)
    result = quantexp(
        corpus, pred_raw, pred_checked, kind, beta=args.beta, kind_only=args.kind_only
    )
    cfg = RunConfig(
        subcommand="quantexp",
        inputs={
            "src": args.src,
            "ref": args.ref,
            "pred_raw": args.pred_raw,
            "pred_checked": args.pred_checked,
        },
        strategy=None,
        seed=_resolve_seed(None),
        beta=args.beta,
        annotator=0,
        workers=1,
        kind_only=args.kind_only,
    )
    if args.json:
        _print_json({"config": cfg.to_dict(), "report": result})
    else:
        print(render_quantexp_table(result))
    if args.figure:
        from .figures import save_quantexp_figure

        save_quantexp_figure(result, args.figure)
    return 0


def cmd_m2(args) -> int:
    doc = parse_m2(args.convert)
    instances = m2_to_parallel(doc, annotator=args.annotator)
    write_sentences([i.source for i in instances], args.out_src)
    write_sentences([i.reference for i in instances], args.out_ref)
    return 0


def _loss_components(rec: dict, index: int):
    for key in ("log_probs", "gold"):
        if key not in rec:
            raise DataError(f"record {index}: missing key {key!r}")
    second = None
    if "second" in rec:
        body = rec["second"]
        if "log_probs" not in body or "gold" not in body:
            raise DataError(f"record {index}: 'second' needs log_probs and gold")
        second = (body["log_probs"], body["gold"])
    try:
        return losses(
            rec["log_probs"],
            rec["gold"],
            mask=rec.get("mask"),
            ged_gold=rec.get("ged_gold"),
            ged_log_probs=rec.get("ged_log_probs"),
            second=second,
        )
    except DataError as exc:
        raise DataError(f"record {index}: {exc}") from None


def cmd_loss(args) -> int:
    records = read_jsonl(args.input)
    totals = {"l_d": 0.0, "l_c": 0.0, "l_c1": 0.0, "l_c2": 0.0, "l_total": 0.0}
    for i, rec in enumerate(records):
        report = _loss_components(rec, i)
        for key in ("l_d", "l_c", "l_c1", "l_c2"):
            totals[key] += getattr(report, key)
        totals["l_total"] += report.l_total
    body = {"records": len(records), **totals}
    cfg = RunConfig(
        subcommand="loss",
        inputs={"input": args.input},
        strategy=None,
        seed=_resolve_seed(None),
        beta=0.5,
        annotator=0,
        workers=1,
    )
    if args.json:
        _print_json({"config": cfg.to_dict(), "report": body})
    else:
        width = max(len(k) for k in totals)
        print(f"records {body['records']}")
        for key in ("l_d", "l_c", "l_c1", "l_c2", "l_total"):
            print(f"{key:<{width}} {totals[key]:.6f}")
    if args.figure:
        from .figures import save_loss_figure

        save_loss_figure(body, args.figure)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="tmtc",
        description=(
            "Construct multi-turn correction training data for grammatical "
            "error correction, and evaluate correction predictions."
        ),
        epilog=JSONL_SCHEMA_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def add_figure(p):
        p.add_argument("--figure", metavar="PATH", help="render a summary figure to PATH")

    def add_json(p):
        p.add_argument("--json", action="store_true", help="emit a JSON report on stdout")

    p = sub.add_parser(
        "derive",
        help="derive editing-action labels for parallel files",
        epilog=JSONL_SCHEMA_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("src")
    p.add_argument("ref")
    p.add_argument("-o", "--out", required=True)
    p.add_argument(
        "--sentinel",
        action="store_true",
        help="always render the sentinel slot as labels[0]",
    )
    p.set_defaults(func=cmd_derive)

    p = sub.add_parser(
        "apply",
        help="apply label records to their sources",
        epilog=JSONL_SCHEMA_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("input", help="JSONL records with src and labels")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser(
        "construct",
        help="expand a parallel corpus into multi-turn instances",
        epilog=JSONL_SCHEMA_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("src")
    p.add_argument("ref")
    p.add_argument("-o", "--out", required=True)
    p.add_argument(
        "--strategy",
        required=True,
        choices=["random", "append-first", "delete-first", "replace-first", "ordered", "kturn"],
    )
    p.add_argument("--ratio", type=float, default=0.5, help="random strategy: fraction of units corrected first (default 0.5)")
    p.add_argument("--turns", type=int, default=None, help="kturn strategy: number of turns K (>= 2)")
    p.add_argument("--order", default=None, help="ordered strategy: 2-3 distinct kinds, e.g. app+rep+del")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: TMTC_SEED or 42)")
    p.add_argument(
        "--include-original",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="also emit each original pair as a final turn",
    )
    p.add_argument(
        "--invert-typefirst",
        action="store_true",
        help="type-first strategies leave the featured kind uncorrected in the intermediate instead",
    )
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sentinel", action="store_true", help="always render the sentinel slot as labels[0]")
    add_json(p)
    add_figure(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser(
        "stats",
        help="summarize a JSONL corpus",
        epilog=JSONL_SCHEMA_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("input")
    add_json(p)
    add_figure(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("eval", help="score hypothesis sentences per label kind")
    p.add_argument("src")
    p.add_argument("hyp")
    p.add_argument("ref")
    p.add_argument("--labels", default=None, help="kinds to score, e.g. append,delete or app+del (default all)")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--kind-only", action="store_true", help="match edits by (anchor, kind) and ignore argument tokens")
    add_json(p)
    add_figure(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser(
        "quantexp",
        help="type-interdependence experiment over pre-corrected subsets",
        epilog=QUANTEXP_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    qsub = p.add_subparsers(dest="mode", required=True, parser_class=_Parser)
    q = qsub.add_parser(
        "prepare",
        help="emit subset files for external inference",
        epilog=QUANTEXP_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    q.add_argument("src")
    q.add_argument("ref")
    q.add_argument("--action", required=True, help="featured kind: append|delete|replace")
    q.add_argument("--out-dir", required=True)
    q.set_defaults(func=cmd_quantexp)
    q = qsub.add_parser(
        "score",
        help="score external predictions on both subsets",
        epilog=QUANTEXP_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    q.add_argument("src")
    q.add_argument("ref")
    q.add_argument("--action", required=True)
    q.add_argument("--pred-raw", required=True)
    q.add_argument("--pred-checked", required=True)
    q.add_argument("--beta", type=float, default=1.0)
    q.add_argument("--kind-only", action="store_true")
    add_json(q)
    add_figure(q)
    q.set_defaults(func=cmd_quantexp)

    p = sub.add_parser("m2", help="convert M2 annotation files to parallel text")
    p.add_argument("--convert", required=True, metavar="M2_FILE")
    p.add_argument("--annotator", type=int, default=0)
    p.add_argument("--out-src", required=True)
    p.add_argument("--out-ref", required=True)
    p.set_defaults(func=cmd_m2)

    p = sub.add_parser(
        "loss",
        help="compute loss components from log-probability tables",
        epilog=LOSS_INPUT_DOC,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("input")
    add_json(p)
    add_figure(p)
    p.set_defaults(func=cmd_loss)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tmtc: error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"tmtc: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"tmtc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
