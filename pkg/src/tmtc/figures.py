"""Figure rendering for report outputs.

Every report-producing subcommand accepts ``--figure PATH`` and, when
given, renders a summary chart next to its delimited/JSON output. The
Agg backend is forced so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_stats_figure(stats: dict, path: str) -> str:
    fig, (ax_turn, ax_label) = plt.subplots(1, 2, figsize=(9, 3.6))

    turns = list(stats["per_turn"].keys())
    ax_turn.bar(turns, [stats["per_turn"][t] for t in turns], color="#4878d0")
    ax_turn.set_xlabel("turn")
    ax_turn.set_ylabel("records")
    ax_turn.set_title("records per turn")

    families = list(stats["label_frequencies"].keys())
    ax_label.bar(
        families,
        [stats["label_frequencies"][f] for f in families],
        color="#ee854a",
    )
    ax_label.set_ylabel("tokens")
    ax_label.set_title("label frequencies")
    ax_label.tick_params(axis="x", rotation=20)

    fig.suptitle(
        f"{stats['records']} records, {stats['additional_instances']} additional, "
        f"mask-zero rate {stats['mask_zero_rate']:.3f}"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_eval_figure(report: dict, path: str) -> str:
    kinds = list(report["kinds"].keys())
    metrics = ("precision", "recall", "f")
    colors = ("#4878d0", "#ee854a", "#6acc64")
    width = 0.27

    fig, ax = plt.subplots(figsize=(1.8 + 2.2 * max(1, len(kinds)), 3.6))
    for m_idx, metric in enumerate(metrics):
        xs = [k_idx + (m_idx - 1) * width for k_idx in range(len(kinds))]
        ax.bar(
            xs,
            [report["kinds"][k][metric] for k in kinds],
            width=width,
            label=metric,
            color=colors[m_idx],
        )
    ax.set_xticks(range(len(kinds)))
    ax.set_xticklabels(kinds)
    ax.set_ylim(0, 100)
    ax.set_ylabel("%")
    ax.set_title(f"per-kind scores (beta={report['beta']:g})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_quantexp_figure(result: dict, path: str) -> str:
    kinds = list(result["kinds"].keys())
    width = 0.35

    fig, ax = plt.subplots(figsize=(2.4 + 2.2 * max(1, len(kinds)), 3.8))
    for offset, (variant, color) in enumerate(
        (("raw", "#4878d0"), ("checked", "#6acc64"))
    ):
        xs = [k_idx + (offset - 0.5) * width for k_idx in range(len(kinds))]
        ax.bar(
            xs,
            [result["kinds"][k][variant]["f"] for k in kinds],
            width=width,
            label=variant,
            color=color,
        )
    for k_idx, kind in enumerate(kinds):
        pair = result["kinds"][kind]
        top = max(pair["raw"]["f"], pair["checked"]["f"])
        ax.annotate(
            f"{pair['delta_f']:+.2f}",
            (k_idx, top),
            textcoords="offset points",
            xytext=(0, 4),
            ha="center",
            fontsize=9,
        )
    ax.set_xticks(range(len(kinds)))
    ax.set_xticklabels(kinds)
    ax.set_ylim(0, 105)
    ax.set_ylabel(f"F (beta={result['beta']:g}), %")
    ax.set_title(f"effect of pre-correcting {result['action']} errors")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_loss_figure(report: dict, path: str) -> str:
    components = ("l_d", "l_c", "l_c1", "l_c2", "l_total")
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.bar(components, [report[c] for c in components], color="#4878d0")
    ax.set_ylabel("nats")
    ax.set_title(f"loss components over {report['records']} records")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
