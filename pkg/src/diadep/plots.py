"""Figure output for the report subcommands.

Every plot writes straight to a file; the Agg backend keeps things
headless so reports render the same everywhere.
"""

from __future__ import annotations

import warnings
from typing import Mapping, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib import font_manager

from .treebank import Dialogue, to_global_tree

# prefer a CJK-capable font when one is installed; otherwise fall back
# quietly (boxes instead of glyphs, layout unaffected)
_CJK_FONTS = ("Noto Sans CJK SC", "WenQuanYi Zen Hei", "AR PL UMing CN", "SimHei")
_available = {f.name for f in font_manager.fontManager.ttflist}
for _name in _CJK_FONTS:
    if _name in _available:
        matplotlib.rcParams["font.sans-serif"] = [_name] + list(
            matplotlib.rcParams["font.sans-serif"]
        )
        break
else:
    warnings.filterwarnings("ignore", message=r"Glyph .* missing from font")


def save_sweep_curve(rows, path: str) -> None:
    """Kept-sample counts against the confidence threshold, one line per
    view plus the merged union."""
    fig, ax = plt.subplots(figsize=(6, 4))
    eps = [r.epsilon for r in rows]
    names = sorted({name for r in rows for name in r.kept})
    for name in names:
        ax.plot(eps, [r.kept.get(name, 0) for r in rows], marker="o", label=name)
    ax.plot(eps, [r.merged for r in rows], marker="s", linestyle="--", label="merged")
    ax.set_xlabel("confidence threshold")
    ax.set_ylabel("instances kept")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_label_bars(
    scores: Mapping[str, Optional[float]],
    path: str,
    ylabel: str = "score",
    title: str = "",
) -> None:
    """Bar chart over labels; absent scores plot as zero-height hatched bars."""
    names = list(scores)
    values = [scores[n] if scores[n] is not None else 0.0 for n in names]
    hatches = ["//" if scores[n] is None else "" for n in names]
    fig, ax = plt.subplots(figsize=(max(6, 0.4 * len(names)), 4))
    bars = ax.bar(range(len(names)), values)
    for bar, hatch in zip(bars, hatches):
        bar.set_hatch(hatch)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=60, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_arc_diagram(dialogue: Dialogue, path: str) -> None:
    """Dependency arcs drawn above the token row of the global tree."""
    arcs = to_global_tree(dialogue)
    forms = [t.form for u in dialogue.utterances for t in u.tokens]
    n = len(forms)
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * n), 4))
    ax.set_xlim(-0.5, n + 0.5)
    ax.set_ylim(0, max(3.0, n / 3))
    ax.axis("off")
    for i, form in enumerate(forms, start=1):
        ax.text(i, 0.1, form, ha="center", fontsize=9)
    boundaries = []
    pos = 0
    for utt in dialogue.utterances[:-1]:
        pos += len(utt)
        boundaries.append(pos + 0.5)
    for b in boundaries:
        ax.axvline(b, color="0.8", linestyle=":", linewidth=1)
    for idx, head, label in arcs:
        if head == 0:
            ax.annotate(
                label,
                xy=(idx, 0.35),
                xytext=(idx, max(2.5, n / 4)),
                ha="center",
                fontsize=8,
                arrowprops=dict(arrowstyle="->", color="0.3"),
            )
            continue
        center = (idx + head) / 2
        height = 0.3 + abs(idx - head) / 4
        ax.annotate(
            "",
            xy=(idx, 0.3),
            xytext=(head, 0.3),
            arrowprops=dict(arrowstyle="->", connectionstyle=f"arc3,rad={0.4}"),
        )
        ax.text(center, 0.35 + height / 2, label, ha="center", fontsize=7, color="0.25")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
