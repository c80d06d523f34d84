"""SVG population chart for a transform census (headless matplotlib)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# the SVG backend stamps a date and random ids unless told otherwise
matplotlib.rcParams["svg.hashsalt"] = "g6niggli"


def plot_populations(counts, path, labels=None, title="Boundary transform census",
                     highlight=None):
    """Bar chart of ``counts`` (descending) on a log axis, saved as SVG.

    ``highlight`` marks bars to draw in a second colour (e.g. catalog matrices).
    """
    counts = list(counts)
    labels = list(labels) if labels is not None else [str(i + 1) for i in range(len(counts))]
    highlight = set(highlight or ())
    fig, ax = plt.subplots(figsize=(max(6.0, 0.28 * len(counts) + 2), 4.0))
    colours = ["tab:blue" if i in highlight else "tab:gray" for i in range(len(counts))]
    ax.bar(range(len(counts)), counts, color=colours)
    ax.set_yscale("log")
    ax.set_xticks(range(len(counts)))
    ax.set_xticklabels(labels, rotation=90, fontsize=7)
    ax.set_xlabel("transform (ranked by population)")
    ax.set_ylabel("occurrences")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
