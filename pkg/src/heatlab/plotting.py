"""Figure rendering for report output.

Every curve written to plotdata/*.csv gets a matching PNG; the renderer is
headless (Agg) and keeps the files free of timestamps so report directories
stay reproducible.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_curve(path, series, xlabel, ylabel, title="", loglog=True):
    """series: list of (label, xs, ys)."""
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for label, xs, ys in series:
        if loglog:
            ax.loglog(xs, ys, marker="o", markersize=3, linewidth=1.2,
                      label=label)
        else:
            ax.plot(xs, ys, marker="o", markersize=3, linewidth=1.2,
                    label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=10)
    if len(series) > 1:
        ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": "heatlab"})
    plt.close(fig)
    return path
