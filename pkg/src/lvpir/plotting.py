"""Figures for plan and audit reports, written to image files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .audit import AuditReport  # noqa: E402
from .planner import CostReport  # noqa: E402


def _style(ax):
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    ax.tick_params(direction="out")


def plot_costs(costs: dict[str, CostReport], path, title: str = "") -> None:
    """Grouped bars of per-message download cost, one series per scheme.

    Dashed lines mark each scheme's average.
    """
    names = list(costs)
    K = len(next(iter(costs.values())).per_message)
    x = np.arange(1, K + 1)
    width = 0.8 / len(names)
    fig, ax = plt.subplots(figsize=(max(5, 0.6 * K + 2), 3.5))
    for j, name in enumerate(names):
        c = costs[name]
        bars = ax.bar(x - 0.4 + width * (j + 0.5), [float(v) for v in c.per_message],
                      width, label=f"{name} (avg {c.average})")
        ax.axhline(float(c.average), color=bars.patches[0].get_facecolor(),
                   ls="--", lw=1)
    ax.set_xticks(x)
    ax.set_xlabel("requested message k")
    ax.set_ylabel("messages downloaded")
    ax.set_ylim(0, 1.3 * K + 0.5)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8, loc="upper left", ncol=len(names))
    _style(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_posteriors(report: AuditReport, path, max_queries: int = 24) -> None:
    """Posterior of S per realizable query next to the prior."""
    rows = report.per_query[:max_queries]
    T = len(report.prior)
    fig, ax = plt.subplots(figsize=(max(5, 0.5 * len(rows) + 2), 3.5))
    x = np.arange(len(rows))
    bottom = np.zeros(len(rows))
    cmap = plt.get_cmap("tab10")
    for t in range(T):
        vals = np.array([float(r.posterior[t]) for r in rows])
        ax.bar(x, vals, 0.6, bottom=bottom, color=cmap(t % 10), label=f"s{t + 1}")
        bottom += vals
    edges = np.cumsum([float(p) for p in report.prior])[:-1]
    for e in edges:
        ax.axhline(e, color="k", ls=":", lw=1)
    for i, r in enumerate(rows):
        if not r.exact_match:
            ax.text(i, 1.02, "x", ha="center", color="red")
    ax.set_xticks(x)
    ax.set_xticklabels(["{" + ",".join(map(str, r.query.members)) + "}" for r in rows],
                       rotation=60, fontsize=7)
    ax.set_ylim(0, 1.08)
    ax.set_ylabel("Pr(S | Q = q)")
    ax.set_title(f"posterior vs prior (dotted): {report.verdict}")
    ax.legend(frameon=False, fontsize=8, loc="upper left", bbox_to_anchor=(1, 1))
    _style(ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
