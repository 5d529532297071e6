"""Figure rendering for experiment reports.

Uses the file-only matplotlib backend so rendering works headless; every
function writes a PNG and returns the path it wrote.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import UsageError
from .harness import ExperimentReport


def render_tightness(report: ExperimentReport, path: str) -> str:
    """Scatter of colors-used over the iterated-f budget against measured
    diversity, with the per-sweep-point worst case drawn as a line."""
    rows = [r for r in report.rows if r.delta is not None and r.fstar and r.chi_hi]
    if not rows:
        raise UsageError("report has no tightness rows to plot")
    xs = [math.log2(r.delta) for r in rows]
    ys = [r.chi_hi / r.fstar for r in rows]

    worst: dict[int, float] = {}
    for x, y in zip(xs, ys):
        b = round(x)
        worst[b] = max(worst.get(b, 0.0), y)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.scatter(xs, ys, s=12, alpha=0.45, label="trials")
    ks = sorted(worst)
    ax.plot(ks, [worst[k] for k in ks], "o-", color="crimson", label="worst per sweep point")
    ax.set_xlabel("log2 sensitivity diversity")
    ax.set_ylabel("colors used / iterated-f budget")
    ax.set_title("Coloring tightness against the iterated-f budget")
    ax.axhline(1.0, color="gray", lw=0.8, ls="--")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_lowerbound(report: ExperimentReport, path: str) -> str:
    """Growth of the baseline clique (or color count) against instance size
    for lower-bound families."""
    rows = [r for r in report.rows if r.chi_hi is not None]
    if not rows:
        raise UsageError("report has no lower-bound rows to plot")
    xs = [r.n for r in rows]
    ys = [r.chi_hi for r in rows]
    ds = [r.delta for r in rows]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(xs, ys, "o-")
    ax1.set_xlabel("links")
    ax1.set_ylabel("colors in measured graph")
    ax1.set_title(str(report.meta.get("kind", "lower bound")))
    if all(d is not None and d > 0 for d in ds):
        ax2.semilogy(xs, ds, "s-", color="darkgreen")
        ax2.set_xlabel("links")
        ax2.set_ylabel("sensitivity diversity")
        ax2.set_title("diversity growth")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
