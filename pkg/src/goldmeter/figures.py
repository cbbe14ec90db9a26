"""Figure rendering for the report path.

Each delimited output has a companion PNG: the outcome histogram next to
the histogram CSV, and the dephasing sweep next to the sweep CSV. Rendering
is headless (Agg) and file-only.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .ensemble import EnsembleReport  # noqa: E402


def save_histogram_figure(
    report: EnsembleReport,
    path: str | Path,
    labels: Optional[Sequence[str]] = None,
    title: str = "meter outcome statistics",
) -> None:
    """Bar chart of collapsed-outcome frequencies against Born targets."""
    indices = sorted(report.counts)
    freqs = [report.frequencies.get(n, 0.0) for n in indices]
    targets = [report.born_targets[n] for n in indices]
    ticks = [labels[n] if labels else str(n) for n in indices]

    fig, ax = plt.subplots(figsize=(6, 4))
    x = range(len(indices))
    ax.bar([i - 0.2 for i in x], freqs, width=0.4, label="observed frequency")
    ax.bar([i + 0.2 for i in x], targets, width=0.4, label="Born target", alpha=0.7)
    ax.set_xticks(list(x))
    ax.set_xticklabels(ticks)
    ax.set_xlabel("meter eigenvalue index")
    ax.set_ylabel("probability")
    subtitle = f"n={report.n_copies}, refused={report.refused}"
    if report.chi_square is not None:
        subtitle += f", chi2={report.chi_square:.3g}"
    ax.set_title(f"{title}\n{subtitle}", fontsize=10)
    ax.legend()
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_dephasing_figure(
    ts: Sequence[float],
    suppression_columns: dict[str, Sequence[float]],
    path: str | Path,
    envelope: Optional[dict[str, Sequence[float]]] = None,
    title: str = "off-diagonal suppression",
) -> None:
    """Semilog plot of |off-diagonal suppression| per meter pair over time.

    ``envelope`` optionally adds dashed analytic curves keyed like the
    suppression columns.
    """
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, col in suppression_columns.items():
        ax.semilogy(ts, [max(v, 1e-18) for v in col], label=name)
    if envelope:
        for name, col in envelope.items():
            ax.semilogy(ts, [max(v, 1e-18) for v in col], "--", alpha=0.6,
                        label=f"{name} (gaussian envelope)")
    ax.set_xlabel("interaction time")
    ax.set_ylabel("|suppression factor|")
    ax.set_title(title, fontsize=10)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
