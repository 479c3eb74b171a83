"""Matplotlib rendering of sweep outputs to files.

Figures accompany the delimited output of the CLI sweep commands; the CSV
remains the machine contract.  The Agg backend keeps rendering headless
and deterministic.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

REGION_COLORS = {
    "A1": "#1f77b4",
    "A2": "#6baed6",
    "B": "#2ca02c",
    "C": "#ff7f0e",
    "D1": "#9467bd",
    "D2": "#c5b0d5",
    "E": "#d62728",
}

_DPI = 150


def render_region_map(rows, path):
    """Scatter of region labels over the (m1, r) plane."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    by_region = {}
    for row in rows:
        by_region.setdefault(row["region"], ([], []))
        by_region[row["region"]][0].append(row["m1"])
        by_region[row["region"]][1].append(row["r"])
    for label in sorted(by_region):
        xs, ys = by_region[label]
        ax.scatter(xs, ys, s=6, label=label, color=REGION_COLORS.get(label, "gray"))
    ax.set_xlabel("$m_1$")
    ax.set_ylabel("$r$")
    ax.set_title("Bound regimes in the $(m_1, r)$ plane")
    ax.legend(loc="best", fontsize=8, markerscale=2)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_gclosure(rows, path):
    """Effective eigenvalues versus r with comparison bounds."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    r = [row["r"] for row in rows]
    ax.plot(r, [row["k_star1"] for row in rows], "-", label="$k_{*1}$")
    ax.plot(r, [row["k_star2"] for row in rows], "-", label="$k_{*2}$")
    ax.plot(r, [row["harmonic"] for row in rows], ":", color="gray", label="harmonic")
    ax.plot(r, [row["transl_k1"] for row in rows], "--", color="gray",
            label="translation $k_{*1}$")
    ax.plot(r, [row["transl_k2"] for row in rows], "-.", color="gray",
            label="translation $k_{*2}$")
    ax.set_xlabel("$r$")
    ax.set_ylabel("effective eigenvalue")
    ax.set_title("G-closure boundary eigenvalues")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_gap_sweep(rows, path):
    """Relative bound/structure gap across region E (log-log)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog([row["r"] for row in rows], [row["delta_rel"] for row in rows], "-")
    ax.set_xlabel("$r$")
    ax.set_ylabel("relative gap")
    ax.set_title("Bound/structure gap in region E")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
