"""File-rendering helpers for the report path: CSV tables and PNG figures.

Everything here is presentation only; numbers are computed upstream and
passed in.  The Agg backend keeps rendering headless and deterministic.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def fig_probe(path, rows):
    """rows: (k, value, ratio) triples from a truncation probe."""
    ks = [r[0] for r in rows]
    vals = [r[1] for r in rows]
    ratios = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(ks, vals, "o-", color="tab:blue", label="certificate value")
    ax.set_xlabel("certificate length k")
    ax.set_ylabel("value", color="tab:blue")
    ax2 = ax.twinx()
    ax2.plot(ks, ratios, "s--", color="tab:red", label="ratio to largest k")
    ax2.set_ylabel("ratio", color="tab:red")
    ax2.axhline(1.0, color="tab:red", lw=0.6, alpha=0.4)
    ax.set_title("truncation probe")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def fig_net2d(path, space, net):
    fig, ax = plt.subplots(figsize=(4.2, 4.2))
    theta = np.linspace(0, 2 * np.pi, 720, endpoint=False)
    circle = np.column_stack([np.cos(theta), np.sin(theta)])
    sphere = circle / space.dual_norm_batch(circle)[:, None]
    ax.plot(sphere[:, 0], sphere[:, 1], color="0.7", lw=1.0, label="dual sphere")
    ax.plot(net[:, 0], net[:, 1], "o", ms=3.5, color="tab:blue", label="net points")
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"dual-sphere net ({len(net)} points)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def fig_nakano(path, labels, ratios, threshold=None):
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    xs = np.arange(len(labels))
    ax.bar(xs, ratios, color="tab:blue", width=0.6)
    ax.axhline(1.0, color="k", lw=0.8)
    if threshold is not None:
        ax.axhline(threshold, color="tab:red", lw=0.8, ls="--", label=f"threshold {threshold:g}")
        ax.legend(fontsize=8)
    ax.set_xticks(xs)
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("bound / sup of member norms")
    ax.set_title("upper-bound ratios per family")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def fig_witness(path, levels, values, integral):
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(levels, values, "o-", color="tab:blue", label="family value at test point")
    ax.axhline(integral, color="tab:green", lw=0.8, ls="--", label="step-function integral")
    ax.set_xlabel("level")
    ax.set_ylabel("exact value")
    ax.set_title("dyadic stabilization")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
