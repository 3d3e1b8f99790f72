#!/usr/bin/env python3
"""Sample plot script for convergence-mode CSVs.

Usage: python3 docs/plot_convergence.py out/quad_fig1a.csv [plot.png]

Aggregates grad_norm over seeds per (strategy, gamma, epoch) and draws one
panel per gamma. Not part of the tested surface.
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main() -> None:
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    csv_path = sys.argv[1]
    out_path = sys.argv[2] if len(sys.argv) > 2 else "convergence.png"

    df = pd.read_csv(csv_path, comment="#")
    gammas = sorted(df["gamma"].unique(), reverse=True)

    fig, axes = plt.subplots(1, len(gammas), figsize=(5 * len(gammas), 4),
                             sharey=True, squeeze=False)
    for ax, gamma in zip(axes[0], gammas):
        sub = df[df["gamma"] == gamma]
        for strategy, group in sub.groupby("strategy"):
            stats = group.groupby("epoch")["grad_norm"].agg(["mean", "sem"])
            ci = 1.96 * stats["sem"].fillna(0.0)
            ax.plot(stats.index, stats["mean"], label=strategy)
            ax.fill_between(stats.index, stats["mean"] - ci,
                            stats["mean"] + ci, alpha=0.2)
        ax.set_yscale("log")
        ax.set_xlabel("epoch")
        ax.set_title(f"gamma = {gamma:g}")
        ax.legend()
    axes[0][0].set_ylabel("full gradient norm")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    print(f"wrote {out_path}")


if __name__ == "__main__":
    main()
