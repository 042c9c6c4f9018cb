"""Render a diagnostic figure for an experiment result.

Plots are described declaratively in ExperimentResult.plot so the rendering
stays in one place and the experiment code never touches matplotlib.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .experiments import ExperimentResult


def render_figure(result: ExperimentResult, path: str) -> bool:
    """Write a PNG for the result. Returns False if it has no plot spec."""
    spec = result.plot
    if spec is None:
        return False
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    kind = spec["kind"]
    if kind == "dist_compare":
        x = np.asarray(spec["x"])
        width = 0.8 / len(spec["series"])
        for i, (label, ys) in enumerate(spec["series"].items()):
            ax.bar(x + (i - 0.5) * width, ys, width=width, label=label)
        ax.set_ylabel("probability")
    elif kind == "lines":
        for label, ys in spec["series"].items():
            ax.plot(spec["x"], ys, marker="o", label=label)
        if "hline" in spec:
            ax.axhline(spec["hline"], color="k", ls="--", lw=0.8, label="target")
        if "scatter" in spec:
            a, b = spec["scatter"]
            ax.plot(a, b, ".", ms=3, label="load vs bound")
            lim = max(np.max(a), np.max(b))
            ax.plot([0, lim], [0, lim], "k--", lw=0.8)
            ax.set_xlabel("D")
            ax.set_ylabel("-ln p0")
    elif kind == "ladder":
        ax.errorbar(spec["N"], spec["value"],
                    yerr=[spec["value"] - spec["lo"], spec["hi"] - spec["value"]],
                    marker="o", capsize=4)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("N")
        ax.set_ylabel(spec.get("ylabel", "distance"))
    elif kind == "hist_density":
        ax.hist(spec["sample"], bins=80, density=True, alpha=0.5, label="occupancy")
        ax.plot(spec["x"], spec["density"], "r-", label="stationary density")
        ax.set_ylim(0, min(ax.get_ylim()[1], np.percentile(spec["density"], 98) * 2))
    elif kind == "qq":
        qs = np.linspace(0.005, 0.995, 199)
        qa = np.quantile(spec["a"], qs)
        qb = np.quantile(spec["b"], qs)
        ax.plot(qa, qb, ".", ms=4)
        lo, hi = min(qa.min(), qb.min()), max(qa.max(), qb.max())
        ax.plot([lo, hi], [lo, hi], "k--", lw=0.8)
        ax.set_xlabel(spec["labels"][0])
        ax.set_ylabel(spec["labels"][1])
    elif kind == "transform":
        cols = spec["table_cols"]
        lam = np.asarray(result.table[cols[0]])
        order = np.argsort(lam, kind="stable")
        ax.plot(lam[order], np.asarray(result.table[cols[1]])[order], "k.",
                label="closed form")
        ax.plot(lam[order], np.asarray(result.table[cols[2]])[order], "x",
                label="exact sampler")
        ax.plot(lam[order], np.asarray(result.table[cols[3]])[order], "+",
                label="Euler-Maruyama")
        ax.set_xlabel("lambda")
        ax.set_ylabel("Laplace transform")
    else:
        plt.close(fig)
        raise ValueError(f"unknown plot kind {kind!r}")
    if "xlabel" in spec and kind not in ("ladder",):
        ax.set_xlabel(spec["xlabel"])
    if spec.get("title"):
        ax.set_title(spec["title"])
    handles, _ = ax.get_legend_handles_labels()
    if handles:
        ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return True
