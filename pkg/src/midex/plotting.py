"""Figure rendering for run and sweep reports.

Kept apart from the harness so data generation never imports matplotlib;
the CLI report path is the only caller.  Figures are illustrative
companions to the CSV/JSON artifacts and carry no determinism guarantee.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .learner import simplified_regret_bound

plt.rcParams.update({
    "figure.figsize": (7.0, 4.5),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
})


def regret_figure(agg, path):
    """Mean cumulative regret with a one-std band and the tuned-rate guide."""
    curve = agg.curve
    t = curve.t_points
    fig, ax = plt.subplots()
    ax.plot(t, curve.regret_mean, color="tab:blue", lw=1.6,
            label=f"{agg.config.algorithm} (n={agg.config.replications})")
    if agg.config.replications > 1:
        ax.fill_between(t, curve.regret_mean - curve.regret_std,
                        curve.regret_mean + curve.regret_std,
                        color="tab:blue", alpha=0.2, lw=0)
    if agg.multi_curve is not None:
        ax.plot(t, agg.multi_curve.regret_mean, color="tab:orange", lw=1.4,
                label="wrapped multiset play")
    guide = np.array([simplified_regret_bound(agg.config.K, int(v)) for v in t])
    ax.plot(t, guide, color="gray", ls="--", lw=1.0, label="T^(2/3) guarantee scale")
    ax.set_xlabel("round")
    ax.set_ylabel("cumulative regret")
    ax.set_title(f"K={agg.config.K}, T={agg.config.T}, seed={agg.config.seed}")
    ax.legend(loc="upper left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def sweep_figure(rows, path):
    """Log-log mean final regret against horizon, one line per arm count."""
    fig, ax = plt.subplots()
    for k in sorted({r["K"] for r in rows}):
        cells = sorted((r for r in rows if r["K"] == k), key=lambda r: r["T"])
        ts = [r["T"] for r in cells]
        means = [r["mean_final_regret"] for r in cells]
        ax.plot(ts, means, marker="o", lw=1.4, label=f"K={k}")
        ax.plot(ts, [r["bound_simplified"] for r in cells],
                ls="--", lw=1.0, color="gray")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("horizon T")
    ax.set_ylabel("mean final regret")
    ax.set_title("scaling against the guarantee (dashed)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
