"""Report figures rendered to files next to the delimited outputs.

Everything draws through the Agg backend and strips volatile metadata so
repeated runs write byte-identical images.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

CASE_LABELS = [f"Case {i}" for i in range(6)]


def savefig(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, metadata={"Software": "evtwin"})
    plt.close(fig)
    return path


def fig_policy_sweep(cells, out: str | Path) -> Path:
    """Grouped bars: mean satisfaction per policy case, one group per EV
    level, with seed-spread whiskers."""
    levels = sorted({lv for lv, _ in cells})
    cases = sorted({c for _, c in cells})
    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.8 / len(cases)
    x = np.arange(len(levels))
    for j, case in enumerate(cases):
        means = [cells[(lv, case)].mean for lv in levels]
        sds = [cells[(lv, case)].sd for lv in levels]
        ax.bar(x + j * width, means, width, yerr=sds, capsize=2, label=f"Case {case}")
    ax.set_xticks(x + width * (len(cases) - 1) / 2)
    ax.set_xticklabels([f"{lv} EVs" for lv in levels])
    ax.set_ylabel("Satisfaction")
    ax.set_ylim(0, 1.05)
    ax.legend(ncol=3, fontsize=8)
    ax.set_title("Satisfaction by policy case")
    fig.tight_layout()
    return savefig(fig, out)


def fig_grid_heatmap(results, space, out: str | Path) -> Path:
    """Mean satisfaction over the (11 kW, 30 kW) plane, averaged across the
    solar axis."""
    names = list(space.names)
    i11, i30 = names.index("n11_C"), names.index("n30_C")
    v11 = space.dims[i11].grid_values()
    v30 = space.dims[i30].grid_values()
    acc = np.zeros((len(v11), len(v30)))
    cnt = np.zeros_like(acc)
    for r in results:
        a = v11.index(r.candidate.values[i11])
        b = v30.index(r.candidate.values[i30])
        sat = r.metrics.satisfaction if r.metrics else np.nan
        acc[a, b] += sat
        cnt[a, b] += 1
    mean = acc / np.maximum(cnt, 1)
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(mean, origin="lower", aspect="auto", cmap="viridis", vmin=0, vmax=1)
    ax.set_xticks(range(len(v30)), [int(v) for v in v30])
    ax.set_yticks(range(len(v11)), [int(v) for v in v11])
    ax.set_xlabel("30 kW ports")
    ax.set_ylabel("11 kW ports")
    ax.set_title("Mean satisfaction (averaged over solar sizes)")
    fig.colorbar(im, ax=ax, label="satisfaction")
    fig.tight_layout()
    return savefig(fig, out)


def fig_solar_curve(results, space, out: str | Path) -> Path:
    """Metric trade-off vs panel count at the best-performing port mix."""
    names = list(space.names)
    isol = names.index("solar")
    best = results[0]
    fixed = tuple(
        v for i, v in enumerate(best.candidate.values) if i != isol
    )
    rows = sorted(
        (
            (r.candidate.values[isol], r.metrics)
            for r in results
            if tuple(v for i, v in enumerate(r.candidate.values) if i != isol) == fixed
            and r.metrics
        ),
    )
    solar = [s for s, _ in rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(solar, [m.normalized_payback for _, m in rows], "o-", label="normalized payback")
    ax.plot(solar, [m.self_sufficiency for _, m in rows], "s-", label="self-sufficiency")
    ax.plot(solar, [m.self_consumption for _, m in rows], "^-", label="self-consumption")
    ax.set_xlabel("solar panels")
    ax.set_ylabel("metric value")
    ax.set_ylim(0, 1.05)
    ax.legend()
    port_desc = ", ".join(
        f"{names[i]}={int(v)}" for i, v in enumerate(best.candidate.values) if i != isol
    )
    ax.set_title(f"Solar sizing trade-off at {port_desc}")
    fig.tight_layout()
    return savefig(fig, out)


def fig_optimizer_comparison(rows, out: str | Path) -> Path:
    """Per-algorithm NED to the exhaustive optimum and evaluations used."""
    algos = sorted({r.algorithm for r in rows})
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    neds = [[r.ned_to_grid_best for r in rows if r.algorithm == a] for a in algos]
    evals = [[r.evaluations_used for r in rows if r.algorithm == a] for a in algos]
    ax1.boxplot(neds, tick_labels=algos)
    ax1.set_ylabel("NED to grid best")
    ax1.tick_params(axis="x", rotation=30)
    ax2.boxplot(evals, tick_labels=algos)
    ax2.set_ylabel("evaluations used")
    ax2.tick_params(axis="x", rotation=30)
    fig.suptitle("Optimizer accuracy vs cost")
    fig.tight_layout()
    return savefig(fig, out)


def fig_sobol_heatmap(matrix, factor_names, metric_names, out: str | Path) -> Path:
    """Factor x metric heatmap of total-order indices."""
    m = np.asarray(matrix, dtype=float)
    fig, ax = plt.subplots(figsize=(1.6 + 1.1 * len(metric_names), 0.9 + 0.55 * len(factor_names)))
    im = ax.imshow(m, cmap="YlOrRd", vmin=0, vmax=max(1.0, float(np.nanmax(m))))
    ax.set_xticks(range(len(metric_names)), metric_names, rotation=30, ha="right")
    ax.set_yticks(range(len(factor_names)), factor_names)
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            ax.text(j, i, f"{m[i, j]:.2f}", ha="center", va="center", fontsize=8)
    ax.set_title("Total-order sensitivity (ST)")
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    return savefig(fig, out)


def fig_run_days(day_reports, out: str | Path) -> Path:
    """Daily energy flows and satisfaction for one run."""
    days = [r.day for r in day_reports]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    solar = [r.ledger_day.solar_generated_kwh for r in day_reports]
    wind = [r.ledger_day.wind_generated_kwh for r in day_reports]
    served = [r.ledger_day.renewable_served_kwh for r in day_reports]
    grid = [r.ledger_day.grid_import_kwh for r in day_reports]
    ax1.bar(days, solar, label="solar gen", color="#f4b942")
    ax1.bar(days, wind, bottom=solar, label="wind gen", color="#7fb3d5")
    ax1.plot(days, served, "g.-", label="renewable served")
    ax1.plot(days, grid, "r.-", label="grid import")
    ax1.set_ylabel("kWh/day")
    ax1.legend(fontsize=8, ncol=2)
    sats = [
        (r.ev_satisfied / r.ev_requested if r.ev_requested else 1.0) for r in day_reports
    ]
    ax2.plot(days, sats, "b.-")
    ax2.set_ylim(0, 1.05)
    ax2.set_ylabel("satisfaction")
    ax2.set_xlabel("day")
    fig.tight_layout()
    return savefig(fig, out)
