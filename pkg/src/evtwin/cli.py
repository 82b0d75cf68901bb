"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 runtime failure. Campaign commands
write line-delimited records plus summary CSVs into --out, and render
matplotlib figures next to them.
"""

from __future__ import annotations

import csv
import json
import statistics
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from . import experiments as ex
from . import plots
from .config import ScenarioError, load_scenario, save_scenario
from .metrics import compute_metrics
from .optimize import ALGORITHMS, OptimizerError, space_3d, space_5d
from .sim import World, run
from .site import default_site, to_geojson
from .stats import Factor, StatsError, ishigami, sobol_total_order, wilcoxon_signed_rank

SPACES = {"3d": space_3d, "5d": space_5d}


def _space_by_name(name: str):
    if name not in SPACES:
        raise click.UsageError(f"unknown space {name!r}; choose from {sorted(SPACES)}")
    return SPACES[name]()


def parse_seeds(spec: str) -> list[int]:
    """Seed list syntax: '7', '0,3,9', or '0:20' (half-open range)."""
    if ":" in spec:
        lo, hi = spec.split(":", 1)
        return list(range(int(lo), int(hi)))
    return [int(s) for s in spec.split(",") if s != ""]


def out_option(f):
    return click.option(
        "--out", type=click.Path(path_type=Path), default=Path("results"),
        show_default=True, help="Output directory."
    )(f)


def fmt_option(f):
    return click.option(
        "--format", "fmt", type=click.Choice(["jsonl", "csv"]), default="jsonl",
        show_default=True, help="Machine-readable summary format."
    )(f)


def _write_summary(rows: list[dict], out_dir: Path, name: str, fmt: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path = out_dir / f"{name}.csv"
        if rows:
            with open(path, "w", newline="", encoding="utf-8") as f:
                w = csv.DictWriter(f, fieldnames=list(rows[0].keys()), lineterminator="\n")
                w.writeheader()
                w.writerows(rows)
        else:
            path.write_text("", encoding="utf-8")
    else:
        path = out_dir / f"{name}.jsonl"
        with open(path, "w", encoding="utf-8") as f:
            for r in rows:
                f.write(json.dumps(r, sort_keys=True, separators=(",", ":")) + "\n")
    return path


@click.group()
def cli():
    """Digital twin of a campus EV charging site."""


@cli.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--days", type=int, default=None, help="Override the horizon.")
@out_option
@fmt_option
def cmd_run(config_path, seed, days, out, fmt):
    """Run one scenario and write day reports, metrics and figures."""
    cfg = load_scenario(config_path)
    if seed is not None:
        cfg = replace(cfg, rng_seed=seed)
    if days is not None:
        cfg = replace(cfg, horizon_days=days)
    world = World(cfg, collect_events=True)
    reports = [world.run_day(d) for d in range(cfg.horizon_days)]
    metrics = compute_metrics(reports, cfg.energy)

    out.mkdir(parents=True, exist_ok=True)
    _write_summary([r.as_dict() for r in reports], out, "day_reports", fmt)
    with open(out / "events.jsonl", "w", encoding="utf-8") as f:
        for e in world.events:
            f.write(json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n")
    summary = {
        "scenario_hash": cfg.scenario_hash(),
        "seed": cfg.rng_seed,
        "metrics": metrics.as_dict(),
    }
    (out / "metrics.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    plots.fig_run_days(reports, out / "run_days.png")
    click.echo(f"scenario {cfg.scenario_hash()} seed {cfg.rng_seed}: "
               f"objective {metrics.objective:.3f}, results in {out}")


@cli.command("batch")
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--seeds", default="0:20", show_default=True)
@out_option
@fmt_option
def cmd_batch(config_path, seeds, out, fmt):
    """Replicate a scenario over many seeds and summarize the metrics."""
    cfg = load_scenario(config_path)
    store = ex.ResultsStore(out)
    rows = []
    for seed in parse_seeds(seeds):
        scfg = replace(cfg, rng_seed=seed)
        shash = scfg.scenario_hash()
        if not store.has("batch", shash, seed):
            reports, metrics = ex.run_scenario(scfg)
            store.append(
                {
                    "experiment": "batch",
                    "scenario_hash": shash,
                    "seed": seed,
                    "metrics": metrics.as_dict(),
                    "day_reports_ref": None,
                }
            )
    for rec in store.records("batch"):
        rows.append({"seed": rec["seed"], **rec["metrics"]})
    rows.sort(key=lambda r: r["seed"])
    _write_summary(rows, out, "batch_summary", fmt)
    if rows:
        mean_obj = statistics.fmean(r["objective"] for r in rows)
        click.echo(f"{len(rows)} replicates, mean objective {mean_obj:.3f}")


@cli.command("policy-sweep")
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None,
              help="Base scenario; defaults to the built-in fixed-infrastructure case.")
@click.option("--levels", default="50,100,150,200", show_default=True)
@click.option("--cases", default="0,1,2,3,4,5", show_default=True)
@click.option("--seeds", default="0:20", show_default=True)
@out_option
@fmt_option
def cmd_policy_sweep(config_path, levels, cases, seeds, out, fmt):
    """Satisfaction across the six policy cases and EV demand levels."""
    base = load_scenario(config_path) if config_path else ex.policy_sweep_config()
    store = ex.ResultsStore(out)
    cells = ex.policy_sweep(
        base,
        ev_levels=[int(x) for x in levels.split(",")],
        cases=[int(x) for x in cases.split(",")],
        seeds=parse_seeds(seeds),
        store=store,
    )
    rows = [
        {
            "ev_level": lv,
            "case": case,
            "mean_satisfaction": round(cell.mean, 6),
            "sd": round(cell.sd, 6),
            "n": len(cell.satisfactions),
        }
        for (lv, case), cell in sorted(cells.items())
    ]
    _write_summary(rows, out, "policy_summary", fmt)
    tests = []
    case_list = sorted({c for _, c in cells})
    for lv in sorted({l for l, _ in cells}):
        for a, b in [(c, 0) for c in case_list if c != 0]:
            try:
                res = ex.sweep_wilcoxon(cells, lv, a, b)
                tests.append({"ev_level": lv, "case_a": a, "case_b": b, **res.as_dict()})
            except StatsError as exc:
                tests.append(
                    {"ev_level": lv, "case_a": a, "case_b": b, "error": str(exc)}
                )
    _write_summary(tests, out, "policy_wilcoxon", fmt)
    plots.fig_policy_sweep(cells, out / "policy_sweep.png")
    click.echo(f"{len(rows)} cells -> {out}")


@cli.command("grid")
@click.option("--space", "space_name", default="3d", show_default=True,
              help="Search space name (3d, 5d).")
@click.option("--ev", "ev_levels", default="100", show_default=True,
              help="EV level or comma list (e.g. 50,100,150,200).")
@click.option("--seeds", default="0", show_default=True)
@click.option("--cap", type=int, default=10_000, show_default=True)
@out_option
@fmt_option
def cmd_grid(space_name, ev_levels, seeds, cap, out, fmt):
    """Exhaustively evaluate a configuration grid per EV demand level."""
    space = _space_by_name(space_name)
    base = ex.grid_base_config(space)
    store = ex.ResultsStore(out)
    best_by_level = {}
    for ev in [int(x) for x in ev_levels.split(",")]:
        results = ex.grid_campaign(
            base, space, ev, seeds=tuple(parse_seeds(seeds)), store=store, cap=cap
        )
        rows = [
            {
                "candidate": ",".join(str(int(v)) for v in r.candidate.values),
                **{n: int(v) for n, v in zip(space.names, r.candidate.values)},
                "objective": round(r.objective, 6),
                **{
                    k: (round(v, 6) if isinstance(v, float) else v)
                    for k, v in (r.metrics.as_dict() if r.metrics else {}).items()
                },
            }
            for r in results
        ]
        path = _write_summary(rows, out, f"grid_{space_name}_ev{ev}", fmt)
        best = results[0]
        best_by_level[ev] = best
        plots.fig_grid_heatmap(results, space, out / f"grid_{space_name}_ev{ev}_heatmap.png")
        plots.fig_solar_curve(results, space, out / f"grid_{space_name}_ev{ev}_solar.png")
        click.echo(
            f"ev={ev}: {len(results)} configurations -> {path}; best "
            f"{tuple(int(v) for v in best.candidate.values)} objective {best.objective:.3f}"
        )
    _write_best_table(best_by_level, space, out / f"grid_{space_name}_best.csv")


def _write_best_table(best_by_level, space, path: Path) -> None:
    """Best-configuration table: one column per EV level, the classic
    rows (ports, panels, then the evaluation metrics)."""
    levels = sorted(best_by_level)
    rows = [("", *[f"{lv} EVs" for lv in levels])]
    for i, name in enumerate(space.names):
        label = {
            "n11_C": "No. CPs 11kW (C)",
            "n30_C": "No. CPs 30kW (C)",
            "n11_J": "No. CPs 11kW (J)",
            "n30_J": "No. CPs 30kW (J)",
            "solar": "No. Solar Panels",
        }.get(name, name)
        rows.append(
            (label, *[int(best_by_level[lv].candidate.values[i]) for lv in levels])
        )
    metric_rows = [
        ("Satisfaction Score", "satisfaction"),
        ("Self-Consumption", "self_consumption"),
        ("Self-Sufficiency", "self_sufficiency"),
        ("Normalized Payback", "normalized_payback"),
        ("Objective Function", "objective"),
    ]
    for label, key in metric_rows:
        rows.append(
            (
                label,
                *[round(best_by_level[lv].metrics.as_dict()[key], 2) for lv in levels],
            )
        )
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerows(rows)


@cli.command("optimize")
@click.option("--algo", "algos", default="pso", show_default=True,
              help=f"Comma list from {','.join(ALGORITHMS)} or 'all'.")
@click.option("--space", "space_name", default="3d", show_default=True,
              help="Search space name (3d, 5d).")
@click.option("--ev", type=int, default=100, show_default=True)
@click.option("--budget", type=int, default=55, show_default=True)
@click.option("--seeds", default="0:10", show_default=True)
@click.option("--grid-best", "grid_best_str", default=None,
              help="Comma-separated exhaustive optimum; otherwise read from the store.")
@out_option
@fmt_option
def cmd_optimize(algos, space_name, ev, budget, seeds, grid_best_str, out, fmt):
    """Metaheuristic search with comparison against the exhaustive optimum."""
    space = _space_by_name(space_name)
    base = ex.grid_base_config(space)
    store = ex.ResultsStore(out)
    algorithms = list(ALGORITHMS) if algos == "all" else algos.split(",")
    for a in algorithms:
        if a not in ALGORITHMS:
            raise click.UsageError(f"unknown algorithm {a!r}")
    grid_best = None
    if grid_best_str:
        from .optimize import Candidate

        vals = tuple(float(x) for x in grid_best_str.split(","))
        grid_best = (Candidate(vals), float("nan"))
    rows, reports = ex.optimizer_campaign(
        base, space, ev, algorithms, budget,
        seeds=parse_seeds(seeds), store=store, grid_best=grid_best,
    )
    _write_summary([r.as_dict() for r in rows], out, f"optimize_{space_name}_ev{ev}", fmt)
    plots.fig_optimizer_comparison(rows, out / f"optimize_{space_name}_ev{ev}.png")
    by_algo = {}
    for r in rows:
        by_algo.setdefault(r.algorithm, []).append(r)
    for a, rs in sorted(by_algo.items()):
        med_ned = statistics.median(r.ned_to_grid_best for r in rs)
        med_evals = statistics.median(r.evaluations_used for r in rs)
        click.echo(f"{a}: median NED {med_ned:.3f}, median evaluations {med_evals:.0f}")


@cli.group("stats")
def cmd_stats():
    """Statistical tools."""


@cmd_stats.command("wilcoxon")
@click.option("--a", "path_a", required=True, type=click.Path(path_type=Path))
@click.option("--b", "path_b", required=True, type=click.Path(path_type=Path))
@click.option("--alternative", type=click.Choice(["two_sided", "greater", "less"]),
              default="two_sided", show_default=True)
def cmd_wilcoxon(path_a, path_b, alternative):
    """Paired signed-rank test of two single-column value files."""
    a = np.loadtxt(path_a, ndmin=1)
    b = np.loadtxt(path_b, ndmin=1)
    res = wilcoxon_signed_rank(a, b, alternative=alternative)
    click.echo(json.dumps(res.as_dict(), indent=2, sort_keys=True))


SOBOL_METRICS = ("satisfaction", "self_sufficiency", "self_consumption", "normalized_payback")


@cmd_stats.command("sobol")
@click.option("--ishigami", "use_ishigami", is_flag=True,
              help="Run the analytic benchmark instead of the simulator sweep.")
@click.option("--n-base", type=int, default=None,
              help="Base sample size (power of two). Defaults: 2^14 benchmark, 64 sweep.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--ev", type=int, default=100, show_default=True)
@out_option
def cmd_sobol(use_ishigami, n_base, seed, ev, out):
    """Total-order sensitivity indices (benchmark or simulator sweep)."""
    out.mkdir(parents=True, exist_ok=True)
    if use_ishigami:
        n = n_base or 2**14
        factors = [Factor(n, -np.pi, np.pi) for n in ("x1", "x2", "x3")]
        rep = sobol_total_order(ishigami, factors, n_base=n, seed=seed, vectorized=True)
        click.echo(json.dumps(rep.as_dict(), indent=2, sort_keys=True))
        return

    n = n_base or 64
    space = space_3d()
    base = ex.grid_base_config(space, nb_electrical=ev)
    factors = [
        Factor("n11_C", values=tuple(space.dims[0].grid_values())),
        Factor("n30_C", values=tuple(space.dims[1].grid_values())),
        Factor("solar", values=tuple(space.dims[2].grid_values())),
        Factor("notification", values=(0, 1)),
        Factor("idle_fee", values=(0, 1)),
        Factor("relocate_full", values=(0, 1)),
    ]
    cache: dict[tuple, dict] = {}

    def metrics_for(x) -> dict:
        key = tuple(float(v) for v in x)
        if key not in cache:
            cfg = ex.apply_candidate(base, space, key[:3])
            cfg = replace(
                cfg,
                policies=replace(
                    cfg.policies,
                    notification=bool(key[3]),
                    idle_fee=bool(key[4]),
                    relocate_full=bool(key[5]),
                ),
                rng_seed=seed,
            )
            _, m = ex.run_scenario(cfg)
            cache[key] = m.as_dict()
        return cache[key]

    matrix = []
    names = None
    for metric in SOBOL_METRICS:
        rep = sobol_total_order(
            lambda x, metric=metric: metrics_for(x)[metric],
            factors, n_base=n, seed=seed,
        )
        names = rep.factor_names
        matrix.append([float(v) for v in rep.st])
    mat = np.array(matrix).T  # factors x metrics
    rows = [
        {"factor": fname, **{m: round(float(v), 4) for m, v in zip(SOBOL_METRICS, row)}}
        for fname, row in zip(names, mat)
    ]
    _write_summary(rows, out, f"sobol_ev{ev}", "csv")
    plots.fig_sobol_heatmap(mat, list(names), list(SOBOL_METRICS), out / f"sobol_ev{ev}.png")
    click.echo(f"{len(cache)} simulations -> {out}")


@cli.command("site")
@out_option
def cmd_site(out):
    """Export the built-in site GeoJSON (for inspection or editing)."""
    out.mkdir(parents=True, exist_ok=True)
    path = out / "site.geojson"
    path.write_text(
        json.dumps(to_geojson(default_site()), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    click.echo(str(path))


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--static", "static_dir", type=click.Path(path_type=Path), default=None,
              help="Dashboard asset directory; defaults to ./frontend/dist when present.")
def cmd_serve(host, port, static_dir):
    """Start the live twin server (HTTP API + stream + dashboard assets)."""
    import uvicorn

    from .server import create_app

    if static_dir is None:
        guess = Path("frontend/dist")
        static_dir = guess if (guess / "index.html").exists() else None
    app = create_app(static_dir=str(static_dir) if static_dir else None)
    if static_dir:
        click.echo(f"dashboard assets: {static_dir}")
    uvicorn.run(app, host=host, port=port, log_level="info")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.UsageError as exc:
        exc.show()
        return 1
    except click.ClickException as exc:
        exc.show()
        return 2
    except (ScenarioError, StatsError, OptimizerError, ValueError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
