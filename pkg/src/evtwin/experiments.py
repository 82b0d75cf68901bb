"""Experiment campaigns: policy sweeps, configuration grids and optimizer
comparisons, with an append-only resumable results store.

Records are line-delimited JSON keyed by (experiment, scenario_hash, seed);
re-running a completed key is a no-op, so an interrupted campaign resumes
to the identical record set. Wall-clock measurements never enter records.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, replace
from pathlib import Path

from .config import ChargingAreaConfig, PolicySet, ScenarioConfig
from .energy import PvParams
from .metrics import MetricSet, compute_metrics
from .optimize import (
    Candidate,
    EvalResult,
    OptimizerRunReport,
    SearchSpace,
    full_grid,
    ned,
    optimize,
)
from .sim import run
from .stats import wilcoxon_signed_rank

RECORD_SCHEMA_VERSION = 1

# Table of policy cases: which of the four levers each case enables.
#            (ban_gasoline, idle_fee, relocate_full, notification)
POLICY_CASES = {
    0: (False, False, False, False),
    1: (True, False, False, False),
    2: (True, True, False, False),
    3: (True, True, True, False),
    4: (True, True, False, True),
    5: (True, True, True, True),
}

DEFAULT_EV_LEVELS = (50, 100, 150, 200)


def policy_case(case_id: int, base: PolicySet | None = None) -> PolicySet:
    """PolicySet for one of the six incremental policy cases."""
    if case_id not in POLICY_CASES:
        raise ValueError(f"policy case must be 0..5, got {case_id}")
    ban, fee, relocate, notify = POLICY_CASES[case_id]
    base = base or PolicySet()
    return replace(
        base,
        ban_gasoline=ban,
        idle_fee=fee,
        relocate_full=relocate,
        notification=notify,
    )


def policy_sweep_config(**overrides) -> ScenarioConfig:
    """Policy-sweep base: the fixed two-lot build-out, C(20x11 + 4x30) and
    J(15x11 + 4x30), 30 gasoline vehicles, 500 panels, one day."""
    defaults = dict(
        nb_electrical=50,
        nb_gasoline=30,
        areas=(
            ChargingAreaConfig("C-Parking", 20, 4, 100),
            ChargingAreaConfig("J-Parking", 15, 4, 100),
        ),
        energy=_with_solar(500),
        horizon_days=1,
        weather_ref="synthetic:q2",
    )
    defaults.update(overrides)
    return ScenarioConfig(**defaults)


def _with_solar(n):
    from .energy import EnergyConfig

    return EnergyConfig(pv=PvParams(nb_solar=n))


def grid_base_config(space: SearchSpace, **overrides) -> ScenarioConfig:
    """Grid-campaign base: areas follow the search-space dimensions
    (C only for the 3-D space, C and J for 5-D), policies all off."""
    names = set(space.names)
    areas = [ChargingAreaConfig("C-Parking", 20, 4, 100)]
    if {"n11_J", "n30_J"} & names:
        areas.append(ChargingAreaConfig("J-Parking", 15, 4, 100))
    defaults = dict(
        nb_electrical=50,
        nb_gasoline=30,
        areas=tuple(areas),
        energy=_with_solar(500),
        horizon_days=1,
        weather_ref="synthetic:q2",
    )
    defaults.update(overrides)
    return ScenarioConfig(**defaults)


def apply_candidate(base: ScenarioConfig, space: SearchSpace, values) -> ScenarioConfig:
    """Overlay a search-space point onto a scenario config."""
    by_area = {a.area_id: a for a in base.areas}
    energy = base.energy
    for dim, v in zip(space.dims, values):
        iv = int(round(v))
        if dim.name == "n11_C":
            by_area["C-Parking"] = replace(by_area["C-Parking"], n_ports_11kw=iv)
        elif dim.name == "n30_C":
            by_area["C-Parking"] = replace(by_area["C-Parking"], n_ports_30kw=iv)
        elif dim.name == "n11_J":
            by_area["J-Parking"] = replace(by_area["J-Parking"], n_ports_11kw=iv)
        elif dim.name == "n30_J":
            by_area["J-Parking"] = replace(by_area["J-Parking"], n_ports_30kw=iv)
        elif dim.name == "solar":
            energy = replace(energy, pv=replace(energy.pv, nb_solar=iv))
        else:
            raise ValueError(f"search dimension {dim.name!r} has no config mapping")
    areas = tuple(by_area[a.area_id] for a in base.areas)
    return replace(base, areas=areas, energy=energy)


def run_scenario(config: ScenarioConfig) -> tuple[list, MetricSet]:
    reports = run(config)
    return reports, compute_metrics(reports, config.energy)


def make_sim_evaluator(base: ScenarioConfig, space: SearchSpace):
    """Black-box ``fn(values, seed) -> (objective, MetricSet)`` over the
    simulator, for the optimizers and the full grid."""

    def fn(values, seed):
        cfg = replace(apply_candidate(base, space, values), rng_seed=int(seed))
        _, metrics = run_scenario(cfg)
        return metrics.objective, metrics

    return fn


class ResultsStore:
    """Append-only JSONL store with de-duplication by record key."""

    def __init__(self, root: str | Path, filename: str = "records.jsonl"):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.path = self.root / filename
        self._keys: set[tuple] = set()
        if self.path.exists():
            with open(self.path, encoding="utf-8") as f:
                for line in f:
                    if line.strip():
                        rec = json.loads(line)
                        self._keys.add(self._key(rec))

    @staticmethod
    def _key(rec: dict) -> tuple:
        seed = rec.get("seed")
        if isinstance(seed, list):
            seed = tuple(seed)
        return (rec.get("experiment"), rec.get("scenario_hash"), seed)

    def has(self, experiment: str, scenario_hash: str, seed) -> bool:
        return self._key(
            {"experiment": experiment, "scenario_hash": scenario_hash, "seed": seed}
        ) in self._keys

    def append(self, record: dict) -> bool:
        """Write one record unless its key already exists. Returns True
        when the record was written."""
        record.setdefault("schema_version", RECORD_SCHEMA_VERSION)
        key = self._key(record)
        if key in self._keys:
            return False
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
        self._keys.add(key)
        return True

    def records(self, experiment: str | None = None) -> list[dict]:
        out = []
        if not self.path.exists():
            return out
        with open(self.path, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    rec = json.loads(line)
                    if experiment is None or rec.get("experiment") == experiment:
                        out.append(rec)
        return out


@dataclass
class SweepCell:
    ev_level: int
    case: int
    satisfactions: list[float]

    @property
    def mean(self) -> float:
        return statistics.fmean(self.satisfactions)

    @property
    def sd(self) -> float:
        return statistics.stdev(self.satisfactions) if len(self.satisfactions) > 1 else 0.0


def policy_sweep(
    base: ScenarioConfig,
    ev_levels=DEFAULT_EV_LEVELS,
    cases=tuple(range(6)),
    seeds=tuple(range(20)),
    store: ResultsStore | None = None,
    progress=None,
) -> dict[tuple[int, int], SweepCell]:
    """One satisfaction record per (EV level, case, seed); returns the
    mean +/- sd summary per cell."""
    cells: dict[tuple[int, int], SweepCell] = {}
    for level in ev_levels:
        for case in cases:
            cell = SweepCell(level, case, [])
            cells[(level, case)] = cell
            for seed in seeds:
                cfg = replace(
                    base,
                    nb_electrical=level,
                    policies=policy_case(case, base.policies),
                    rng_seed=seed,
                )
                shash = cfg.scenario_hash()
                cached = None
                if store is not None and store.has("policy_sweep", shash, seed):
                    for rec in store.records("policy_sweep"):
                        if rec["scenario_hash"] == shash and rec["seed"] == seed:
                            cached = rec
                            break
                if cached is not None:
                    cell.satisfactions.append(cached["metrics"]["satisfaction"])
                    continue
                reports, metrics = run_scenario(cfg)
                cell.satisfactions.append(metrics.satisfaction)
                if store is not None:
                    store.append(
                        {
                            "experiment": "policy_sweep",
                            "scenario_hash": shash,
                            "seed": seed,
                            "ev_level": level,
                            "case": case,
                            "metrics": metrics.as_dict(),
                            "ev_requested": sum(r.ev_requested for r in reports),
                            "ev_satisfied": sum(r.ev_satisfied for r in reports),
                            "day_reports_ref": None,
                        }
                    )
                if progress:
                    progress(level, case, seed)
    return cells


def sweep_wilcoxon(
    cells: dict[tuple[int, int], SweepCell], ev_level: int, case_a: int, case_b: int
):
    """Paired (by seed) Wilcoxon test between two cases at one EV level."""
    a = cells[(ev_level, case_a)].satisfactions
    b = cells[(ev_level, case_b)].satisfactions
    return wilcoxon_signed_rank(a, b)


def grid_campaign(
    base: ScenarioConfig,
    space: SearchSpace,
    ev_level: int,
    seeds=(0,),
    store: ResultsStore | None = None,
    cap: int = 10_000,
) -> list[EvalResult]:
    """Evaluate the full grid at one EV level; per-candidate records go to
    the store, and a summary record names the argmax configuration."""
    cfg = replace(base, nb_electrical=ev_level)
    fn = make_sim_evaluator(cfg, space)
    results = full_grid(space, fn, cap=cap, seeds_per_eval=tuple(seeds))
    if store is not None:
        for res in results:
            ccfg = replace(
                apply_candidate(cfg, space, res.candidate.values), rng_seed=seeds[0]
            )
            store.append(
                {
                    "experiment": "grid",
                    "scenario_hash": ccfg.scenario_hash(),
                    "seed": list(seeds),
                    "ev_level": ev_level,
                    "candidate": list(res.candidate.values),
                    "space": list(space.names),
                    "metrics": res.metrics.as_dict() if res.metrics else None,
                    "objective": res.objective,
                    "day_reports_ref": None,
                }
            )
        best = results[0]
        store.append(
            {
                "experiment": "grid_summary",
                "scenario_hash": f"{ev_level}-{'x'.join(space.names)}",
                "seed": list(seeds),
                "ev_level": ev_level,
                "space": list(space.names),
                "best_candidate": list(best.candidate.values),
                "best_objective": best.objective,
                "best_metrics": best.metrics.as_dict() if best.metrics else None,
                "evaluations": len(results),
            }
        )
    return results


def find_grid_best(
    store: ResultsStore, space: SearchSpace, ev_level: int
) -> tuple[Candidate, float] | None:
    for rec in store.records("grid_summary"):
        if rec.get("ev_level") == ev_level and rec.get("space") == list(space.names):
            return (
                Candidate(tuple(float(v) for v in rec["best_candidate"])),
                float(rec["best_objective"]),
            )
    return None


@dataclass
class OptimizerComparisonRow:
    algorithm: str
    seed: int
    best_candidate: tuple
    best_objective: float
    ned_to_grid_best: float
    evaluations_used: int

    def as_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "seed": self.seed,
            "best_candidate": list(self.best_candidate),
            "best_objective": self.best_objective,
            "ned_to_grid_best": self.ned_to_grid_best,
            "evaluations_used": self.evaluations_used,
        }


def optimizer_campaign(
    base: ScenarioConfig,
    space: SearchSpace,
    ev_level: int,
    algorithms,
    budget: int,
    seeds=(0,),
    store: ResultsStore | None = None,
    grid_best: tuple[Candidate, float] | None = None,
    params: dict | None = None,
) -> tuple[list[OptimizerComparisonRow], list[OptimizerRunReport]]:
    """Run each algorithm x seed with the simulator evaluator and compare
    against the exhaustive optimum (NED and evaluations used).

    ``grid_best`` may be passed directly; otherwise it is looked up in the
    store, and its absence is an error (the comparison is undefined
    without the exhaustive reference).
    """
    if grid_best is None:
        if store is None:
            raise ValueError("optimizer campaign needs grid_best or a store holding it")
        grid_best = find_grid_best(store, space, ev_level)
        if grid_best is None:
            raise ValueError(
                f"no completed full grid for space {space.names} at ev={ev_level}; "
                "run the grid campaign first"
            )
    cfg = replace(base, nb_electrical=ev_level)
    fn = make_sim_evaluator(cfg, space)
    rows: list[OptimizerComparisonRow] = []
    reports: list[OptimizerRunReport] = []
    for algorithm in algorithms:
        for seed in seeds:
            rep = optimize(algorithm, space, fn, budget=budget, seed=seed, params=params)
            reports.append(rep)
            row = OptimizerComparisonRow(
                algorithm=algorithm,
                seed=seed,
                best_candidate=rep.best.candidate.values,
                best_objective=rep.best.objective,
                ned_to_grid_best=ned(rep.best.candidate, grid_best[0], space),
                evaluations_used=rep.evaluations_used,
            )
            rows.append(row)
            if store is not None:
                store.append(
                    {
                        "experiment": "optimizer",
                        "scenario_hash": f"{algorithm}-{ev_level}-{'x'.join(space.names)}-{budget}",
                        "seed": seed,
                        "ev_level": ev_level,
                        "space": list(space.names),
                        "budget": budget,
                        "row": row.as_dict(),
                        "report": rep.as_dict(),
                        "day_reports_ref": None,
                    }
                )
    return rows, reports
