"""Metaheuristic search over infrastructure configurations.

Six algorithms share one black-box evaluator interface and a seeded RNG:
hill climbing with random restarts, simulated annealing, tabu search,
reactive tabu search, a genetic algorithm and particle swarm optimization.
Hill climbing / annealing / tabu move on the coarse configuration grid;
GA and PSO may propose any integer point inside the bounds, which is how
off-grid panel counts such as 827 arise.

Evaluations are cached by (candidate, seed set); the budget counts actual
evaluator invocations, not cache hits.
"""

from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np


class BudgetExhausted(Exception):
    """Internal control flow: the evaluation budget ran out."""


class OptimizerError(ValueError):
    pass


@dataclass(frozen=True)
class Dimension:
    name: str
    lower: float
    upper: float
    step: float
    integral: bool = True
    continuous_allowed: bool = True

    def __post_init__(self):
        if self.lower > self.upper:
            raise OptimizerError(f"{self.name}: lower {self.lower} > upper {self.upper}")
        if self.step <= 0:
            raise OptimizerError(f"{self.name}: step must be > 0")

    def grid_values(self) -> list[float]:
        n = int(round((self.upper - self.lower) / self.step)) + 1
        return [self.lower + i * self.step for i in range(n)]


@dataclass(frozen=True)
class SearchSpace:
    dims: tuple[Dimension, ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.dims)

    def cardinality(self) -> int:
        n = 1
        for d in self.dims:
            n *= len(d.grid_values())
        return n

    def grid_points(self):
        """Yield all grid candidates in row-major dimension order."""
        def rec(i, prefix):
            if i == len(self.dims):
                yield Candidate(tuple(prefix), provenance="grid")
                return
            for v in self.dims[i].grid_values():
                yield from rec(i + 1, prefix + [v])
        yield from rec(0, [])

    def clip(self, vector) -> tuple[float, ...]:
        return tuple(
            min(d.upper, max(d.lower, x)) for d, x in zip(self.dims, vector)
        )

    def round_int(self, vector) -> tuple[float, ...]:
        return tuple(
            float(int(round(x))) if d.integral else float(x)
            for d, x in zip(self.dims, self.clip(vector))
        )

    def random_grid_point(self, rng) -> "Candidate":
        vals = tuple(
            d.grid_values()[int(rng.integers(0, len(d.grid_values())))] for d in self.dims
        )
        return Candidate(vals, provenance="random")

    def random_int_point(self, rng) -> tuple[float, ...]:
        return tuple(
            float(rng.integers(int(d.lower), int(d.upper) + 1)) for d in self.dims
        )

    def on_grid(self, values) -> bool:
        for d, x in zip(self.dims, values):
            k = (x - d.lower) / d.step
            if abs(k - round(k)) > 1e-9 or not (d.lower - 1e-9 <= x <= d.upper + 1e-9):
                return False
        return True


@dataclass(frozen=True)
class Candidate:
    values: tuple[float, ...]
    provenance: str = field(default="", compare=False)

    def __iter__(self):
        return iter(self.values)


@dataclass
class EvalResult:
    candidate: Candidate
    objective: float
    metrics: object = None
    seeds: tuple[int, ...] = (0,)
    wall_time_s: float = 0.0

    def as_dict(self) -> dict:
        d = {
            "candidate": list(self.candidate.values),
            "objective": self.objective,
            "seeds": list(self.seeds),
        }
        if self.metrics is not None and hasattr(self.metrics, "as_dict"):
            d["metrics"] = self.metrics.as_dict()
        return d


@dataclass
class OptimizerRunReport:
    algorithm: str
    budget: int
    evaluations_used: int
    best: EvalResult
    trajectory: list[tuple[int, int, float]]  # (iteration, evals_used, best so far)
    seed: int
    params: dict

    def as_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "budget": self.budget,
            "evaluations_used": self.evaluations_used,
            "best": self.best.as_dict(),
            "trajectory": [list(t) for t in self.trajectory],
            "seed": self.seed,
            "params": self.params,
        }


def neighbors(c: Candidate, space: SearchSpace) -> list[Candidate]:
    """Candidates differing in exactly one dimension by one step, clipped
    to bounds, deduplicated, in deterministic (dim, -step, +step) order."""
    out = []
    seen = {c.values}
    for i, d in enumerate(space.dims):
        for delta in (-d.step, d.step):
            v = list(c.values)
            v[i] = min(d.upper, max(d.lower, v[i] + delta))
            t = tuple(v)
            if t not in seen:
                seen.add(t)
                out.append(Candidate(t, provenance="neighbor"))
    return out


def ned(x1: Candidate, x2: Candidate, space: SearchSpace) -> float:
    """Step-normalized Euclidean distance between two configurations."""
    if len(x1.values) != len(x2.values) or len(x1.values) != len(space.dims):
        raise OptimizerError(
            f"dimension mismatch: {len(x1.values)} vs {len(x2.values)} vs {len(space.dims)}"
        )
    return math.sqrt(
        sum(((a - b) / d.step) ** 2 for a, b, d in zip(x1.values, x2.values, space.dims))
    )


class CachingEvaluator:
    """Budgeted, caching front end over ``fn(values, seed) -> (objective, metrics)``.

    The objective is averaged over the configured seeds; identical
    (candidate, seed set) lookups return the cached result without
    consuming budget.
    """

    def __init__(self, fn, seeds=(0,), budget: int | None = None):
        self.fn = fn
        self.seeds = tuple(seeds)
        self.budget = budget
        self.cache: dict[tuple, EvalResult] = {}
        self.evaluations_used = 0
        self.calls = 0

    def evaluate(self, cand: Candidate) -> EvalResult:
        self.calls += 1
        key = (cand.values, self.seeds)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        if self.budget is not None and self.evaluations_used >= self.budget:
            raise BudgetExhausted()
        self.evaluations_used += 1
        t0 = time.perf_counter()
        objs = []
        metrics = None
        for s in self.seeds:
            o, m = self.fn(cand.values, s)
            objs.append(o)
            metrics = m
        res = EvalResult(
            candidate=cand,
            objective=float(np.mean(objs)),
            metrics=metrics,
            seeds=self.seeds,
            wall_time_s=time.perf_counter() - t0,
        )
        self.cache[key] = res
        return res


ALGORITHMS = (
    "hill_climbing",
    "simulated_annealing",
    "tabu",
    "reactive_tabu",
    "genetic",
    "pso",
)

_DEFAULTS = {
    "sa_t0": 0.3,
    "sa_alpha": 0.95,
    "sa_t_min": 1e-6,
    "tabu_tenure": 10,
    "reactive_growth": 1.1,
    "reactive_decay": 0.9,
    "reactive_patience": 15,
    "ga_population": 12,
    "ga_tournament": 3,
    "ga_mutation_prob": 0.2,
    "ga_elitism": 1,
    "pso_swarm": 10,
    "pso_inertia": 0.72,
    "pso_cognitive": 1.49,
    "pso_social": 1.49,
    "max_iterations": 2000,
}


class _Run:
    """Shared bookkeeping for one optimizer run."""

    def __init__(self, space, evaluator, rng, params):
        self.space = space
        self.ev = evaluator
        self.rng = rng
        self.params = params
        self.best: EvalResult | None = None
        self.trajectory: list[tuple[int, int, float]] = []
        self.iteration = 0

    def eval(self, cand: Candidate) -> EvalResult:
        res = self.ev.evaluate(cand)
        if self.best is None or res.objective > self.best.objective:
            self.best = res
        return res

    def tick(self) -> None:
        self.iteration += 1
        self.trajectory.append(
            (self.iteration, self.ev.evaluations_used, self.best.objective)
        )
        if self.iteration >= self.params["max_iterations"]:
            raise BudgetExhausted()


def _hill_climbing(run: _Run) -> None:
    current = run.eval(run.space.random_grid_point(run.rng))
    while True:
        scored = [run.eval(n) for n in neighbors(current.candidate, run.space)]
        best_n = max(scored, key=lambda r: r.objective)
        if best_n.objective > current.objective:
            current = best_n
        else:
            current = run.eval(run.space.random_grid_point(run.rng))
        run.tick()


def _simulated_annealing(run: _Run) -> None:
    p = run.params
    temp = p["sa_t0"]
    current = run.eval(run.space.random_grid_point(run.rng))
    while True:
        opts = neighbors(current.candidate, run.space)
        cand = opts[int(run.rng.integers(0, len(opts)))]
        res = run.eval(cand)
        delta = res.objective - current.objective
        if delta > 0 or run.rng.random() < math.exp(delta / max(temp, 1e-12)):
            current = res
        temp = max(temp * p["sa_alpha"], p["sa_t_min"])
        run.tick()


def _tabu(run: _Run, reactive: bool = False) -> None:
    p = run.params
    tenure = float(p["tabu_tenure"])
    tabu: deque = deque(maxlen=int(tenure))
    visited: dict[tuple, int] = {}
    streak = 0
    current = run.eval(run.space.random_grid_point(run.rng))
    tabu.append(current.candidate.values)
    visited[current.candidate.values] = 1
    while True:
        cands = [n for n in neighbors(current.candidate, run.space) if n.values not in tabu]
        if not cands:
            current = run.eval(run.space.random_grid_point(run.rng))
        else:
            scored = [run.eval(n) for n in cands]
            current = max(scored, key=lambda r: r.objective)
        vals = current.candidate.values
        if reactive:
            seen = visited.get(vals, 0)
            visited[vals] = seen + 1
            if seen:
                tenure = min(tenure * p["reactive_growth"], 50.0)
                streak = 0
            else:
                streak += 1
                if streak >= p["reactive_patience"]:
                    tenure = max(tenure * p["reactive_decay"], 2.0)
                    streak = 0
            if int(tenure) != tabu.maxlen:
                tabu = deque(tabu, maxlen=max(1, int(tenure)))
        tabu.append(vals)
        run.tick()


def _genetic(run: _Run) -> None:
    p = run.params
    space, rng = run.space, run.rng
    pop_size = p["ga_population"]
    if run.ev.budget is not None and run.ev.budget < pop_size:
        raise OptimizerError(
            f"budget {run.ev.budget} below population size {pop_size}"
        )
    pop = [run.eval(space.random_grid_point(rng)) for _ in range(pop_size)]

    def tournament():
        k = p["ga_tournament"]
        picks = [pop[int(rng.integers(0, len(pop)))] for _ in range(k)]
        return max(picks, key=lambda r: r.objective)

    while True:
        pop.sort(key=lambda r: (-r.objective, r.candidate.values))
        next_gen = pop[: p["ga_elitism"]]
        children = []
        while len(next_gen) + len(children) < pop_size:
            a, b = tournament().candidate.values, tournament().candidate.values
            if len(a) > 1:
                cut = int(rng.integers(1, len(a)))
                child = list(a[:cut] + b[cut:])
            else:
                child = list(a)
            for i, d in enumerate(space.dims):
                if rng.random() < p["ga_mutation_prob"]:
                    child[i] += d.step if rng.random() < 0.5 else -d.step
            children.append(Candidate(space.round_int(child), provenance="ga"))
        pop = next_gen + [run.eval(c) for c in children]
        run.tick()


def _pso(run: _Run) -> None:
    p = run.params
    space, rng = run.space, run.rng
    n = p["pso_swarm"]
    if run.ev.budget is not None and run.ev.budget < n:
        raise OptimizerError(f"budget {run.ev.budget} below swarm size {n}")
    dims = space.dims
    lo = np.array([d.lower for d in dims])
    hi = np.array([d.upper for d in dims])
    span = hi - lo
    pos = lo + rng.random((n, len(dims))) * span
    vel = (rng.random((n, len(dims))) - 0.5) * span * 0.5

    def evaluate(x) -> EvalResult:
        return run.eval(Candidate(space.round_int(x), provenance="pso"))

    pbest = [evaluate(pos[i]) for i in range(n)]
    pbest_pos = pos.copy()
    g = max(range(n), key=lambda i: pbest[i].objective)
    gbest, gbest_pos = pbest[g], pbest_pos[g].copy()
    w, c1, c2 = p["pso_inertia"], p["pso_cognitive"], p["pso_social"]
    while True:
        for i in range(n):
            r1 = rng.random(len(dims))
            r2 = rng.random(len(dims))
            vel[i] = (
                w * vel[i]
                + c1 * r1 * (pbest_pos[i] - pos[i])
                + c2 * r2 * (gbest_pos - pos[i])
            )
            pos[i] = np.clip(pos[i] + vel[i], lo, hi)
            res = evaluate(pos[i])
            if res.objective > pbest[i].objective:
                pbest[i] = res
                pbest_pos[i] = pos[i].copy()
                if res.objective > gbest.objective:
                    gbest = res
                    gbest_pos = pos[i].copy()
        run.tick()


_IMPLS = {
    "hill_climbing": _hill_climbing,
    "simulated_annealing": _simulated_annealing,
    "tabu": lambda run: _tabu(run, reactive=False),
    "reactive_tabu": lambda run: _tabu(run, reactive=True),
    "genetic": _genetic,
    "pso": _pso,
}


def optimize(
    algorithm: str,
    space: SearchSpace,
    evaluator_fn,
    budget: int,
    seed: int,
    params: dict | None = None,
    seeds_per_eval: tuple[int, ...] = (0,),
) -> OptimizerRunReport:
    """Run one metaheuristic until its evaluation budget is exhausted.

    ``evaluator_fn(values, seed) -> (objective, metrics)`` is the black
    box being maximized. Identical (algorithm, seed, params) runs produce
    identical reports.
    """
    if algorithm not in _IMPLS:
        raise OptimizerError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    if budget < 1:
        raise OptimizerError(f"budget must be >= 1, got {budget}")
    merged = dict(_DEFAULTS)
    if params:
        unknown = set(params) - set(_DEFAULTS)
        if unknown:
            raise OptimizerError(f"unknown params: {sorted(unknown)}")
        merged.update(params)
    ev = CachingEvaluator(evaluator_fn, seeds=seeds_per_eval, budget=budget)
    rng = np.random.default_rng(np.random.SeedSequence([seed, _algo_tag(algorithm)]))
    run = _Run(space, ev, rng, merged)
    try:
        _IMPLS[algorithm](run)
    except BudgetExhausted:
        pass
    if run.best is None:  # budget too small to evaluate anything
        raise OptimizerError("budget exhausted before any evaluation completed")
    run.trajectory.append((run.iteration + 1, ev.evaluations_used, run.best.objective))
    return OptimizerRunReport(
        algorithm=algorithm,
        budget=budget,
        evaluations_used=ev.evaluations_used,
        best=run.best,
        trajectory=run.trajectory,
        seed=seed,
        params=merged,
    )


def _algo_tag(name: str) -> int:
    return sum(ord(c) for c in name)


def full_grid(
    space: SearchSpace,
    evaluator_fn,
    cap: int = 10_000,
    seeds_per_eval: tuple[int, ...] = (0,),
) -> list[EvalResult]:
    """Evaluate every grid point; results sorted by objective, best first.

    Refuses grids above ``cap`` points so a mis-specified space cannot
    silently burn hours.
    """
    n = space.cardinality()
    if n > cap:
        raise OptimizerError(f"grid cardinality {n} exceeds cap {cap}")
    ev = CachingEvaluator(evaluator_fn, seeds=seeds_per_eval, budget=None)
    results = [ev.evaluate(c) for c in space.grid_points()]
    results.sort(key=lambda r: (-r.objective, r.candidate.values))
    return results


def space_3d() -> SearchSpace:
    """C-Parking ports and solar panels: 7 x 5 x 8 = 280 grid points."""
    return SearchSpace(
        (
            Dimension("n11_C", 20, 50, 5),
            Dimension("n30_C", 2, 10, 2),
            Dimension("solar", 200, 900, 100),
        )
    )


def space_5d() -> SearchSpace:
    """Adds J-Parking ports: 280 x 6 x 4 = 6720 grid points."""
    return SearchSpace(
        (
            Dimension("n11_C", 20, 50, 5),
            Dimension("n30_C", 2, 10, 2),
            Dimension("solar", 200, 900, 100),
            Dimension("n11_J", 15, 30, 3),
            Dimension("n30_J", 2, 8, 2),
        )
    )
