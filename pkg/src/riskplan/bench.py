"""Seeded random instances and the exact-vs-approximate benchmark."""

from __future__ import annotations

import csv
import io
import random
import time
from dataclasses import dataclass

import numpy as np

from .domain import Connectivity, OccupancyGrid, PlanningGraph, grid_to_graph
from .planners import EnumerationLimits, exact_enumerate, max_utility_select, risk_aware_dijkstra
from .reward import RewardMap
from .risk import (
    ActionLength,
    DistanceToObstacle,
    PathLength,
    RiskModel,
    Tortuosity,
    Visibility,
)


@dataclass(frozen=True)
class Instance:
    grid: OccupancyGrid
    graph: PlanningGraph
    rewards: RewardMap
    model: RiskModel


def _component_size(graph: PlanningGraph) -> int:
    seen = {graph.v_start}
    todo = [graph.v_start]
    while todo:
        for w, _ in graph.adjacency[todo.pop()]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen)


def random_model(rng: random.Random) -> RiskModel:
    return RiskModel(
        state_elements=(
            DistanceToObstacle(rng.random(), d_max=rng.choice([2.0, 3.0])),
            Visibility(rng.random(), radius=rng.choice([1, 2])),
            ActionLength(rng.random(), risk_per_step=0.05),
        ),
        path_elements=(
            Tortuosity(rng.random(), risk_per_turn=0.1),
            PathLength(rng.random(), risk_per_step=0.02),
        ),
        w_states=rng.uniform(0.1, 1.0),
        w_path=rng.uniform(0.1, 1.0),
    )


def random_instance(
    rng: random.Random,
    max_size: int = 4,
    density: float = 0.25,
    connectivity: Connectivity | str | None = None,
) -> Instance:
    """Random grid of at most ``max_size`` cells per side whose start has a neighbour."""
    while True:
        rows, cols = rng.randint(2, max_size), rng.randint(2, max_size)
        occ = np.array([[rng.random() < density for _ in range(cols)] for _ in range(rows)])
        free = [tuple(int(i) for i in c) for c in np.argwhere(~occ)]
        if len(free) < 2:
            continue
        start = rng.choice(free)
        grid = OccupancyGrid(occ, start)
        conn = connectivity or rng.choice(list(Connectivity))
        graph = grid_to_graph(grid, conn)
        if _component_size(graph) < 2:
            continue
        gamma = rng.choice([1.0, 1.0, 0.9, 0.5, 0.0])
        rewards = RewardMap(np.array([rng.random() for _ in range(graph.n_vertices)]), gamma)
        return Instance(grid, graph, rewards, random_model(rng))


COLUMNS = [
    "trial",
    "rows",
    "cols",
    "connectivity",
    "vertices",
    "exact_utility",
    "approx_utility",
    "gap",
    "exact_seconds",
    "approx_seconds",
    "exact_length",
    "approx_length",
    "exact_states_risk",
    "exact_path_risk",
    "approx_states_risk",
    "approx_path_risk",
    "truncated",
    "ensemble_matches_oracle",
]


def run_trial(trial: int, inst: Instance, limits: EnumerationLimits, check_ensemble: bool = True) -> dict:
    from .oracles import min_risk_all

    ev = inst.model.bind(inst.graph, inst.grid)
    t0 = time.perf_counter()
    exact, stats = exact_enumerate(inst.graph, inst.rewards, ev, limits)
    t1 = time.perf_counter()
    ensemble = risk_aware_dijkstra(inst.graph, ev)
    approx = max_utility_select(ensemble, inst.graph, inst.rewards, ev)
    t2 = time.perf_counter()
    matches = ""
    if check_ensemble:
        oracle = min_risk_all(inst.graph, ev)
        got = ensemble.risks()
        matches = int(got.keys() == oracle.keys() and all(abs(got[v] - oracle[v]) <= 1e-9 for v in oracle))
    rows, cols = inst.grid.dims
    return {
        "trial": trial,
        "rows": rows,
        "cols": cols,
        "connectivity": inst.graph.connectivity.value,
        "vertices": inst.graph.n_vertices,
        "exact_utility": repr(exact.utility.value),
        "approx_utility": repr(approx.utility.value),
        "gap": repr(exact.utility.value - approx.utility.value),
        "exact_seconds": f"{t1 - t0:.6f}",
        "approx_seconds": f"{t2 - t1:.6f}",
        "exact_length": len(exact.path),
        "approx_length": len(approx.path),
        "exact_states_risk": repr(exact.breakdown.integrated_states_risk),
        "exact_path_risk": repr(exact.breakdown.path_risk_component),
        "approx_states_risk": repr(approx.breakdown.integrated_states_risk),
        "approx_path_risk": repr(approx.breakdown.path_risk_component),
        "truncated": int(stats.truncated),
        "ensemble_matches_oracle": matches,
    }


def bench(
    trials: int,
    seed: int = 0,
    max_size: int = 4,
    density: float = 0.25,
    limits: EnumerationLimits = EnumerationLimits(),
    timings: bool = True,
) -> str:
    """CSV text, one row per trial.  Timing columns are blanked when ``timings`` is off."""
    rng = random.Random(seed)
    out = io.StringIO()
    out.write(f"# seed={seed} max_size={max_size} density={density}\n")
    writer = csv.DictWriter(out, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for trial in range(trials):
        row = run_trial(trial, random_instance(rng, max_size, density), limits)
        if not timings:
            row["exact_seconds"] = row["approx_seconds"] = ""
        writer.writerow(row)
    return out.getvalue()
