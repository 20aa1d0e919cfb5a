"""Planners: exhaustive simple-path search and the two-stage approximation.

The approximate planner first runs a Dijkstra-like search in which the unit
that gets closed is a *direction* (a vertex plus the edge it was entered
through) rather than a vertex, re-pricing every candidate with the full path
risk.  The second stage picks the highest-utility path out of the resulting
minimum-risk ensemble, or stays put.
"""

from __future__ import annotations

import heapq
import math
import random
import time
from dataclasses import dataclass, field
from enum import Enum

from .domain import Direction, OccupancyGrid, Path, PlanningGraph
from .reward import RewardMap, Utility, accumulate, stay_reward
from .risk import RiskBreakdown, RiskEvaluator, RiskModel, RiskModelError


class Mode(str, Enum):
    EXACT = "exact"
    APPROXIMATE = "approximate"


class SearchInvariantError(RuntimeError):
    pass


@dataclass(frozen=True)
class EnumerationLimits:
    max_paths: int = 5_000_000
    max_seconds: float = 60.0


@dataclass(frozen=True)
class EnumerationStats:
    paths: int
    truncated: bool
    seconds: float


@dataclass(frozen=True)
class PlanResult:
    path: Path
    utility: Utility
    breakdown: RiskBreakdown
    planner: str  # "exact", "approximate" or "stay"
    truncated: bool = False
    paths_enumerated: int | None = None

    def __post_init__(self):
        if self.utility.risk != self.breakdown.total:
            raise ValueError("utility risk and breakdown total disagree")


def selection_key(value: float, vertices: tuple[int, ...]) -> tuple:
    """Sort key, smallest is best: higher utility, then staying, then shorter, then lexicographic."""
    return (-value, len(vertices) != 1, len(vertices), vertices)


def _result(vertices, reward, evaluator, planner, **kw) -> PlanResult:
    breakdown = evaluator.evaluate(vertices)
    return PlanResult(
        path=Path(tuple(vertices)),
        utility=Utility.of(reward, breakdown.total),
        breakdown=breakdown,
        planner=planner,
        **kw,
    )


def stay_at_start(graph: PlanningGraph, rewards: RewardMap, evaluator: RiskEvaluator) -> PlanResult:
    return _result((graph.v_start,), stay_reward(graph, rewards), evaluator, "stay")


def exact_enumerate(
    graph: PlanningGraph,
    rewards: RewardMap,
    evaluator: RiskEvaluator,
    limits: EnumerationLimits = EnumerationLimits(),
) -> tuple[PlanResult, EnumerationStats]:
    """Price every simple path leaving the start and keep the best one.

    Depth-first with an explicit stack; the accumulated reward of each prefix is
    kept on the stack so backing out of a vertex needs no division by gamma.
    """
    rewards.check_covers(graph)
    t0 = time.perf_counter()
    start = graph.v_start
    gamma = rewards.gamma
    reward_of = [float(x) for x in rewards.reward]
    adjacency = graph.adjacency

    stay_value = stay_reward(graph, rewards) / evaluator.total((start,))
    best_key = selection_key(stay_value, (start,))
    best_reward = stay_reward(graph, rewards)

    path = [start]
    on_path = [False] * graph.n_vertices
    on_path[start] = True
    prefix = [0.0]
    stack = [iter(adjacency[start])]
    count = 0
    truncated = False

    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            on_path[path.pop()] = False
            prefix.pop()
            continue
        v = nxt[0]
        if on_path[v]:
            continue
        if count >= limits.max_paths or (
            count & 0xFFF == 0 and count and time.perf_counter() - t0 > limits.max_seconds
        ):
            truncated = True
            break
        path.append(v)
        on_path[v] = True
        reward = gamma * prefix[-1] + reward_of[v]
        prefix.append(reward)
        value = reward / evaluator.total(path)
        count += 1
        if value >= -best_key[0]:
            key = selection_key(value, tuple(path))
            if key < best_key:
                best_key, best_reward = key, reward
        stack.append(iter(adjacency[v]))

    vertices = best_key[3]
    planner = "stay" if len(vertices) == 1 else Mode.EXACT.value
    stats = EnumerationStats(count, truncated, time.perf_counter() - t0)
    best = _result(vertices, best_reward, evaluator, planner, truncated=truncated, paths_enumerated=count)
    return best, stats


@dataclass
class DirectionalLabel:
    direction: Direction
    r: float = math.inf
    pd: int | None = None  # index of the predecessor label
    closed: bool = False
    length: int = 0  # vertices on the path held by this label
    version: int = 0


@dataclass(frozen=True)
class EnsembleEntry:
    path: Path
    risk: float


@dataclass(frozen=True)
class MinRiskEnsemble:
    v_start: int
    entries: dict[int, EnsembleEntry]
    labels: tuple[DirectionalLabel, ...] = field(default=(), repr=False)

    def __contains__(self, v: int) -> bool:
        return v in self.entries

    def __getitem__(self, v: int) -> EnsembleEntry:
        return self.entries[v]

    def __len__(self) -> int:
        return len(self.entries)

    def risks(self) -> dict[int, float]:
        return {v: e.risk for v, e in self.entries.items()}


def check_monotone(evaluator: RiskEvaluator, samples: int = 64, seed: int = 0) -> None:
    """Spot-check that extending a path never lowers its risk.

    Raises :class:`RiskModelError` on the first counterexample found.
    """
    graph = evaluator.graph
    if graph.n_edges == 0:
        return
    rng = random.Random(seed)
    starts = [v for v in range(graph.n_vertices) if graph.adjacency[v]]
    done = 0
    while done < samples:
        walk = [rng.choice(starts)]
        risk = evaluator.total(walk)
        while done < samples:
            options = [w for w, _ in graph.adjacency[walk[-1]] if w not in walk]
            if not options:
                break
            walk.append(rng.choice(options))
            extended = evaluator.total(walk)
            done += 1
            if extended < risk:
                raise RiskModelError(
                    f"risk decreased from {risk} to {extended} when extending {walk[:-1]} by {walk[-1]}"
                )
            risk = extended


def _backtrack(labels: list[DirectionalLabel], idx: int) -> list[int]:
    out = []
    while idx is not None:
        out.append(labels[idx].direction.vertex)
        idx = labels[idx].pd
    out.reverse()
    return out


def risk_aware_dijkstra(graph: PlanningGraph, evaluator: RiskEvaluator, self_check: bool = True) -> MinRiskEnsemble:
    """Minimum-risk simple paths from the start to every reachable vertex."""
    if self_check:
        check_monotone(evaluator)

    labels: list[DirectionalLabel] = []
    by_direction: dict[tuple[int, int], int] = {}
    for v in range(graph.n_vertices):
        for _, e in graph.adjacency[v]:
            by_direction[(v, e)] = len(labels)
            labels.append(DirectionalLabel(Direction(v, e)))
    start = graph.v_start
    root = len(labels)
    labels.append(DirectionalLabel(Direction(start, None), r=0.0, length=1))

    # ties: smaller risk, shorter path, lower vertex id, lower edge id
    heap = [(0.0, 1, start, -1, 0, root)]
    while heap:
        r, length, u, _, version, idx = heapq.heappop(heap)
        lab = labels[idx]
        if lab.closed or version != lab.version:
            continue
        path_u = _backtrack(labels, idx)
        on_path = set(path_u)
        for w, e in graph.adjacency[u]:
            if w in on_path:
                continue
            path_u.append(w)
            risk = evaluator.total(path_u)
            path_u.pop()
            t = by_direction[(w, e)]
            target = labels[t]
            if target.closed:
                if risk < target.r:
                    raise SearchInvariantError(
                        f"closed direction {target.direction} would improve from {target.r} to {risk}"
                    )
                continue
            if risk < target.r:
                target.r = risk
                target.pd = idx
                target.length = length + 1
                target.version += 1
                heapq.heappush(heap, (risk, target.length, w, e, target.version, t))
        lab.closed = True

    entries = {}
    for v in range(graph.n_vertices):
        if v == start:
            continue
        best = None
        for _, e in graph.adjacency[v]:
            lab = labels[by_direction[(v, e)]]
            if lab.r == math.inf:
                continue
            if best is None or (lab.r, lab.length) < (best.r, best.length):
                best = lab
        if best is not None:
            idx = by_direction[(v, best.direction.incoming_edge)]
            entries[v] = EnsembleEntry(Path(tuple(_backtrack(labels, idx))), best.r)
    return MinRiskEnsemble(start, entries, tuple(labels))


def max_utility_select(
    ensemble: MinRiskEnsemble,
    graph: PlanningGraph,
    rewards: RewardMap,
    evaluator: RiskEvaluator,
) -> PlanResult:
    """Highest-utility ensemble path, or the unit path at the start if that is better."""
    rewards.check_covers(graph)
    start = graph.v_start
    best_key = selection_key(stay_reward(graph, rewards) / evaluator.total((start,)), (start,))
    best_reward = stay_reward(graph, rewards)
    for v in sorted(ensemble.entries):
        vertices = ensemble.entries[v].path.vertices
        reward = accumulate(vertices, rewards)
        key = selection_key(reward / evaluator.total(vertices), vertices)
        if key < best_key:
            best_key, best_reward = key, reward
    vertices = best_key[3]
    planner = "stay" if len(vertices) == 1 else Mode.APPROXIMATE.value
    return _result(vertices, best_reward, evaluator, planner)


def plan(
    graph: PlanningGraph,
    grid: OccupancyGrid,
    rewards: RewardMap,
    model: RiskModel,
    mode: Mode | str = Mode.APPROXIMATE,
    limits: EnumerationLimits = EnumerationLimits(),
) -> PlanResult:
    mode = Mode(mode)
    evaluator = model.bind(graph, grid)
    if mode is Mode.EXACT:
        best, _ = exact_enumerate(graph, rewards, evaluator, limits)
        return best
    ensemble = risk_aware_dijkstra(graph, evaluator)
    return max_utility_select(ensemble, graph, rewards, evaluator)
