"""Brute-force reference answers and the utility/edge-weight analysis.

Nothing here shares traversal code with :mod:`riskplan.planners`; adjacency is
rebuilt from the raw edge list so a bug in one cannot hide in the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .domain import OccupancyGrid, Path, PlanningGraph, grid_to_graph
from .planners import PlanResult
from .reward import RewardMap, Utility
from .risk import CellTable, RiskEvaluator, RiskModel


def _adjacency(graph: PlanningGraph) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(graph.n_vertices)]
    for u, v in graph.edges:
        adj[u].append(v)
        adj[v].append(u)
    return adj


class PathCount(NamedTuple):
    count: int
    truncated: bool


def count_simple_paths(graph: PlanningGraph, origin: int | None = None, cap: int | None = None) -> PathCount:
    """Number of simple paths with at least one edge that start at ``origin``."""
    origin = graph.v_start if origin is None else origin
    adj = _adjacency(graph)
    seen = [False] * graph.n_vertices
    seen[origin] = True
    total = 0
    frames = [(origin, 0)]
    while frames:
        v, i = frames[-1]
        if i == len(adj[v]):
            frames.pop()
            seen[v] = False
            continue
        frames[-1] = (v, i + 1)
        w = adj[v][i]
        if seen[w]:
            continue
        if cap is not None and total >= cap:
            return PathCount(total, True)
        total += 1
        seen[w] = True
        frames.append((w, 0))
    return PathCount(total, False)


def _all_simple_paths(adj: list[list[int]], origin: int):
    def walk(path):
        yield path
        for w in adj[path[-1]]:
            if w not in path:
                yield from walk(path + (w,))

    yield from walk((origin,))


def _reward(vertices: Sequence[int], rewards: RewardMap) -> float:
    if len(vertices) == 1:
        return rewards[vertices[0]]
    r = 0.0
    for v in vertices[1:]:
        r = rewards.gamma * r + rewards[v]
    return r


def min_risk_oracle(
    graph: PlanningGraph, model: RiskModel, grid: OccupancyGrid, target: int
) -> tuple[Path, float] | None:
    """Lowest-risk simple path from the start to ``target`` by full enumeration."""
    evaluator = RiskEvaluator(model, graph, grid)
    best = None
    for p in _all_simple_paths(_adjacency(graph), graph.v_start):
        if p[-1] != target or len(p) == 1:
            continue
        key = (evaluator.total(p), len(p), p)
        if best is None or key < best:
            best = key
    if best is None:
        return None
    return Path(best[2]), best[0]


def min_risk_all(graph: PlanningGraph, evaluator: RiskEvaluator) -> dict[int, float]:
    """Brute-force minimum risk to every reachable vertex other than the start."""
    out: dict[int, float] = {}
    for p in _all_simple_paths(_adjacency(graph), graph.v_start):
        if len(p) == 1:
            continue
        r = evaluator.total(p)
        if r < out.get(p[-1], math.inf):
            out[p[-1]] = r
    return out


def max_utility_oracle(
    graph: PlanningGraph, rewards: RewardMap, evaluator: RiskEvaluator
) -> PlanResult:
    best = None
    for p in _all_simple_paths(_adjacency(graph), graph.v_start):
        reward = _reward(p, rewards)
        value = reward / evaluator.total(p)
        key = (-value, len(p) != 1, len(p), p)
        if best is None or key < best[0]:
            best = (key, reward)
    (_, _, _, vertices), reward = best
    breakdown = evaluator.evaluate(vertices)
    return PlanResult(
        path=Path(vertices),
        utility=Utility.of(reward, breakdown.total),
        breakdown=breakdown,
        planner="stay" if len(vertices) == 1 else "exact",
    )


@dataclass(frozen=True)
class WeightedDigraph:
    vertices: tuple
    edges: tuple[tuple[object, object, float], ...]

    def total(self, cycle: Sequence) -> float:
        weights = {(u, v): w for u, v, w in self.edges}
        return sum(weights[(a, b)] for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]))


def inverse_utility(risk: float, reward: float) -> float:
    return risk / reward


def utility_to_edge_weights(prefix_inverse_utilities: Sequence[tuple[Sequence, float]]) -> WeightedDigraph:
    """Turn a chain of growing prefixes and their inverse utilities into edge weights.

    Each step's weight is the change in inverse utility it causes; the bare
    origin has inverse utility 0.  An edge met twice keeps its first weight.
    """
    chain = [(tuple(p), float(x)) for p, x in prefix_inverse_utilities]
    if not chain:
        raise ValueError("empty chain")
    if len(chain[0][0]) == 1:
        if chain[0][1] != 0:
            raise ValueError("the origin-only prefix must have inverse utility 0")
    else:
        chain.insert(0, (chain[0][0][:-1], 0.0))
    for (a, _), (b, _) in zip(chain, chain[1:]):
        if len(b) != len(a) + 1 or b[: len(a)] != a:
            raise ValueError(f"{list(b)} does not extend {list(a)} by one vertex")

    vertices = []
    for v in chain[-1][0]:
        if v not in vertices:
            vertices.append(v)
    edges: dict[tuple, float] = {}
    for (a, xa), (b, xb) in zip(chain, chain[1:]):
        edges.setdefault((a[-1], b[-1]), xb - xa)
    return WeightedDigraph(tuple(vertices), tuple((u, v, w) for (u, v), w in edges.items()))


def find_negative_cycle(g: WeightedDigraph) -> list | None:
    """Bellman-Ford from a virtual source; returns one negative cycle's vertices or None."""
    dist = {v: 0.0 for v in g.vertices}
    pred: dict = {v: None for v in g.vertices}
    changed = None
    for _ in range(len(g.vertices)):
        changed = None
        for u, v, w in g.edges:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                pred[v] = u
                changed = v
        if changed is None:
            return None
    # `changed` was relaxed in round n, so walking back n steps lands on the cycle
    v = changed
    for _ in range(len(g.vertices)):
        v = pred[v]
    cycle = [v]
    u = pred[v]
    while u != v:
        cycle.append(u)
        u = pred[u]
    cycle.reverse()
    return cycle


@dataclass(frozen=True)
class NegativeCycleDemo:
    chain: tuple[tuple[tuple[int, ...], float, float], ...]  # (walk prefix, risk, reward)
    digraph: WeightedDigraph
    cycle: list | None


def negative_cycle_demo() -> NegativeCycleDemo:
    """Three cells in a row, priced so that bouncing between the last two pays off.

    The first two steps carry the (risk, reward) pairs (5, 5) and (8, 16) scaled by
    1/16, giving inverse utilities 1 and 0.5.  Walking back onto the middle cell
    collects its reward again for little extra risk, so the derived digraph has a
    negative cycle and a shortest-path formulation would loop forever.
    """
    grid = OccupancyGrid(np.zeros((1, 3), dtype=bool), start=(0, 0))
    graph = grid_to_graph(grid)
    model = RiskModel(
        state_elements=(CellTable(1.0, {(0, 0): 0.0, (0, 1): 5 / 16, (0, 2): 3 / 16}),),
        path_elements=(),
        w_path=0.0,
    )
    evaluator = RiskEvaluator(model, graph, grid)
    rewards = RewardMap(np.array([0.0, 5 / 16, 11 / 16]))
    walk = (0, 1, 2, 1, 2)
    chain = []
    for k in range(2, len(walk) + 1):
        prefix = walk[:k]
        chain.append((prefix, evaluator.total(prefix), _reward(prefix, rewards)))
    digraph = utility_to_edge_weights([(p, inverse_utility(risk, reward)) for p, risk, reward in chain])
    return NegativeCycleDemo(tuple(chain), digraph, find_negative_cycle(digraph))
