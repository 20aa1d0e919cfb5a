"""Reward maps, discounted reward accumulation and the reward/risk utility."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import Cell, OccupancyGrid, Path, PlanningGraph
from .risk import RiskEvaluator


class RewardError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RewardMap:
    reward: np.ndarray  # indexed by vertex id
    gamma: float = 1.0

    def __post_init__(self):
        r = np.asarray(self.reward, dtype=float).copy()
        if r.ndim != 1:
            raise RewardError("rewards must be a flat per-vertex array")
        if np.any(~np.isfinite(r)) or np.any(r < 0) or np.any(r > 1):
            bad = int(np.flatnonzero(~((r >= 0) & (r <= 1)))[0])
            raise RewardError(f"reward of vertex {bad} is {r[bad]!r}, outside [0, 1]")
        if not 0 <= self.gamma <= 1:
            raise RewardError(f"gamma must lie in [0, 1], got {self.gamma}")
        r.setflags(write=False)
        object.__setattr__(self, "reward", r)
        object.__setattr__(self, "gamma", float(self.gamma))

    def __getitem__(self, v: int) -> float:
        return float(self.reward[v])

    def __len__(self) -> int:
        return len(self.reward)

    def check_covers(self, graph: PlanningGraph) -> None:
        if len(self) != graph.n_vertices:
            raise RewardError(f"reward map has {len(self)} entries, graph has {graph.n_vertices} vertices")

    def __eq__(self, other):
        if not isinstance(other, RewardMap):
            return NotImplemented
        return self.gamma == other.gamma and bool(np.array_equal(self.reward, other.reward))

    __hash__ = None


def accumulate(vertices: Sequence[int], rewards: RewardMap) -> float:
    # the origin is where the robot already is: only rewards collected after moving count
    r = 0.0
    g = rewards.gamma
    for v in vertices[1:]:
        r = g * r + float(rewards.reward[v])
    return r


def accumulate_reward(path: Path, rewards: RewardMap) -> float:
    return accumulate(path.vertices, rewards)


def unaccumulate_reward(r: float, v_reward: float, gamma: float) -> float:
    """Undo one step ``r <- gamma * r + v_reward``."""
    if gamma == 0:
        raise RewardError("cannot undo an accumulation step with gamma = 0")
    return (r - v_reward) / gamma


@dataclass(frozen=True)
class Utility:
    reward: float
    risk: float
    value: float

    @classmethod
    def of(cls, reward: float, risk: float) -> Utility:
        if not risk > 0:
            raise ValueError(f"risk must be positive, got {risk}")
        return cls(reward, risk, reward / risk)

    @property
    def inverse(self) -> float:
        return self.risk / self.reward if self.reward else math.inf


def stay_reward(graph: PlanningGraph, rewards: RewardMap) -> float:
    # staying put is worth the start's own reward, otherwise it could never win
    return rewards[graph.v_start]


def utility(path: Path, rewards: RewardMap, evaluator: RiskEvaluator) -> Utility:
    risk = evaluator.total(path.vertices)
    if len(path) == 1 and path.origin == evaluator.graph.v_start:
        return Utility.of(stay_reward(evaluator.graph, rewards), risk)
    return Utility.of(accumulate(path.vertices, rewards), risk)


def synth_reward_map(
    graph: PlanningGraph,
    grid: OccupancyGrid,
    poi: Cell | None = None,
    *,
    standoff: float = 2.0,
    falloff: float | None = None,
    gamma: float = 1.0,
) -> RewardMap:
    """Synthetic viewpoint quality: 1 on a ring of radius ``standoff`` around the PoI.

    Reward falls off linearly with the distance from that ring and reaches 0 at
    ``falloff`` cells away (default: the largest ring distance on the map).
    """
    if poi is None:
        poi = grid.poi if grid.poi is not None else tuple(n // 2 for n in grid.dims)
    if not grid.contains(poi):
        raise RewardError(f"poi {tuple(poi)} outside grid {grid.dims}")
    coords = np.array(graph.cells, dtype=float).reshape(graph.n_vertices, grid.ndim)
    dist = np.linalg.norm(coords - np.asarray(poi, dtype=float), axis=1)
    off_ring = np.abs(dist - standoff)
    if falloff is None:
        corners = np.array(np.meshgrid(*[[0, n - 1] for n in grid.dims], indexing="ij")).reshape(grid.ndim, -1).T
        far = np.linalg.norm(corners - np.asarray(poi, dtype=float), axis=1).max()
        falloff = max(abs(far - standoff), standoff, 1.0)
    values = np.clip(1.0 - off_ring / falloff, 0.0, 1.0)
    return RewardMap(values, gamma)
