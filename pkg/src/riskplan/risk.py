"""Explicit path risk: per-state elements integrated along a path plus path-shape elements.

State elements map a vertex to a unit risk in ``[0, 1]`` that depends on the
vertex alone.  Path elements look at the whole vertex sequence (turn count,
step count).  The two parts are combined by a weighted sum::

    total = max(risk_floor, w_states * sum(state_risk(v) for v in path)
                            + w_path * sum(weight * unit for each path element))
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import ClassVar, Mapping, Sequence

import numpy as np
from scipy import ndimage

from .domain import Cell, Connectivity, OccupancyGrid, Path, PlanningGraph


class RiskModelError(ValueError):
    pass


def _check_weight(weight: float, name: str) -> None:
    if not weight >= 0:
        raise RiskModelError(f"{name}: weight must be >= 0, got {weight}")


def distance_transform(grid: OccupancyGrid, graph: PlanningGraph) -> np.ndarray:
    """Steps from each vertex to the nearest occupied cell or the map boundary.

    The boundary counts as an obstacle surface just outside the grid, so cells on
    the edge of the map are at distance 1.  Steps follow ``graph.connectivity``.
    Returns an integer array indexed by vertex id.
    """
    free = np.pad(~grid.occupied, 1, constant_values=False)
    metric = "taxicab" if graph.connectivity is Connectivity.ORTHOGONAL else "chessboard"
    dist = ndimage.distance_transform_cdt(free, metric=metric)
    inner = dist[tuple(slice(1, -1) for _ in range(grid.ndim))]
    return np.array([inner[c] for c in graph.cells], dtype=np.int64)


def obstacle_density(grid: OccupancyGrid, graph: PlanningGraph, radius: int) -> np.ndarray:
    """Fraction of occupied cells in the Chebyshev window around each vertex.

    Cells outside the map count as occupied.
    """
    window = np.ones((2 * radius + 1,) * grid.ndim, dtype=np.int64)
    counts = ndimage.correlate(grid.occupied.astype(np.int64), window, mode="constant", cval=1)
    return np.array([counts[c] for c in graph.cells], dtype=float) / window.size


@dataclass(frozen=True)
class DistanceToObstacle:
    kind: ClassVar[str] = "distance_to_obstacle"
    weight: float = 1.0
    d_max: float = 3.0

    def __post_init__(self):
        _check_weight(self.weight, self.kind)
        if not self.d_max > 0:
            raise RiskModelError(f"{self.kind}: d_max must be > 0")

    def unit_values(self, graph: PlanningGraph, grid: OccupancyGrid) -> np.ndarray:
        d = distance_transform(grid, graph)
        return np.clip(1.0 - d / self.d_max, 0.0, 1.0)

    def params(self) -> dict:
        return {"d_max": self.d_max}


@dataclass(frozen=True)
class Visibility:
    kind: ClassVar[str] = "visibility"
    weight: float = 1.0
    radius: int = 2

    def __post_init__(self):
        _check_weight(self.weight, self.kind)
        if not (isinstance(self.radius, int) and self.radius >= 0):
            raise RiskModelError(f"{self.kind}: radius must be a non-negative integer")

    def unit_values(self, graph: PlanningGraph, grid: OccupancyGrid) -> np.ndarray:
        return obstacle_density(grid, graph, self.radius)

    def params(self) -> dict:
        return {"radius": self.radius}


@dataclass(frozen=True)
class ActionLength:
    kind: ClassVar[str] = "action_length"
    weight: float = 1.0
    risk_per_step: float = 0.05

    def __post_init__(self):
        _check_weight(self.weight, self.kind)
        if not 0 <= self.risk_per_step <= 1:
            raise RiskModelError(f"{self.kind}: risk_per_step must lie in [0, 1]")

    def unit_values(self, graph: PlanningGraph, grid: OccupancyGrid) -> np.ndarray:
        return np.full(graph.n_vertices, float(self.risk_per_step))

    def params(self) -> dict:
        return {"risk_per_step": self.risk_per_step}


@dataclass(frozen=True)
class CellTable:
    """Unit risk looked up per cell; cells missing from the table get ``default``.

    Lets callers plug in state risk computed elsewhere.
    """

    kind: ClassVar[str] = "cell_table"
    weight: float = 1.0
    table: Mapping[Cell, float] = field(default_factory=dict)
    default: float = 0.0

    def __post_init__(self):
        _check_weight(self.weight, self.kind)
        values = list(self.table.values()) + [self.default]
        if any(not 0 <= x <= 1 for x in values):
            raise RiskModelError(f"{self.kind}: unit risks must lie in [0, 1]")

    def unit_values(self, graph: PlanningGraph, grid: OccupancyGrid) -> np.ndarray:
        return np.array([float(self.table.get(c, self.default)) for c in graph.cells])

    def params(self) -> dict:
        return {
            "default": self.default,
            "table": [[list(c), float(x)] for c, x in sorted(self.table.items())],
        }


@dataclass(frozen=True)
class PathShape:
    vertices: tuple[int, ...]
    steps: int
    turns: int


@dataclass(frozen=True)
class Tortuosity:
    kind: ClassVar[str] = "tortuosity"
    weight: float = 1.0
    risk_per_turn: float = 0.1

    def __post_init__(self):
        _check_weight(self.weight, self.kind)
        if not self.risk_per_turn >= 0:
            raise RiskModelError(f"{self.kind}: risk_per_turn must be >= 0")

    def unit(self, shape: PathShape) -> float:
        return min(1.0, shape.turns * self.risk_per_turn)

    def params(self) -> dict:
        return {"risk_per_turn": self.risk_per_turn}


@dataclass(frozen=True)
class PathLength:
    kind: ClassVar[str] = "path_length"
    weight: float = 1.0
    risk_per_step: float = 0.02

    def __post_init__(self):
        _check_weight(self.weight, self.kind)
        if not self.risk_per_step >= 0:
            raise RiskModelError(f"{self.kind}: risk_per_step must be >= 0")

    def unit(self, shape: PathShape) -> float:
        return min(1.0, shape.steps * self.risk_per_step)

    def params(self) -> dict:
        return {"risk_per_step": self.risk_per_step}


STATE_ELEMENTS = {cls.kind: cls for cls in (DistanceToObstacle, Visibility, ActionLength, CellTable)}
PATH_ELEMENTS = {cls.kind: cls for cls in (Tortuosity, PathLength)}


@dataclass(frozen=True)
class RiskModel:
    state_elements: tuple = (DistanceToObstacle(), Visibility(), ActionLength())
    path_elements: tuple = (Tortuosity(), PathLength())
    w_states: float = 1.0
    w_path: float = 1.0
    risk_floor: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "state_elements", tuple(self.state_elements))
        object.__setattr__(self, "path_elements", tuple(self.path_elements))
        _check_weight(self.w_states, "w_states")
        _check_weight(self.w_path, "w_path")
        if not self.w_states + self.w_path > 0:
            raise RiskModelError("w_states + w_path must be positive")
        if not self.risk_floor > 0:
            raise RiskModelError("risk_floor must be positive")
        # any object with a weight and unit_values() (state) or unit() (path) plugs in
        for el in self.state_elements:
            if not hasattr(el, "unit_values"):
                raise RiskModelError(f"{el!r} is not a state risk element")
        for el in self.path_elements:
            if not hasattr(el, "unit"):
                raise RiskModelError(f"{el!r} is not a path risk element")

    def bind(self, graph: PlanningGraph, grid: OccupancyGrid) -> RiskEvaluator:
        return RiskEvaluator(self, graph, grid)


@dataclass(frozen=True)
class RiskBreakdown:
    per_state: tuple[tuple[int, float], ...]
    integrated_states_risk: float
    per_path_element: tuple[tuple[str, float], ...]
    path_risk_component: float
    total: float


def count_turns(graph: PlanningGraph, vertices: Sequence[int]) -> int:
    cells = graph.cells
    turns = 0
    prev = None
    for a, b in zip(vertices, vertices[1:]):
        step = tuple(y - x for x, y in zip(cells[a], cells[b]))
        if prev is not None and step != prev:
            turns += 1
        prev = step
    return turns


def turns(path: Path, graph: PlanningGraph) -> int:
    """Number of heading changes along ``path``."""
    return count_turns(graph, path.vertices)


class RiskEvaluator:
    """A risk model bound to one graph: state risks are computed once up front.

    ``evaluate`` accepts any vertex sequence (walks included) so analysis code can
    price non-simple sequences; callers planning paths pass simple ones.
    """

    def __init__(self, model: RiskModel, graph: PlanningGraph, grid: OccupancyGrid):
        self.model = model
        self.graph = graph
        self.grid = grid
        total_weight = sum(el.weight for el in model.state_elements)
        if model.state_elements and total_weight > 0:
            acc = np.zeros(graph.n_vertices)
            for el in model.state_elements:
                acc += el.weight * el.unit_values(graph, grid)
            values = np.clip(acc / total_weight, 0.0, 1.0)
        else:
            values = np.zeros(graph.n_vertices)
        self.state = [float(x) for x in values]

    def state_risk(self, v: int) -> float:
        return self.state[v]

    def _parts(self, vertices: Sequence[int]) -> tuple[float, list[tuple[str, float]], float]:
        integrated = 0.0
        for v in vertices:
            integrated += self.state[v]
        shape = PathShape(tuple(vertices), len(vertices) - 1, count_turns(self.graph, vertices))
        units = [(el.kind, el.unit(shape)) for el in self.model.path_elements]
        component = 0.0
        for el, (_, u) in zip(self.model.path_elements, units):
            component += el.weight * u
        return integrated, units, component

    def _combine(self, integrated: float, component: float) -> float:
        m = self.model
        return max(m.risk_floor, m.w_states * integrated + m.w_path * component)

    def total(self, vertices: Sequence[int]) -> float:
        integrated, _, component = self._parts(vertices)
        return self._combine(integrated, component)

    def evaluate(self, vertices: Sequence[int]) -> RiskBreakdown:
        vertices = tuple(vertices)
        integrated, units, component = self._parts(vertices)
        return RiskBreakdown(
            per_state=tuple((v, self.state[v]) for v in vertices),
            integrated_states_risk=integrated,
            per_path_element=tuple(units),
            path_risk_component=component,
            total=self._combine(integrated, component),
        )


def state_risk(model: RiskModel, graph: PlanningGraph, grid: OccupancyGrid, v: int) -> float:
    if not 0 <= v < graph.n_vertices:
        raise KeyError(f"unknown vertex {v}")
    return model.bind(graph, grid).state_risk(v)


def path_risk(model: RiskModel, graph: PlanningGraph, grid: OccupancyGrid, path: Path) -> RiskBreakdown:
    return model.bind(graph, grid).evaluate(path.vertices)
