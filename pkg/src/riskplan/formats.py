"""Text map, JSON config, JSON result and CSV reward formats."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .domain import Cell, Connectivity, GridError, OccupancyGrid, Path, PlanningGraph, grid_to_graph
from .planners import EnumerationLimits, PlanResult
from .reward import RewardError, RewardMap, Utility, utility
from .risk import PATH_ELEMENTS, STATE_ELEMENTS, RiskBreakdown, RiskModel, RiskModelError


class ParseError(ValueError):
    """Malformed input; ``line``/``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class InvariantError(ValueError):
    """Well-formed input that violates a constraint; ``key`` locates it."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


# -- maps ---------------------------------------------------------------------

OBSTACLE, FREE, START, POI = "#", ".", "S", "P"


def parse_map(text: str) -> OccupancyGrid:
    """Parse a text map; blank lines separate the layers of a 3-D map.

    A map with a single layer is 2-D.
    """
    layers: list[list[tuple[int, str]]] = [[]]
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if line.strip() == "":
            if layers[-1]:
                layers.append([])
            continue
        layers[-1].append((lineno, line))
    layers = [layer for layer in layers if layer]
    if not layers:
        raise ParseError("map is empty")

    width = len(layers[0][0][1])
    height = len(layers[0])
    occ = np.zeros((len(layers), height, width), dtype=bool)
    start: Cell | None = None
    poi: Cell | None = None
    for z, layer in enumerate(layers):
        if len(layer) != height:
            raise ParseError(f"layer {z + 1} has {len(layer)} rows, expected {height}", layer[0][0])
        for y, (lineno, line) in enumerate(layer):
            if len(line) != width:
                raise ParseError(f"row has {len(line)} cells, expected {width} (rows must be rectangular)", lineno)
            for x, ch in enumerate(line):
                cell = (z, y, x)
                if ch == OBSTACLE:
                    occ[cell] = True
                elif ch == START:
                    if start is not None:
                        raise ParseError("more than one 'S' (exactly one start is required)", lineno, x + 1)
                    start = cell
                elif ch == POI:
                    if poi is not None:
                        raise ParseError("more than one 'P' (at most one point of interest)", lineno, x + 1)
                    poi = cell
                elif ch != FREE:
                    raise ParseError(f"unexpected character {ch!r}", lineno, x + 1)
    if start is None:
        raise ParseError("no 'S' (exactly one start is required)")
    if len(layers) == 1:
        occ = occ[0]
        start = start[1:]
        poi = poi[1:] if poi is not None else None
    return OccupancyGrid(occ, start, poi)


def serialize_map(grid: OccupancyGrid) -> str:
    occ = grid.occupied if grid.ndim == 3 else grid.occupied[None]
    start = grid.start if grid.ndim == 3 else (0,) + grid.start
    poi = None if grid.poi is None else (grid.poi if grid.ndim == 3 else (0,) + grid.poi)
    layers = []
    for z in range(occ.shape[0]):
        rows = []
        for y in range(occ.shape[1]):
            row = []
            for x in range(occ.shape[2]):
                cell = (z, y, x)
                if cell == start:
                    row.append(START)
                elif cell == poi and not occ[cell]:
                    row.append(POI)
                else:
                    row.append(OBSTACLE if occ[cell] else FREE)
            rows.append("".join(row))
        layers.append("\n".join(rows))
    return "\n\n".join(layers) + "\n"


# -- rewards ------------------------------------------------------------------


def parse_rewards(text: str, grid: OccupancyGrid, graph: PlanningGraph, gamma: float = 1.0) -> RewardMap:
    """Rewards as CSV congruent with the map; values on obstacle cells are ignored."""
    layers: list[list[tuple[int, list[str]]]] = [[]]
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(c.strip() == "" for c in row):
            if layers[-1]:
                layers.append([])
            continue
        layers[-1].append((lineno, row))
    layers = [layer for layer in layers if layer]
    dims = grid.dims if grid.ndim == 3 else (1,) + grid.dims
    if len(layers) != dims[0]:
        raise ParseError(f"reward file has {len(layers)} layers, map has {dims[0]}")
    values = np.zeros(dims)
    for z, layer in enumerate(layers):
        if len(layer) != dims[1]:
            raise ParseError(f"reward layer {z + 1} has {len(layer)} rows, map has {dims[1]}", layer[0][0])
        for y, (lineno, row) in enumerate(layer):
            if len(row) != dims[2]:
                raise ParseError(f"reward row has {len(row)} values, map has {dims[2]}", lineno)
            for x, raw in enumerate(row):
                try:
                    values[z, y, x] = float(raw)
                except ValueError:
                    raise ParseError(f"not a number: {raw!r}", lineno, x + 1) from None
    if grid.ndim == 2:
        values = values[0]
    per_vertex = np.array([values[c] for c in graph.cells])
    bad = [c for c, r in zip(graph.cells, per_vertex) if not 0 <= r <= 1]
    if bad:
        raise InvariantError(f"rewards{list(bad[0])}", f"reward {values[bad[0]]} outside [0, 1]")
    return RewardMap(per_vertex, gamma)


def serialize_rewards(rewards: RewardMap, grid: OccupancyGrid, graph: PlanningGraph) -> str:
    values = np.zeros(grid.dims)
    for v, c in enumerate(graph.cells):
        values[c] = rewards[v]
    if grid.ndim == 2:
        values = values[None]
    out = []
    for layer in values:
        out.append("\n".join(",".join(repr(float(x)) for x in row) for row in layer))
    return "\n\n".join(out) + "\n"


# -- config -------------------------------------------------------------------


@dataclass(frozen=True)
class Config:
    connectivity: Connectivity = Connectivity.ORTHOGONAL
    gamma: float = 1.0
    model: RiskModel = field(default_factory=RiskModel)
    limits: EnumerationLimits = field(default_factory=EnumerationLimits)

    def __post_init__(self):
        object.__setattr__(self, "connectivity", Connectivity(self.connectivity))


def _element_to_dict(el) -> dict:
    return {"kind": el.kind, "weight": el.weight, **el.params()}


def config_to_dict(cfg: Config) -> dict:
    m = cfg.model
    return {
        "connectivity": cfg.connectivity.value,
        "gamma": cfg.gamma,
        "risk": {
            "state_elements": [_element_to_dict(el) for el in m.state_elements],
            "path_elements": [_element_to_dict(el) for el in m.path_elements],
            "w_states": m.w_states,
            "w_path": m.w_path,
            "risk_floor": m.risk_floor,
        },
        "limits": {"max_paths": cfg.limits.max_paths, "max_seconds": cfg.limits.max_seconds},
        "deterministic": True,
    }


def serialize_config(cfg: Config) -> str:
    return json.dumps(config_to_dict(cfg), indent=2) + "\n"


def _take(obj, key: str, allowed: set[str]) -> dict:
    if not isinstance(obj, dict):
        raise InvariantError(key, "expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise InvariantError(f"{key}.{unknown[0]}" if key else unknown[0], "unknown key")
    return obj


def _number(obj: dict, name: str, key: str, default, lo=None, hi=None, integer=False):
    value = obj.get(name, default)
    path = f"{key}.{name}" if key else name
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvariantError(path, f"expected a number, got {value!r}")
    if integer and value != int(value):
        raise InvariantError(path, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise InvariantError(path, f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise InvariantError(path, f"must be <= {hi}, got {value}")
    return int(value) if integer else float(value)


_ELEMENT_PARAMS = {
    "distance_to_obstacle": {"d_max": (3.0, False)},
    "visibility": {"radius": (2, True)},
    "action_length": {"risk_per_step": (0.05, False)},
    "cell_table": {"table": ([], None), "default": (0.0, False)},
    "tortuosity": {"risk_per_turn": (0.1, False)},
    "path_length": {"risk_per_step": (0.02, False)},
}


def _element_from_dict(obj, key: str, registry: dict):
    if not isinstance(obj, dict):
        raise InvariantError(key, "expected an object")
    kind = obj.get("kind")
    if kind not in registry:
        raise InvariantError(f"{key}.kind", f"unknown element kind {kind!r}; expected one of {sorted(registry)}")
    params = _ELEMENT_PARAMS[kind]
    _take(obj, key, {"kind", "weight", *params})
    kwargs = {"weight": _number(obj, "weight", key, 1.0, lo=0)}
    for name, (default, integer) in params.items():
        if name == "table":
            table = obj.get("table", default)
            if not isinstance(table, list):
                raise InvariantError(f"{key}.table", "expected a list of [cell, value] pairs")
            try:
                kwargs["table"] = {tuple(int(i) for i in c): float(x) for c, x in table}
            except (TypeError, ValueError):
                raise InvariantError(f"{key}.table", "expected a list of [cell, value] pairs") from None
        else:
            kwargs[name] = _number(obj, name, key, default, lo=0, integer=bool(integer))
    try:
        return registry[kind](**kwargs)
    except RiskModelError as exc:
        raise InvariantError(key, str(exc)) from None


def config_from_dict(obj) -> Config:
    _take(obj, "", {"connectivity", "gamma", "risk", "limits", "deterministic"})
    if obj.get("deterministic", True) is not True:
        raise InvariantError("deterministic", "only deterministic planning is supported")
    try:
        connectivity = Connectivity(obj.get("connectivity", "orthogonal"))
    except ValueError:
        raise InvariantError("connectivity", f"expected 'orthogonal' or 'full', got {obj['connectivity']!r}") from None
    gamma = _number(obj, "gamma", "", 1.0, lo=0, hi=1)

    risk = _take(obj.get("risk", {}), "risk", {"state_elements", "path_elements", "w_states", "w_path", "risk_floor"})
    defaults = RiskModel()
    kwargs = {}
    for name, registry in (("state_elements", STATE_ELEMENTS), ("path_elements", PATH_ELEMENTS)):
        if name in risk:
            if not isinstance(risk[name], list):
                raise InvariantError(f"risk.{name}", "expected a list")
            kwargs[name] = tuple(
                _element_from_dict(el, f"risk.{name}[{i}]", registry) for i, el in enumerate(risk[name])
            )
    kwargs["w_states"] = _number(risk, "w_states", "risk", defaults.w_states, lo=0)
    kwargs["w_path"] = _number(risk, "w_path", "risk", defaults.w_path, lo=0)
    kwargs["risk_floor"] = _number(risk, "risk_floor", "risk", defaults.risk_floor)
    try:
        model = RiskModel(**kwargs)
    except RiskModelError as exc:
        raise InvariantError("risk", str(exc)) from None

    lim = _take(obj.get("limits", {}), "limits", {"max_paths", "max_seconds"})
    limits = EnumerationLimits(
        max_paths=_number(lim, "max_paths", "limits", EnumerationLimits.max_paths, lo=0, integer=True),
        max_seconds=_number(lim, "max_seconds", "limits", EnumerationLimits.max_seconds, lo=0),
    )
    return Config(connectivity, gamma, model, limits)


def parse_config(text: str) -> Config:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return config_from_dict(obj)


# -- results ------------------------------------------------------------------


@dataclass(frozen=True)
class ResultFile:
    mode: str
    result: PlanResult
    config: Config
    grid: OccupancyGrid
    rewards: RewardMap

    def graph(self) -> PlanningGraph:
        return grid_to_graph(self.grid, self.config.connectivity)


def result_to_dict(rf: ResultFile) -> dict:
    graph = rf.graph()
    res = rf.result
    bd = res.breakdown
    reward_grid = np.full(rf.grid.dims, np.nan)
    for v, c in enumerate(graph.cells):
        reward_grid[c] = rf.rewards[v]
    return {
        "mode": rf.mode,
        "planner": res.planner,
        "path": [list(graph.cells[v]) for v in res.path.vertices],
        "utility": {"reward": res.utility.reward, "risk": res.utility.risk, "value": res.utility.value},
        "breakdown": {
            "per_state": [[list(graph.cells[v]), x] for v, x in bd.per_state],
            "integrated_states_risk": bd.integrated_states_risk,
            "per_path_element": [[k, x] for k, x in bd.per_path_element],
            "path_risk_component": bd.path_risk_component,
            "total": bd.total,
        },
        "stats": {"paths_enumerated": res.paths_enumerated},
        "truncated": res.truncated,
        "config": config_to_dict(rf.config),
        "map": serialize_map(rf.grid).splitlines(),
        "rewards": _nested(reward_grid),
    }


def _nested(a: np.ndarray):
    if a.ndim == 1:
        return [None if np.isnan(x) else float(x) for x in a]
    return [_nested(x) for x in a]


def serialize_result(rf: ResultFile) -> str:
    return json.dumps(result_to_dict(rf), indent=2) + "\n"


def result_from_dict(obj) -> ResultFile:
    keys = {"mode", "planner", "path", "utility", "breakdown", "stats", "truncated", "config", "map", "rewards"}
    _take(obj, "", keys)
    missing = sorted(keys - set(obj))
    if missing:
        raise InvariantError(missing[0], "missing key")
    config = config_from_dict(obj["config"])
    grid = parse_map("\n".join(obj["map"]))
    graph = grid_to_graph(grid, config.connectivity)
    reward_grid = np.array(obj["rewards"], dtype=float)
    rewards = RewardMap(np.array([reward_grid[c] for c in graph.cells]), config.gamma)

    def vertex(cell, key):
        try:
            return graph.vertex_of(cell)
        except KeyError:
            raise InvariantError(key, f"cell {cell} is not a free cell of the map") from None

    path = Path.of(graph, [vertex(c, "path") for c in obj["path"]])
    bd = obj["breakdown"]
    breakdown = RiskBreakdown(
        per_state=tuple((vertex(c, "breakdown.per_state"), float(x)) for c, x in bd["per_state"]),
        integrated_states_risk=float(bd["integrated_states_risk"]),
        per_path_element=tuple((str(k), float(x)) for k, x in bd["per_path_element"]),
        path_risk_component=float(bd["path_risk_component"]),
        total=float(bd["total"]),
    )
    u = obj["utility"]
    result = PlanResult(
        path=path,
        utility=Utility(float(u["reward"]), float(u["risk"]), float(u["value"])),
        breakdown=breakdown,
        planner=obj["planner"],
        truncated=bool(obj["truncated"]),
        paths_enumerated=obj["stats"]["paths_enumerated"],
    )
    return ResultFile(obj["mode"], result, config, grid, rewards)


def parse_result(text: str) -> ResultFile:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return result_from_dict(obj)


def check_result(rf: ResultFile, tol: float = 1e-9) -> list[str]:
    """Re-price the stored path under the echoed config; returns the mismatches."""
    graph = rf.graph()
    evaluator = rf.config.model.bind(graph, rf.grid)
    res = rf.result
    fresh = utility(res.path, rf.rewards, evaluator)
    problems = []
    for name, stored, recomputed in (
        ("utility.reward", res.utility.reward, fresh.reward),
        ("utility.risk", res.utility.risk, fresh.risk),
        ("utility.value", res.utility.value, fresh.value),
        ("breakdown.total", res.breakdown.total, fresh.risk),
    ):
        if abs(stored - recomputed) > tol * max(1.0, abs(recomputed)):
            problems.append(f"{name}: stored {stored!r}, recomputed {recomputed!r}")
    return problems


__all__ = [
    "Config",
    "GridError",
    "InvariantError",
    "ParseError",
    "RewardError",
    "ResultFile",
    "check_result",
    "parse_config",
    "parse_map",
    "parse_result",
    "parse_rewards",
    "serialize_config",
    "serialize_map",
    "serialize_result",
    "serialize_rewards",
]
