"""Occupancy grids, planning graphs and simple paths."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

Cell = tuple[int, ...]


class Connectivity(str, Enum):
    ORTHOGONAL = "orthogonal"  # 4 in 2-D, 6 in 3-D
    FULL = "full"  # 8 in 2-D, 26 in 3-D


class GridError(ValueError):
    pass


class PathRejected(Exception):
    """Raised by :func:`extend` when a vertex cannot be appended."""

    NOT_ADJACENT = "not adjacent"
    REVISIT = "revisit"

    def __init__(self, reason: str, vertex: int):
        super().__init__(f"{reason}: {vertex}")
        self.reason = reason
        self.vertex = vertex


@dataclass(frozen=True, eq=False)
class OccupancyGrid:
    occupied: np.ndarray
    start: Cell
    poi: Cell | None = None

    def __post_init__(self):
        occ = np.asarray(self.occupied, dtype=bool)
        if occ.ndim not in (2, 3):
            raise GridError(f"unsupported number of dimensions: {occ.ndim}")
        if 0 in occ.shape:
            raise GridError("grid must have at least one cell per axis")
        occ = occ.copy()
        occ.setflags(write=False)
        object.__setattr__(self, "occupied", occ)
        object.__setattr__(self, "start", tuple(int(i) for i in self.start))
        if not self.contains(self.start):
            raise GridError(f"start {self.start} outside grid {self.dims}")
        if occ[self.start]:
            raise GridError(f"start cell {self.start} is occupied")
        if self.poi is not None:
            poi = tuple(int(i) for i in self.poi)
            if not self.contains(poi):
                raise GridError(f"poi {poi} outside grid {self.dims}")
            object.__setattr__(self, "poi", poi)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.occupied.shape

    @property
    def ndim(self) -> int:
        return self.occupied.ndim

    def contains(self, cell: Sequence[int]) -> bool:
        return len(cell) == self.ndim and all(0 <= c < n for c, n in zip(cell, self.dims))

    def is_free(self, cell: Sequence[int]) -> bool:
        return self.contains(cell) and not self.occupied[tuple(cell)]

    def __eq__(self, other):
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            self.start == other.start
            and self.poi == other.poi
            and self.dims == other.dims
            and bool(np.array_equal(self.occupied, other.occupied))
        )

    __hash__ = None


def neighbor_offsets(ndim: int, connectivity: Connectivity) -> list[Cell]:
    """Neighbour displacements in lexicographic order."""
    connectivity = Connectivity(connectivity)
    offsets = []
    for off in itertools.product((-1, 0, 1), repeat=ndim):
        nonzero = sum(1 for o in off if o)
        if nonzero == 0:
            continue
        if connectivity is Connectivity.ORTHOGONAL and nonzero > 1:
            continue
        offsets.append(off)
    return offsets


def _corner_cells(cell: Cell, off: Cell) -> Iterable[Cell]:
    # every cell reached by a proper, non-empty subset of the diagonal's axis moves
    axes = [i for i, o in enumerate(off) if o]
    for k in range(1, len(axes)):
        for subset in itertools.combinations(axes, k):
            yield tuple(c + (off[i] if i in subset else 0) for i, c in enumerate(cell))


@dataclass(frozen=True)
class PlanningGraph:
    cells: tuple[Cell, ...]
    edges: tuple[tuple[int, int], ...]
    connectivity: Connectivity
    v_start: int
    adjacency: tuple[tuple[tuple[int, int], ...], ...] = field(repr=False, compare=False)
    index: dict = field(repr=False, compare=False)

    @property
    def n_vertices(self) -> int:
        return len(self.cells)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def vertex_of(self, cell: Sequence[int]) -> int:
        try:
            return self.index[tuple(cell)]
        except KeyError:
            raise KeyError(f"no vertex for cell {tuple(cell)}") from None

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def edge_between(self, u: int, v: int) -> int | None:
        for w, e in self.adjacency[u]:
            if w == v:
                return e
        return None

    def displacement(self, u: int, v: int) -> Cell:
        a, b = self.cells[u], self.cells[v]
        return tuple(y - x for x, y in zip(a, b))


def grid_to_graph(grid: OccupancyGrid, connectivity: Connectivity | str = Connectivity.ORTHOGONAL) -> PlanningGraph:
    connectivity = Connectivity(connectivity)
    if grid.ndim not in (2, 3):
        raise GridError(f"unsupported number of dimensions: {grid.ndim}")
    if grid.occupied[grid.start]:
        raise GridError(f"start cell {grid.start} is occupied")

    # row-major (plane-major in 3-D) numbering over free cells
    free = np.argwhere(~grid.occupied)
    cells = tuple(tuple(int(i) for i in c) for c in free)
    index = {c: i for i, c in enumerate(cells)}

    pairs = set()
    for off in neighbor_offsets(grid.ndim, connectivity):
        diagonal = sum(1 for o in off if o) > 1
        for u, cell in enumerate(cells):
            nb = tuple(c + o for c, o in zip(cell, off))
            v = index.get(nb)
            if v is None or v < u:
                continue
            if diagonal and not all(grid.is_free(c) for c in _corner_cells(cell, off)):
                continue
            pairs.add((u, v))
    edges = tuple(sorted(pairs))

    adjacency: list[list[tuple[int, int]]] = [[] for _ in cells]
    for e, (u, v) in enumerate(edges):
        adjacency[u].append((v, e))
        adjacency[v].append((u, e))
    for adj in adjacency:
        adj.sort()

    return PlanningGraph(
        cells=cells,
        edges=edges,
        connectivity=connectivity,
        v_start=index[grid.start],
        adjacency=tuple(tuple(a) for a in adjacency),
        index=index,
    )


def neighbors(graph: PlanningGraph, v: int) -> list[tuple[int, int]]:
    """Adjacent ``(vertex, edge)`` pairs of ``v`` in ascending vertex order."""
    if not 0 <= v < graph.n_vertices:
        raise KeyError(f"unknown vertex {v}")
    return list(graph.adjacency[v])


@dataclass(frozen=True)
class Path:
    """A simple, edge-connected vertex sequence.

    Build with :meth:`of` (validated) or grow with :func:`extend`.
    """

    vertices: tuple[int, ...]

    @classmethod
    def of(cls, graph: PlanningGraph, vertices: Iterable[int]) -> Path:
        vs = tuple(int(v) for v in vertices)
        if not vs:
            raise ValueError("a path needs at least one vertex")
        if not 0 <= vs[0] < graph.n_vertices:
            raise KeyError(f"unknown vertex {vs[0]}")
        path = cls(vs[:1])
        for v in vs[1:]:
            path = extend(path, v, graph)
        return path

    @property
    def origin(self) -> int:
        return self.vertices[0]

    @property
    def last(self) -> int:
        return self.vertices[-1]

    @property
    def steps(self) -> int:
        return len(self.vertices) - 1

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __contains__(self, v) -> bool:
        return v in self.vertices


def extend(path: Path, v: int, graph: PlanningGraph) -> Path:
    """Append ``v``; raises :class:`PathRejected` on a revisit or a non-edge."""
    if v in path.vertices:
        raise PathRejected(PathRejected.REVISIT, v)
    if graph.edge_between(path.last, v) is None:
        raise PathRejected(PathRejected.NOT_ADJACENT, v)
    return Path(path.vertices + (v,))


@dataclass(frozen=True)
class Direction:
    """A vertex together with the edge it was entered through (``None`` at the start)."""

    vertex: int
    incoming_edge: int | None


def directions(graph: PlanningGraph, v: int) -> list[Direction]:
    dirs = [Direction(v, e) for _, e in graph.adjacency[v]]
    if v == graph.v_start:
        dirs.insert(0, Direction(v, None))
    return dirs
