import itertools
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskplan.domain import OccupancyGrid, Path, extend, grid_to_graph
from riskplan.risk import (
    ActionLength,
    CellTable,
    DistanceToObstacle,
    PathLength,
    RiskEvaluator,
    RiskModel,
    RiskModelError,
    Tortuosity,
    Visibility,
    distance_transform,
    path_risk,
    state_risk,
    turns,
)

from .conftest import connectivities, empty_grid, grids


def brute_distance(grid, cell, connectivity):
    """Metric distance to the nearest occupied cell or the ring just outside the map."""
    metric = (lambda d: sum(d)) if connectivity == "orthogonal" else (lambda d: max(d))
    best = min(min(c + 1, n - c) for c, n in zip(cell, grid.dims))
    for occ in np.argwhere(grid.occupied):
        best = min(best, metric([abs(a - b) for a, b in zip(cell, occ)]))
    return best


def brute_density(grid, cell, radius):
    hits = total = 0
    for off in itertools.product(range(-radius, radius + 1), repeat=grid.ndim):
        c = tuple(a + o for a, o in zip(cell, off))
        total += 1
        hits += (not grid.contains(c)) or bool(grid.occupied[c])
    return hits / total


def fig1_path_a():
    # ten cells, six heading changes
    cells = [(0, 0), (1, 0), (2, 0), (2, 1), (3, 1), (3, 2), (2, 2), (2, 3), (1, 3), (0, 3)]
    grid = empty_grid(4, 4)
    graph = grid_to_graph(grid)
    return grid, graph, Path.of(graph, [graph.vertex_of(c) for c in cells])


FIG1_MODEL = RiskModel(
    state_elements=(CellTable(1.0, default=0.1),),
    path_elements=(Tortuosity(1.0, risk_per_turn=0.1),),
    w_states=1.0,
    w_path=1.0,
)


def test_distance_transform_examples():
    occ = np.zeros((5, 5), dtype=bool)
    occ[2, 2] = True
    grid = OccupancyGrid(occ, (0, 0))
    g = grid_to_graph(grid)
    d = distance_transform(grid, g)
    assert d[g.vertex_of((2, 1))] == 1

    grid = empty_grid(5, 5)
    g = grid_to_graph(grid)
    d = distance_transform(grid, g)
    assert d[g.vertex_of((2, 2))] == 3
    assert d[g.vertex_of((0, 2))] == 1

    grid = empty_grid(1, 1)
    assert list(distance_transform(grid, grid_to_graph(grid))) == [1]


@settings(max_examples=100, deadline=None)
@given(grids(max_side=6), connectivities)
def test_distance_transform_matches_brute_force(grid, conn):
    g = grid_to_graph(grid, conn)
    d = distance_transform(grid, g)
    assert [int(x) for x in d] == [brute_distance(grid, c, conn) for c in g.cells]


@settings(max_examples=50, deadline=None)
@given(grids(max_side=3, ndim=3), connectivities)
def test_distance_transform_3d(grid, conn):
    g = grid_to_graph(grid, conn)
    d = distance_transform(grid, g)
    assert [int(x) for x in d] == [brute_distance(grid, c, conn) for c in g.cells]


@settings(max_examples=60, deadline=None)
@given(grids(max_side=6), st.integers(0, 3))
def test_visibility_matches_window_count(grid, radius):
    g = grid_to_graph(grid)
    got = Visibility(1.0, radius).unit_values(g, grid)
    want = [brute_density(grid, c, radius) for c in g.cells]
    assert np.allclose(got, want, rtol=0, atol=1e-12)


def test_state_risk_distance_element():
    occ = np.zeros((5, 5), dtype=bool)
    occ[2, 2] = True
    grid = OccupancyGrid(occ, (0, 0))
    g = grid_to_graph(grid)
    model = RiskModel(state_elements=(DistanceToObstacle(1.0, d_max=3),), path_elements=())
    assert state_risk(model, g, grid, g.vertex_of((2, 1))) == pytest.approx(2 / 3, abs=1e-12)

    grid = empty_grid(7, 7)
    g = grid_to_graph(grid)
    assert state_risk(model, g, grid, g.vertex_of((3, 3))) == 0.0


def test_state_risk_renormalizes_by_weight():
    grid = empty_grid(3, 3)
    g = grid_to_graph(grid)
    model = RiskModel(
        state_elements=(CellTable(3.0, default=1.0), ActionLength(1.0, risk_per_step=0.2)),
        path_elements=(),
    )
    assert state_risk(model, g, grid, 4) == pytest.approx((3 * 1.0 + 0.2) / 4)


def test_empty_state_elements_give_zero():
    grid = empty_grid(2, 2)
    g = grid_to_graph(grid)
    assert state_risk(RiskModel(state_elements=(), path_elements=()), g, grid, 0) == 0.0


def test_fig1_path_a_fixture():
    grid, graph, path = fig1_path_a()
    assert turns(path, graph) == 6
    for v in path:
        assert state_risk(FIG1_MODEL, graph, grid, v) == pytest.approx(0.1)
    bd = path_risk(FIG1_MODEL, graph, grid, path)
    assert bd.integrated_states_risk == pytest.approx(1.0)
    assert bd.per_path_element == (("tortuosity", pytest.approx(0.6)),)
    assert bd.total == pytest.approx(1.6)


def test_turns():
    g = grid_to_graph(empty_grid(4, 4))
    assert turns(Path.of(g, [0, 1, 2, 3]), g) == 0
    assert turns(Path.of(g, [0, 1, 5]), g) == 1
    assert turns(Path.of(g, [0, 1]), g) == 0
    assert turns(Path((0,)), g) == 0


def test_single_vertex_floor():
    grid = empty_grid(7, 7, start=(3, 3))
    g = grid_to_graph(grid)
    model = RiskModel(state_elements=(DistanceToObstacle(),), risk_floor=1e-6)
    bd = path_risk(model, g, grid, Path((g.v_start,)))
    assert bd.total == 1e-6


def test_straight_path_has_no_tortuosity():
    grid = empty_grid(1, 3)
    g = grid_to_graph(grid)
    model = RiskModel(state_elements=(), path_elements=(Tortuosity(),))
    assert path_risk(model, g, grid, Path.of(g, [0, 1, 2])).path_risk_component == 0


def test_caps_keep_units_bounded():
    shape_elems = (Tortuosity(1.0, 0.3), PathLength(1.0, 0.3))
    grid = empty_grid(4, 4)
    g = grid_to_graph(grid)
    model = RiskModel(state_elements=(), path_elements=shape_elems)
    bd = path_risk(model, g, grid, Path.of(g, [0, 1, 5, 6, 10, 11, 15]))
    assert dict(bd.per_path_element) == {"tortuosity": 1.0, "path_length": 1.0}


def test_model_validation():
    with pytest.raises(RiskModelError):
        RiskModel(w_states=0, w_path=0)
    with pytest.raises(RiskModelError):
        RiskModel(risk_floor=0)
    with pytest.raises(RiskModelError):
        Tortuosity(weight=-1)
    with pytest.raises(RiskModelError):
        CellTable(table={(0, 0): 1.5})


def random_model(draw):
    w = lambda: draw(st.floats(0, 1))  # noqa: E731
    return RiskModel(
        state_elements=(
            DistanceToObstacle(w(), d_max=draw(st.sampled_from([1.0, 2.0, 3.0, 5.0]))),
            Visibility(w(), radius=draw(st.integers(0, 2))),
            ActionLength(w(), risk_per_step=draw(st.floats(0, 1))),
        ),
        path_elements=(
            Tortuosity(w(), risk_per_turn=draw(st.floats(0, 0.5))),
            PathLength(w(), risk_per_step=draw(st.floats(0, 0.5))),
        ),
        w_states=draw(st.floats(0.01, 2)),
        w_path=draw(st.floats(0, 2)),
    )


@settings(max_examples=200, deadline=None)
@given(grids(max_side=5), connectivities, st.data())
def test_risk_never_decreases_on_extension(grid, conn, data):
    g = grid_to_graph(grid, conn)
    model = random_model(data.draw)
    ev = model.bind(g, grid)
    path = Path((g.v_start,))
    prev = ev.evaluate(path.vertices)
    for _ in range(12):
        options = [w for w, _ in g.adjacency[path.last] if w not in path]
        if not options:
            break
        path = extend(path, data.draw(st.sampled_from(options)), g)
        cur = ev.evaluate(path.vertices)
        assert cur.total >= prev.total
        assert all(0 <= x <= 1 for _, x in cur.per_state)
        assert all(0 <= x <= 1 for _, x in cur.per_path_element)
        assert cur.integrated_states_risk == pytest.approx(sum(x for _, x in cur.per_state))
        prev = cur


@settings(max_examples=60, deadline=None)
@given(grids(max_side=4, min_side=2), connectivities, st.data())
def test_state_risk_ignores_history(grid, conn, data):
    g = grid_to_graph(grid, conn)
    ev = random_model(data.draw).bind(g, grid)
    seen = {}
    for path in all_simple_paths(g, g.v_start, limit=400):
        for v, x in ev.evaluate(path).per_state:
            assert seen.setdefault(v, x) == x


def all_simple_paths(g, origin, limit=None):
    out = []

    def walk(p):
        if limit is not None and len(out) >= limit:
            return
        out.append(tuple(p))
        for w, _ in g.adjacency[p[-1]]:
            if w not in p:
                walk(p + [w])

    walk([origin])
    return out


@settings(max_examples=60, deadline=None)
@given(grids(max_side=4, min_side=2), connectivities, st.data())
def test_increment_depends_only_on_last_direction(grid, conn, data):
    # uncapped regime: caps are what would make the increment path-dependent
    g = grid_to_graph(grid, conn)
    w = lambda: data.draw(st.floats(0, 1))  # noqa: E731
    model = RiskModel(
        state_elements=(DistanceToObstacle(w()), Visibility(w()), ActionLength(w())),
        path_elements=(Tortuosity(w(), risk_per_turn=0.05), PathLength(w(), risk_per_step=0.05)),
        w_states=data.draw(st.floats(0.1, 1)),
        w_path=data.draw(st.floats(0.1, 1)),
    )
    ev = model.bind(g, grid)
    increments = defaultdict(list)
    for p in all_simple_paths(g, g.v_start, limit=600):
        if len(p) < 2:
            continue
        base = ev.total(p)
        if base <= model.risk_floor:
            continue
        for v, _ in g.adjacency[p[-1]]:
            if v not in p:
                increments[(p[-2], p[-1], v)].append(ev.total(p + (v,)) - base)
    for values in increments.values():
        assert max(values) - min(values) <= 1e-9


def test_bind_precomputes_once():
    grid = empty_grid(3, 3)
    g = grid_to_graph(grid)
    ev = RiskEvaluator(RiskModel(), g, grid)
    assert len(ev.state) == g.n_vertices
