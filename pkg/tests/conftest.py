import numpy as np
import pytest
from hypothesis import strategies as st

from riskplan.domain import OccupancyGrid, grid_to_graph
from riskplan.formats import parse_map
from riskplan.risk import CellTable, RiskModel, Tortuosity

# Two routes from S to the top-right cell.  Route A (lower) is 11 cells with six turns, route B
# (top row) is straight.  No other edges connect the two.
TWO_ROUTE_MAP = """\
S....
.###.
..#..
#...#
"""
ROUTE_A = [(0, 0), (1, 0), (2, 0), (2, 1), (3, 1), (3, 2), (3, 3), (2, 3), (2, 4), (1, 4), (0, 4)]
ROUTE_B = [(0, 0), (0, 1), (0, 2), (0, 3), (0, 4)]
ROUTE_B_STATE_RISK = 0.5


def two_route_model(tortuosity_weight: float) -> RiskModel:
    table = {c: 0.1 for c in ROUTE_A}
    table.update({c: ROUTE_B_STATE_RISK for c in ROUTE_B[1:-1]})
    return RiskModel(
        state_elements=(CellTable(1.0, table),),
        path_elements=(Tortuosity(tortuosity_weight, risk_per_turn=0.1),),
    )


@pytest.fixture
def two_route():
    grid = parse_map(TWO_ROUTE_MAP)
    graph = grid_to_graph(grid)
    return grid, graph


def empty_grid(*dims, start=None):
    start = start or (0,) * len(dims)
    return OccupancyGrid(np.zeros(dims, dtype=bool), start)


@st.composite
def grids(draw, max_side=4, min_side=1, ndim=2):
    dims = tuple(draw(st.integers(min_side, max_side)) for _ in range(ndim))
    n = int(np.prod(dims))
    occ = np.array(draw(st.lists(st.booleans(), min_size=n, max_size=n)), dtype=bool).reshape(dims)
    free = np.argwhere(~occ)
    if len(free) == 0:
        occ.flat[0] = False
        free = np.argwhere(~occ)
    start = tuple(int(i) for i in free[draw(st.integers(0, len(free) - 1))])
    return OccupancyGrid(occ, start)


connectivities = st.sampled_from(["orthogonal", "full"])


def pytest_terminal_summary(terminalreporter):
    try:
        from .test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
