"""Risk-aware, reward-maximizing path planning on occupancy grids."""

from .domain import (
    Connectivity,
    Direction,
    GridError,
    OccupancyGrid,
    Path,
    PathRejected,
    PlanningGraph,
    extend,
    grid_to_graph,
    neighbors,
)
from .planners import (
    EnumerationLimits,
    MinRiskEnsemble,
    Mode,
    PlanResult,
    exact_enumerate,
    max_utility_select,
    plan,
    risk_aware_dijkstra,
)
from .reward import RewardMap, Utility, accumulate_reward, synth_reward_map, unaccumulate_reward, utility
from .risk import RiskBreakdown, RiskModel, path_risk, state_risk, turns

__version__ = "0.1.0"

__all__ = [
    "accumulate_reward",
    "Connectivity",
    "Direction",
    "EnumerationLimits",
    "exact_enumerate",
    "extend",
    "grid_to_graph",
    "GridError",
    "max_utility_select",
    "MinRiskEnsemble",
    "Mode",
    "neighbors",
    "OccupancyGrid",
    "Path",
    "path_risk",
    "PathRejected",
    "plan",
    "PlanningGraph",
    "PlanResult",
    "RewardMap",
    "risk_aware_dijkstra",
    "RiskBreakdown",
    "RiskModel",
    "state_risk",
    "synth_reward_map",
    "turns",
    "unaccumulate_reward",
    "Utility",
    "utility",
]
