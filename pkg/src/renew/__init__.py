"""Risk- and energy-aware global path planning for surface vehicles in current fields."""

from .baseline import GridAStarPlanner, astar, rasterize, shortcut_smooth
from .contingency import simulate_contingency
from .dynamics import best_effort_distance_samples, hard_over_clearance, integrate
from .env import (CurrentField, Environment, VehicleModel, load_environment, local_current_stats,
                  make_environment, sample_current, save_environment)
from .exceptions import AssumptionViolated, InfeasiblePlan, InvalidEnvironment, InvalidQuery, RenewError
from .homotopy import channel_contains, enumerate_channels, path_signature
from .mesh import build_dual, build_navmesh, locate_triangle
from .padding import apply_padding, compute_adaptive_padding, fixed_padding
from .planner import (PlanConfig, RenewPlanner, check_turn_feasibility, fuel_cost, plan, sample_paths,
                      select_homotopy, select_path)
from .scenarios import generate

__version__ = "0.1.0"

__all__ = [
    "AssumptionViolated", "CurrentField", "Environment", "GridAStarPlanner", "InfeasiblePlan",
    "InvalidEnvironment", "InvalidQuery", "PlanConfig", "RenewError", "RenewPlanner", "VehicleModel",
    "apply_padding", "astar", "best_effort_distance_samples", "build_dual", "build_navmesh",
    "channel_contains", "check_turn_feasibility", "compute_adaptive_padding", "enumerate_channels",
    "fixed_padding", "fuel_cost", "generate", "hard_over_clearance", "integrate", "load_environment",
    "local_current_stats", "locate_triangle", "make_environment", "path_signature", "plan", "rasterize",
    "sample_current", "sample_paths", "save_environment", "select_homotopy", "select_path",
    "shortcut_smooth", "simulate_contingency",
]
