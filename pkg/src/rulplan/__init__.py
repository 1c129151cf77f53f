"""Maintenance tour planning from remaining-useful-life (RUL) predictions.

Given assets with positions and RUL deadlines, find the shortest tour from a
maintenance center that reaches every asset before it fails. A permutation
GA does the search; exhaustive and Held-Karp solvers give exact answers on
small instances.
"""

from .evaluation import Route, RouteEvaluation, evaluate_route, route_from_ids
from .ga import GaConfig, GaRunResult, GenerationStats, run_ga
from .model import AssetRecord, Point2D, ProblemInstance, ValidationError, generate_instance, validate_instance
from .oracle import OracleResult, OracleStatus, solve_exhaustive, solve_held_karp
from .service import DecisionService, PlanReport

__version__ = "0.1.0"
