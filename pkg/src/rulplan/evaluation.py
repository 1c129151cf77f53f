"""Route evaluation: arrival times, deadline checks and the penalized fitness."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .model import ProblemInstance

__all__ = [
    "Route",
    "RouteEvaluation",
    "PermutationError",
    "UnknownIdError",
    "DEFAULT_PENALTY",
    "check_permutation",
    "is_permutation",
    "evaluate_route",
    "route_from_ids",
]

Route = tuple[int, ...]

# Large relative to desk-scale tours (<= ~1e3 km) so any lateness dominates.
DEFAULT_PENALTY = 1e4


class PermutationError(ValueError):
    pass


class UnknownIdError(KeyError):
    pass


@dataclass(frozen=True)
class RouteEvaluation:
    total_distance: float
    arrival_times: tuple[float, ...]
    violations: tuple[tuple[str, float], ...]
    feasible: bool
    fitness: float

    @property
    def total_lateness(self) -> float:
        return sum(late for _, late in self.violations)

    def to_dict(self) -> dict:
        return {
            "total_distance": self.total_distance,
            "arrival_times": list(self.arrival_times),
            "violations": [{"asset_id": a, "lateness": late} for a, late in self.violations],
            "feasible": self.feasible,
            "fitness": self.fitness,
        }


def is_permutation(order: Sequence[int], n: int) -> bool:
    return len(order) == n and sorted(order) == list(range(n))


def check_permutation(order: Sequence[int], n: int) -> Route:
    route = tuple(int(i) for i in order)
    if not is_permutation(route, n):
        raise PermutationError(f"route {list(route)} is not a permutation of 0..{n - 1}")
    return route


def evaluate_route(
    instance: ProblemInstance, route: Sequence[int], penalty_coefficient: float = DEFAULT_PENALTY
) -> RouteEvaluation:
    """Walk the route from the center and score it.

    Arrival at the k-th visit is the leg distance accumulated so far divided
    by the travel speed, plus the service time of visits 1..k-1. The deadline
    is checked on arrival (``arrival <= rul`` counts as on time); the asset's
    own service happens afterwards.
    """
    route = check_permutation(route, instance.n)
    return _evaluate(instance, route, penalty_coefficient)


def _evaluate(instance: ProblemInstance, route: Route, penalty: float) -> RouteEvaluation:
    # Unchecked fast path for the GA, which only produces permutations.
    assets = instance.assets
    dmat = instance.distance_matrix
    speed = instance.travel_speed
    dist = 0.0
    service = 0.0
    prev = -1
    arrivals = []
    violations = []
    for idx in route:
        dist += instance.center_distances[idx] if prev < 0 else dmat[prev][idx]
        arrival = dist / speed + service
        arrivals.append(arrival)
        asset = assets[idx]
        if arrival > asset.rul:
            violations.append((asset.id, arrival - asset.rul))
        service += asset.service_time
        prev = idx
    if instance.return_to_center and prev >= 0:
        dist += instance.center_distances[prev]
    lateness = sum(late for _, late in violations)
    return RouteEvaluation(
        total_distance=dist,
        arrival_times=tuple(arrivals),
        violations=tuple(violations),
        feasible=not violations,
        fitness=dist + penalty * lateness,
    )


def route_from_ids(instance: ProblemInstance, ids: Sequence[str]) -> Route:
    index = instance.index_of
    order = []
    for aid in ids:
        if aid not in index:
            raise UnknownIdError(aid)
        order.append(index[aid])
    return check_permutation(order, instance.n)
