"""Exact solvers for small instances, used to check the GA.

Both solvers minimize total distance over deadline-feasible visiting orders.
Distances are accumulated leg by leg in visiting order, exactly as
`evaluate_route` does, so an optimum found here re-evaluates to the same
floating point value.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .evaluation import Route, RouteEvaluation, evaluate_route
from .model import ProblemInstance

__all__ = ["OracleStatus", "OracleResult", "solve_exhaustive", "solve_held_karp"]


class OracleStatus(str, Enum):
    OPTIMAL = "optimal-feasible"
    INFEASIBLE = "no-feasible-route"
    TOO_LARGE = "instance-too-large"


@dataclass(frozen=True)
class OracleResult:
    status: OracleStatus
    best_route: Route | None = None
    best_evaluation: RouteEvaluation | None = None

    @property
    def distance(self) -> float | None:
        return None if self.best_evaluation is None else self.best_evaluation.total_distance

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "best_route": None if self.best_route is None else list(self.best_route),
            "best_evaluation": None if self.best_evaluation is None else self.best_evaluation.to_dict(),
        }


def _finish(instance: ProblemInstance, route) -> OracleResult:
    if route is None:
        return OracleResult(OracleStatus.INFEASIBLE)
    route = tuple(int(i) for i in route)
    return OracleResult(OracleStatus.OPTIMAL, route, evaluate_route(instance, route))


def solve_exhaustive(instance: ProblemInstance, max_n: int = 10) -> OracleResult:
    """Enumerate every visiting order depth-first in lexicographic order.

    A prefix that already misses a deadline is cut, since lateness never
    recovers. Among equal distances the lexicographically smallest order is
    kept because the enumeration meets it first and only strict improvements
    replace the incumbent.
    """
    n = instance.n
    if n > max_n:
        return OracleResult(OracleStatus.TOO_LARGE)
    d0 = instance.center_distances
    dmat = instance.distance_matrix
    rul = [a.rul for a in instance.assets]
    svc = [a.service_time for a in instance.assets]
    speed = instance.travel_speed
    closed = instance.return_to_center

    best = [float("inf"), None]
    path: list[int] = []
    used = [False] * n

    def dfs(last: int, dist: float, service: float) -> None:
        if len(path) == n:
            total = dist + d0[last] if closed else dist
            if total < best[0]:
                best[0], best[1] = total, tuple(path)
            return
        for nxt in range(n):
            if used[nxt]:
                continue
            nd = dist + (d0[nxt] if last < 0 else dmat[last][nxt])
            if nd / speed + service > rul[nxt]:
                continue
            used[nxt] = True
            path.append(nxt)
            dfs(nxt, nd, service + svc[nxt])
            path.pop()
            used[nxt] = False

    dfs(-1, 0.0, 0.0)
    return _finish(instance, best[1])


def solve_held_karp(instance: ProblemInstance, max_n: int = 18) -> OracleResult:
    """Bitmask dynamic program over (visited set, last asset), pruned by deadlines.

    Pruning is exact: for a fixed visited set the service time already spent
    is the same whatever the order, and the speed is constant, so arrival at
    ``last`` is a strictly increasing affine function of the path distance.
    The shortest path into a state therefore also arrives earliest, and any
    completion feasible after a longer path is feasible after the shortest
    one. Keeping only the minimum per state loses nothing.

    Ties between predecessors go to the lowest asset index.
    """
    n = instance.n
    if n > max_n:
        return OracleResult(OracleStatus.TOO_LARGE)
    d0 = np.array(instance.center_distances)
    dmat = np.array(instance.distance_matrix)
    rul = np.array([a.rul for a in instance.assets])
    svc = [a.service_time for a in instance.assets]
    speed = instance.travel_speed

    size = 1 << n
    dp = np.full((size, n), np.inf)
    parent = np.full((size, n), -1, dtype=np.int64)
    # service time spent before arriving at `last` = total over mask minus last
    svc_mask = np.zeros(size)
    for mask in range(1, size):
        low = (mask & -mask).bit_length() - 1
        svc_mask[mask] = svc_mask[mask & (mask - 1)] + svc[low]

    for j in range(n):
        if d0[j] / speed <= rul[j]:
            dp[1 << j, j] = d0[j]

    for mask in range(1, size):
        if mask & (mask - 1) == 0:
            continue
        lasts = np.array([j for j in range(n) if mask >> j & 1])
        prev_masks = mask ^ (1 << lasts)
        cand = dp[prev_masks] + dmat[:, lasts].T  # rows: last, cols: predecessor
        pred = np.argmin(cand, axis=1)
        dist = cand[np.arange(len(lasts)), pred]
        arrival = dist / speed + (svc_mask[mask] - np.array([svc[j] for j in lasts]))
        ok = np.isfinite(dist) & (arrival <= rul[lasts])
        dp[mask, lasts[ok]] = dist[ok]
        parent[mask, lasts[ok]] = pred[ok]

    full = size - 1
    totals = dp[full] + d0 if instance.return_to_center else dp[full].copy()
    if not np.isfinite(totals).any():
        return _finish(instance, None)
    last = int(np.argmin(totals))
    route = []
    mask = full
    while last >= 0:
        route.append(last)
        prev = int(parent[mask, last])
        mask ^= 1 << last
        last = prev
    return _finish(instance, route[::-1])
