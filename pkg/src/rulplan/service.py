"""Post-prognostics decision service: RUL ingestion, asset registry, maintenance plans.

The registry is rebuilt on startup by replaying an append-only JSON-lines
log of RUL updates. Plans are distance-optimal tours annotated with labor
and parts costs; costs are reported, not optimized.

RULs are taken as valid at plan time. Any decay between ingestion and
planning is the caller's concern.
"""

from __future__ import annotations

import json
import secrets
import threading
import uuid
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping

from .evaluation import Route, RouteEvaluation, evaluate_route
from .ga import GaConfig, GaRunResult, GenerationStats, run_ga
from .model import AssetRecord, Point2D, ProblemInstance, ValidationError, Violation, _is_real

__all__ = [
    "RulUpdate",
    "Visit",
    "PlanCosts",
    "PlanReport",
    "DecisionService",
    "EmptyRegistryError",
    "NotFoundError",
    "StorageError",
    "parse_rul_update",
    "parse_timestamp",
    "format_timestamp",
    "annotate_plan_cost",
    "build_plan_report",
    "plan_from_route",
    "recheck_plan",
]

_UPDATE_FIELDS = {"asset_id", "x", "y", "rul", "service_time", "component_cost", "timestamp"}
_PLAN_OPTIONS = {"ga_config", "return_to_center", "seed"}


class EmptyRegistryError(RuntimeError):
    pass


class NotFoundError(KeyError):
    pass


class StorageError(OSError):
    pass


def parse_timestamp(text: str) -> datetime:
    """RFC 3339 string to an aware UTC datetime."""
    if not isinstance(text, str):
        raise ValueError("timestamp must be a string")
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    ts = datetime.fromisoformat(text)
    if ts.tzinfo is None:
        raise ValueError("timestamp needs a UTC offset")
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


@dataclass(frozen=True)
class RulUpdate:
    asset_id: str
    position: Point2D
    rul: float
    timestamp: datetime
    service_time: float = 0.0
    component_cost: float = 0.0

    def to_record(self) -> AssetRecord:
        return AssetRecord(self.asset_id, self.position, self.rul, self.service_time, self.component_cost)

    def to_dict(self) -> dict[str, Any]:
        return {
            "asset_id": self.asset_id,
            "x": self.position.x,
            "y": self.position.y,
            "rul": self.rul,
            "service_time": self.service_time,
            "component_cost": self.component_cost,
            "timestamp": format_timestamp(self.timestamp),
        }


def parse_rul_update(raw: Mapping[str, Any]) -> RulUpdate:
    if not isinstance(raw, Mapping):
        raise ValidationError([Violation("", "update must be a JSON object")])
    errs = [Violation(k, "unknown field") for k in sorted(set(raw) - _UPDATE_FIELDS)]
    aid = raw.get("asset_id")
    if not isinstance(aid, str) or not aid:
        errs.append(Violation("asset_id", "asset_id must be a non-empty string"))
    for key in ("x", "y", "rul"):
        if not _is_real(raw.get(key)):
            errs.append(Violation(key, "must be a finite number"))
    for key in ("service_time", "component_cost"):
        if key in raw and not _is_real(raw[key]):
            errs.append(Violation(key, "must be a finite number"))
    if _is_real(raw.get("rul")) and raw["rul"] <= 0:
        errs.append(Violation("rul", "rul must be > 0"))
    if _is_real(raw.get("service_time", 0)) and raw.get("service_time", 0) < 0:
        errs.append(Violation("service_time", "service_time must be >= 0"))
    if _is_real(raw.get("component_cost", 0)) and raw.get("component_cost", 0) < 0:
        errs.append(Violation("component_cost", "component_cost must be >= 0"))
    ts = None
    try:
        ts = parse_timestamp(raw.get("timestamp"))
    except (TypeError, ValueError) as exc:
        errs.append(Violation("timestamp", f"bad RFC 3339 timestamp: {exc}"))
    if errs:
        raise ValidationError(errs)
    return RulUpdate(
        asset_id=aid,
        position=Point2D(float(raw["x"]), float(raw["y"])),
        rul=float(raw["rul"]),
        timestamp=ts,
        service_time=float(raw.get("service_time", 0.0)),
        component_cost=float(raw.get("component_cost", 0.0)),
    )


@dataclass(frozen=True)
class Visit:
    asset_id: str
    arrival_time: float
    deadline: float
    slack: float


@dataclass(frozen=True)
class PlanCosts:
    travel_time: float
    labor_cost: float
    parts_cost: float
    total_cost: float


@dataclass(frozen=True)
class PlanReport:
    plan_id: str
    created_at: str | None
    visits: tuple[Visit, ...]
    total_distance: float
    feasible: bool
    travel_time: float
    labor_cost: float
    parts_cost: float
    total_cost: float
    return_to_center: bool
    ga_summary: dict

    @property
    def asset_ids(self) -> list[str]:
        return [v.asset_id for v in self.visits]

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["visits"] = [asdict(v) for v in self.visits]
        return out

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "PlanReport":
        data = dict(raw)
        data["visits"] = tuple(Visit(**v) for v in raw["visits"])
        return cls(**data)


def annotate_plan_cost(evaluation: RouteEvaluation, instance: ProblemInstance) -> PlanCosts:
    travel_time = evaluation.total_distance / instance.travel_speed
    service = sum(a.service_time for a in instance.assets)
    labor = instance.hourly_wage * (travel_time + service)
    parts = sum(a.component_cost for a in instance.assets)
    return PlanCosts(travel_time, labor, parts, labor + parts)


def plan_from_route(
    instance: ProblemInstance,
    route: Route,
    evaluation: RouteEvaluation,
    plan_id: str,
    created_at: str | None,
    summary: dict,
) -> PlanReport:
    visits = tuple(
        Visit(instance.assets[i].id, t, instance.assets[i].rul, instance.assets[i].rul - t)
        for i, t in zip(route, evaluation.arrival_times)
    )
    costs = annotate_plan_cost(evaluation, instance)
    return PlanReport(
        plan_id=plan_id,
        created_at=created_at,
        visits=visits,
        total_distance=evaluation.total_distance,
        feasible=evaluation.feasible,
        travel_time=costs.travel_time,
        labor_cost=costs.labor_cost,
        parts_cost=costs.parts_cost,
        total_cost=costs.total_cost,
        return_to_center=instance.return_to_center,
        ga_summary=summary,
    )


def build_plan_report(
    instance: ProblemInstance,
    result: GaRunResult,
    plan_id: str,
    created_at: str | None,
) -> PlanReport:
    final: GenerationStats = result.history[-1]
    summary = {"seed": result.seed, "final_generation": asdict(final)}
    return plan_from_route(instance, result.best_route, result.best_evaluation, plan_id, created_at, summary)


class DecisionService:
    """Asset registry plus plan store.

    Writes are serialized under one lock. Planning copies the registry under
    the lock and runs the GA outside it, so ingestion never waits on a GA.
    """

    def __init__(
        self,
        log_path: str | Path | None = None,
        plan_log_path: str | Path | None = None,
        *,
        center: Point2D = Point2D(0.0, 0.0),
        travel_speed: float = 1.0,
        hourly_wage: float = 0.0,
        ga_config: GaConfig | None = None,
    ):
        self.log_path = Path(log_path) if log_path else None
        self.plan_log_path = Path(plan_log_path) if plan_log_path else None
        self.center = center
        self.travel_speed = travel_speed
        self.hourly_wage = hourly_wage
        self.ga_config = ga_config or GaConfig()
        self._lock = threading.Lock()
        self._assets: dict[str, RulUpdate] = {}
        self._plans: dict[str, PlanReport] = {}
        self.version = 0
        self._replay()

    def _replay(self) -> None:
        if self.log_path and self.log_path.exists():
            with open(self.log_path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._apply(parse_rul_update(json.loads(line)))
        if self.plan_log_path and self.plan_log_path.exists():
            with open(self.plan_log_path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        plan = PlanReport.from_dict(json.loads(line))
                        self._plans[plan.plan_id] = plan

    def _apply(self, update: RulUpdate) -> None:
        current = self._assets.get(update.asset_id)
        if current is None or update.timestamp >= current.timestamp:
            self._assets[update.asset_id] = update
        self.version += 1

    @staticmethod
    def _append(path: Path, payload: dict) -> None:
        try:
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(payload, sort_keys=True) + "\n")
        except OSError as exc:
            raise StorageError(f"cannot append to {path}: {exc}") from exc

    def ingest_rul_update(self, update: RulUpdate | Mapping[str, Any]) -> int:
        """Upsert one asset; the newest timestamp wins, equal timestamps go to the later write."""
        if not isinstance(update, RulUpdate):
            update = parse_rul_update(update)
        with self._lock:
            if self.log_path:
                self._append(self.log_path, update.to_dict())
            self._apply(update)
            return self.version

    def list_assets(self) -> list[AssetRecord]:
        with self._lock:
            updates = sorted(self._assets.values(), key=lambda u: u.asset_id)
        return [u.to_record() for u in updates]

    def snapshot(self, return_to_center: bool = False) -> ProblemInstance:
        assets = self.list_assets()
        if not assets:
            raise EmptyRegistryError("no assets registered")
        return ProblemInstance(
            self.center, tuple(assets), self.travel_speed, return_to_center, self.hourly_wage
        )

    def request_plan(self, options: Mapping[str, Any] | None = None) -> PlanReport:
        if options is None:
            options = {}
        if not isinstance(options, Mapping):
            raise ValidationError([Violation("", "plan options must be a JSON object")])
        options = dict(options)
        unknown = set(options) - _PLAN_OPTIONS
        if unknown:
            raise ValidationError([Violation(k, "unknown plan option") for k in sorted(unknown)])
        closed = options.get("return_to_center", False)
        if not isinstance(closed, bool):
            raise ValidationError([Violation("return_to_center", "must be a boolean")])
        seed = options.get("seed")
        if seed is None:
            seed = secrets.randbits(63)
        elif not isinstance(seed, int) or isinstance(seed, bool):
            raise ValidationError([Violation("seed", "seed must be an integer")])
        overrides = dict(options.get("ga_config") or {})
        overrides["seed"] = seed
        config = self.ga_config.with_overrides(**overrides)

        instance = self.snapshot(closed)
        result = run_ga(instance, config)
        plan = build_plan_report(
            instance, result, uuid.uuid4().hex, format_timestamp(datetime.now(timezone.utc))
        )
        with self._lock:
            if self.plan_log_path:
                self._append(self.plan_log_path, plan.to_dict())
            self._plans[plan.plan_id] = plan
        return plan

    def get_plan(self, plan_id: str) -> PlanReport:
        with self._lock:
            try:
                return self._plans[plan_id]
            except KeyError:
                raise NotFoundError(plan_id) from None


def plan_route(plan: PlanReport, instance: ProblemInstance) -> Route:
    index = instance.index_of
    return tuple(index[aid] for aid in plan.asset_ids)


def recheck_plan(plan: PlanReport, instance: ProblemInstance) -> RouteEvaluation:
    """Re-evaluate a plan's visiting order against an instance."""
    return evaluate_route(instance, plan_route(plan, instance))
