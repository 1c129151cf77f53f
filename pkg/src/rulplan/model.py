"""Problem model: assets with RUL deadlines, a maintenance center, a travel model.

Units are kilometers, hours and km/h throughout. With the default speed of
1 km/h a distance and its travel time are numerically equal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np

__all__ = [
    "Point2D",
    "AssetRecord",
    "ProblemInstance",
    "Violation",
    "ValidationError",
    "distance",
    "validate_instance",
    "generate_instance",
    "instance_to_dict",
    "load_instance",
    "dump_instance",
]

_TOP_FIELDS = {"center", "travel_speed", "return_to_center", "hourly_wage", "assets"}
_ASSET_FIELDS = {"id", "x", "y", "rul", "service_time", "component_cost"}


@dataclass(frozen=True)
class Violation:
    path: str
    reason: str

    def __str__(self) -> str:
        return f"{self.path}: {self.reason}"


class ValidationError(ValueError):
    """Raised with every violated invariant, not just the first one."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    def to_dict(self) -> list[dict[str, str]]:
        return [{"path": v.path, "reason": v.reason} for v in self.violations]


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError([Violation("point", "coordinates must be finite")])


@dataclass(frozen=True)
class AssetRecord:
    id: str
    position: Point2D
    rul: float
    service_time: float = 0.0
    component_cost: float = 0.0

    def __post_init__(self):
        errs = _asset_violations(self, "asset")
        if errs:
            raise ValidationError(errs)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "x": self.position.x,
            "y": self.position.y,
            "rul": self.rul,
            "service_time": self.service_time,
            "component_cost": self.component_cost,
        }


@dataclass(frozen=True)
class ProblemInstance:
    center: Point2D
    assets: tuple[AssetRecord, ...]
    travel_speed: float = 1.0
    return_to_center: bool = False
    hourly_wage: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "assets", tuple(self.assets))
        errs = _instance_violations(self)
        if errs:
            raise ValidationError(errs)

    @property
    def n(self) -> int:
        return len(self.assets)

    @cached_property
    def center_distances(self) -> tuple[float, ...]:
        return tuple(distance(self.center, a.position) for a in self.assets)

    @cached_property
    def distance_matrix(self) -> tuple[tuple[float, ...], ...]:
        pts = [a.position for a in self.assets]
        return tuple(tuple(distance(p, q) for q in pts) for p in pts)

    @cached_property
    def index_of(self) -> dict[str, int]:
        return {a.id: i for i, a in enumerate(self.assets)}


def distance(a: Point2D, b: Point2D) -> float:
    """Euclidean distance in the plane."""
    return math.hypot(b.x - a.x, b.y - a.y)


def _is_real(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _asset_violations(asset: AssetRecord, path: str) -> list[Violation]:
    errs = []
    if not isinstance(asset.id, str) or not asset.id:
        errs.append(Violation(f"{path}.id", "id must be a non-empty string"))
    if not _is_real(asset.rul) or asset.rul <= 0:
        errs.append(Violation(f"{path}.rul", "rul must be > 0"))
    if not _is_real(asset.service_time) or asset.service_time < 0:
        errs.append(Violation(f"{path}.service_time", "service_time must be >= 0"))
    if not _is_real(asset.component_cost) or asset.component_cost < 0:
        errs.append(Violation(f"{path}.component_cost", "component_cost must be >= 0"))
    return errs


def _instance_violations(inst: ProblemInstance) -> list[Violation]:
    errs = []
    if not _is_real(inst.travel_speed) or inst.travel_speed <= 0:
        errs.append(Violation("travel_speed", "travel_speed must be > 0"))
    if not _is_real(inst.hourly_wage) or inst.hourly_wage < 0:
        errs.append(Violation("hourly_wage", "hourly_wage must be >= 0"))
    if not isinstance(inst.return_to_center, bool):
        errs.append(Violation("return_to_center", "return_to_center must be a boolean"))
    if not inst.assets:
        errs.append(Violation("assets", "at least one asset is required"))
    seen: set[str] = set()
    for i, a in enumerate(inst.assets):
        if a.id in seen:
            errs.append(Violation(f"assets[{i}].id", f"duplicate id {a.id!r}"))
        seen.add(a.id)
    return errs


def _check_fields(raw: Mapping, allowed: set[str], path: str, errs: list[Violation]) -> None:
    for key in sorted(set(raw) - allowed):
        errs.append(Violation(f"{path}{key}", "unknown field"))


def _number(raw: Mapping, key: str, path: str, errs: list[Violation], default=None):
    if key not in raw:
        if default is None:
            errs.append(Violation(f"{path}{key}", "missing required field"))
        return default
    value = raw[key]
    if not _is_real(value):
        errs.append(Violation(f"{path}{key}", "must be a finite number"))
        return None
    return float(value)


def validate_instance(raw: Mapping[str, Any]) -> ProblemInstance:
    """Build a `ProblemInstance` from decoded JSON, reporting every violation at once."""
    errs: list[Violation] = []
    if not isinstance(raw, Mapping):
        raise ValidationError([Violation("", "instance must be a JSON object")])
    _check_fields(raw, _TOP_FIELDS, "", errs)

    center = None
    craw = raw.get("center")
    if not isinstance(craw, Mapping):
        errs.append(Violation("center", "center must be an object with x and y"))
    else:
        _check_fields(craw, {"x", "y"}, "center.", errs)
        cx = _number(craw, "x", "center.", errs)
        cy = _number(craw, "y", "center.", errs)
        if cx is not None and cy is not None:
            center = Point2D(cx, cy)

    speed = _number(raw, "travel_speed", "", errs, default=1.0)
    if speed is not None and speed <= 0:
        errs.append(Violation("travel_speed", "travel_speed must be > 0"))
    wage = _number(raw, "hourly_wage", "", errs, default=0.0)
    if wage is not None and wage < 0:
        errs.append(Violation("hourly_wage", "hourly_wage must be >= 0"))
    closed = raw.get("return_to_center", False)
    if not isinstance(closed, bool):
        errs.append(Violation("return_to_center", "return_to_center must be a boolean"))

    assets: list[AssetRecord] = []
    araw = raw.get("assets")
    if not isinstance(araw, list):
        errs.append(Violation("assets", "assets must be a list"))
        araw = []
    elif not araw:
        errs.append(Violation("assets", "at least one asset is required"))
    seen: set[str] = set()
    for i, item in enumerate(araw):
        path = f"assets[{i}]."
        if not isinstance(item, Mapping):
            errs.append(Violation(f"assets[{i}]", "asset must be an object"))
            continue
        n_before = len(errs)
        _check_fields(item, _ASSET_FIELDS, path, errs)
        aid = item.get("id")
        if not isinstance(aid, str) or not aid:
            errs.append(Violation(path + "id", "id must be a non-empty string"))
        elif aid in seen:
            errs.append(Violation(path + "id", f"duplicate id {aid!r}"))
        else:
            seen.add(aid)
        x = _number(item, "x", path, errs)
        y = _number(item, "y", path, errs)
        rul = _number(item, "rul", path, errs)
        if rul is not None and rul <= 0:
            errs.append(Violation(path + "rul", "rul must be > 0"))
        service = _number(item, "service_time", path, errs, default=0.0)
        if service is not None and service < 0:
            errs.append(Violation(path + "service_time", "service_time must be >= 0"))
        cost = _number(item, "component_cost", path, errs, default=0.0)
        if cost is not None and cost < 0:
            errs.append(Violation(path + "component_cost", "component_cost must be >= 0"))
        if len(errs) == n_before:
            assets.append(AssetRecord(aid, Point2D(x, y), rul, service, cost))

    if errs:
        raise ValidationError(errs)
    return ProblemInstance(center, tuple(assets), speed, closed, wage)


def instance_to_dict(inst: ProblemInstance) -> dict[str, Any]:
    return {
        "center": {"x": inst.center.x, "y": inst.center.y},
        "travel_speed": inst.travel_speed,
        "return_to_center": inst.return_to_center,
        "hourly_wage": inst.hourly_wage,
        "assets": [a.to_dict() for a in inst.assets],
    }


def dump_instance(inst: ProblemInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2)
        fh.write("\n")


def load_instance(path) -> ProblemInstance:
    with open(path, encoding="utf-8") as fh:
        return validate_instance(json.load(fh))


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator; seeds are reduced modulo 2**64 so negative values are accepted."""
    return np.random.Generator(np.random.PCG64(int(seed) & 0xFFFF_FFFF_FFFF_FFFF))


def generate_instance(
    n: int,
    area: tuple[float, float, float, float] = (0.0, 0.0, 100.0, 100.0),
    rul_range: tuple[float, float] = (50.0, 500.0),
    seed: int = 0,
    *,
    travel_speed: float = 1.0,
    return_to_center: bool = False,
    hourly_wage: float = 0.0,
) -> ProblemInstance:
    """Random instance with positions uniform in ``area = (x0, y0, x1, y1)``.

    The center sits at the middle of the box and ids run ``A0 .. A{n-1}``.
    Draw order is all x, then all y, then all RULs, so a fixed seed yields
    the same instance on every platform numpy supports.
    """
    x0, y0, x1, y1 = area
    lo, hi = rul_range
    errs = []
    if n < 1:
        errs.append(Violation("n", "n must be >= 1"))
    if not (x0 <= x1 and y0 <= y1):
        errs.append(Violation("area", "area must satisfy x0 <= x1 and y0 <= y1"))
    if not (0 < lo <= hi):
        errs.append(Violation("rul_range", "rul_range must satisfy 0 < low <= high"))
    if errs:
        raise ValidationError(errs)

    rng = make_rng(seed)
    xs = rng.uniform(x0, x1, size=n)
    ys = rng.uniform(y0, y1, size=n)
    ruls = rng.uniform(lo, hi, size=n)
    assets = tuple(
        AssetRecord(f"A{i}", Point2D(float(xs[i]), float(ys[i])), float(ruls[i])) for i in range(n)
    )
    center = Point2D((x0 + x1) / 2, (y0 + y1) / 2)
    return ProblemInstance(center, assets, travel_speed, return_to_center, hourly_wage)
