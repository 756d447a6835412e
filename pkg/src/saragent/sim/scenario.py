"""Scenario documents: schema, validation and JSON loading."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..geometry import Box, Pose3, Vec3

DEFAULT_TICK_DT = 0.1

CATEGORIES = ("person", "vehicle", "landmark")
BEHAVIOR_KINDS = ("stationary", "waypoint_walk", "collapse_at_tick")


class ScenarioError(ValueError):
    """Scenario document failed to parse or violated an invariant."""

    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")


@dataclass(frozen=True)
class Behavior:
    kind: str = "stationary"
    waypoints: tuple[Vec3, ...] = ()
    speed: float = 1.0
    collapse_tick: int | None = None
    loop: bool = False

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind}
        if self.kind == "waypoint_walk":
            d["waypoints"] = [list(w) for w in self.waypoints]
            d["speed"] = self.speed
            d["loop"] = self.loop
        if self.kind == "collapse_at_tick":
            d["tick"] = self.collapse_tick
            if self.waypoints:
                d["waypoints"] = [list(w) for w in self.waypoints]
                d["speed"] = self.speed
        return d


@dataclass(frozen=True)
class EntitySpec:
    id: str
    category: str
    pose: Pose3
    velocity: Vec3 = (0.0, 0.0, 0.0)
    behavior: Behavior = field(default_factory=Behavior)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "category": self.category,
            "pose": self.pose.to_dict(),
            "velocity": list(self.velocity),
            "behavior": self.behavior.to_dict(),
        }


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    duration_ticks: int
    tick_dt: float
    entities: tuple[EntitySpec, ...]
    ego_start: Pose3
    geofence: Box
    rng_seed: int

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "duration_ticks": self.duration_ticks,
            "tick_dt": self.tick_dt,
            "ego_start": self.ego_start.to_dict(),
            "geofence": self.geofence.to_dict(),
            "rng_seed": self.rng_seed,
            "entities": [e.to_dict() for e in self.entities],
        }


def _req(doc: dict, key: str, path: str) -> Any:
    if key not in doc:
        raise ScenarioError(f"{path}.{key}" if path else key, "missing required field")
    return doc[key]


def _parse_behavior(doc: Any, path: str) -> Behavior:
    if doc is None:
        return Behavior()
    if not isinstance(doc, dict):
        raise ScenarioError(path, "behavior must be an object")
    kind = doc.get("kind", "stationary")
    if kind not in BEHAVIOR_KINDS:
        raise ScenarioError(f"{path}.kind", f"unknown behavior kind {kind!r}")
    waypoints = tuple(
        tuple(map(float, w)) for w in doc.get("waypoints", [])
    )
    speed = float(doc.get("speed", 1.0))
    loop = bool(doc.get("loop", False))
    if kind == "waypoint_walk":
        if not waypoints:
            raise ScenarioError(f"{path}.waypoints", "waypoint_walk needs waypoints")
        if speed <= 0:
            raise ScenarioError(f"{path}.speed", "speed must be positive")
        return Behavior(kind, waypoints, speed, None, loop)
    if kind == "collapse_at_tick":
        tick = doc.get("tick")
        if tick is None or int(tick) < 0:
            raise ScenarioError(f"{path}.tick", "collapse_at_tick needs a tick >= 0")
        return Behavior(kind, waypoints, speed, int(tick), loop)
    return Behavior()


def _parse_entity(doc: Any, path: str) -> EntitySpec:
    if not isinstance(doc, dict):
        raise ScenarioError(path, "entity must be an object")
    eid = str(_req(doc, "id", path))
    category = _req(doc, "category", path)
    if category not in CATEGORIES:
        raise ScenarioError(f"{path}.category", f"unknown category {category!r}")
    try:
        pose = Pose3.from_dict(_req(doc, "pose", path))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"{path}.pose", f"malformed pose: {exc}") from exc
    velocity = tuple(map(float, doc.get("velocity", (0.0, 0.0, 0.0))))
    behavior = _parse_behavior(doc.get("behavior"), f"{path}.behavior")
    if behavior.collapse_tick is not None and category != "person":
        raise ScenarioError(
            f"{path}.behavior", "collapse_at_tick is only valid for category=person"
        )
    return EntitySpec(eid, category, pose, velocity, behavior)


def scenario_from_dict(doc: dict) -> ScenarioSpec:
    name = str(doc.get("name", "unnamed"))
    duration = _req(doc, "duration_ticks", "")
    if not isinstance(duration, int) or duration <= 0:
        raise ScenarioError("duration_ticks", "must be an integer > 0")
    tick_dt = float(doc.get("tick_dt", DEFAULT_TICK_DT))
    if tick_dt <= 0:
        raise ScenarioError("tick_dt", "must be > 0")
    try:
        ego_start = Pose3.from_dict(_req(doc, "ego_start", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError("ego_start", f"malformed pose: {exc}") from exc
    try:
        geofence = Box.from_dict(_req(doc, "geofence", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError("geofence", str(exc)) from exc
    if not geofence.contains(ego_start.position):
        raise ScenarioError("ego_start", "must lie inside the geofence")
    rng_seed = int(doc.get("rng_seed", 0))
    entities = []
    seen: set[str] = set()
    for i, ent_doc in enumerate(doc.get("entities", [])):
        ent = _parse_entity(ent_doc, f"entities[{i}]")
        if ent.id in seen:
            raise ScenarioError(f"entities[{i}].id", f"duplicate entity id {ent.id!r}")
        seen.add(ent.id)
        entities.append(ent)
    return ScenarioSpec(
        name=name,
        duration_ticks=duration,
        tick_dt=tick_dt,
        entities=tuple(entities),
        ego_start=ego_start,
        geofence=geofence,
        rng_seed=rng_seed,
    )


def load_scenario(source: str | Path | dict) -> ScenarioSpec:
    """Parse and validate a scenario document (path, JSON text or dict)."""
    if isinstance(source, dict):
        return scenario_from_dict(source)
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and source.endswith(".json")):
        path = Path(source)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ScenarioError(str(path), f"cannot read scenario: {exc}") from exc
    else:
        text = str(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}", f"invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("", "scenario document must be a JSON object")
    return scenario_from_dict(doc)
