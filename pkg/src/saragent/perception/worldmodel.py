"""The queryable world snapshot handed to the reasoning layer.

Wire format (exact key set):
  timestamp, ego_pose, objects[{id, class, pred..}], relations, health.
The internal objects additionally carry tracker bookkeeping (stationarity
streak, ground-truth link) that never reaches the wire and is excluded from
equality so codec round-trips compare clean.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

from ..geometry import Pose3
from .kalman import Track

NEAR_THRESHOLD = 5.0
ISOLATION_RADIUS = 8.0
STALE_TICKS = 30


class WorldModelError(ValueError):
    pass


@dataclass(frozen=True)
class Relation:
    subj: str
    pred: str
    obj: str

    def to_wire(self) -> dict:
        return {"subj": self.subj, "pred": self.pred, "obj": self.obj}


@dataclass(frozen=True)
class WorldObject:
    id: str
    category: str
    pose: tuple[float, float, float]
    vel: tuple[float, float, float]
    conf: float
    cov: tuple[tuple[float, ...], ...]
    frames_stationary: int = field(default=0, compare=False)
    frames_seen: int = field(default=0, compare=False)
    source_entity: str | None = field(default=None, compare=False)

    def to_wire(self) -> dict:
        return {
            "id": self.id,
            "class": self.category,
            "pose": list(self.pose),
            "vel": list(self.vel),
            "conf": self.conf,
            "cov": [list(row) for row in self.cov],
        }


@dataclass(frozen=True)
class EgoPose:
    x: float
    y: float
    z: float
    yaw: float
    cov: tuple[tuple[float, ...], ...]

    def to_wire(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "z": self.z,
            "yaw": self.yaw,
            "cov": [list(row) for row in self.cov],
        }


@dataclass(frozen=True)
class WorldModel:
    timestamp: float
    ego_pose: EgoPose
    objects: tuple[WorldObject, ...]
    relations: tuple[Relation, ...]
    health: dict

    def object_by_id(self, object_id: str) -> WorldObject | None:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        return None

    def person_objects(self) -> list[WorldObject]:
        return [o for o in self.objects if o.category == "person"]

    def to_wire(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "ego_pose": self.ego_pose.to_wire(),
            "objects": [o.to_wire() for o in self.objects],
            "relations": [r.to_wire() for r in self.relations],
            "health": {"degraded_sensors": list(self.health.get("degraded_sensors", []))},
        }


def _validate(model: WorldModel) -> None:
    ids = [o.id for o in model.objects]
    if len(ids) != len(set(ids)):
        raise WorldModelError("object ids must be unique")
    for obj in model.objects:
        if not 0.0 <= obj.conf <= 1.0:
            raise WorldModelError(f"object {obj.id} confidence outside [0, 1]")


def derive_relations(
    tracks: Sequence[Track],
    landmarks: Sequence[tuple[str, tuple[float, float, float]]],
    near_threshold: float = NEAR_THRESHOLD,
    isolation_radius: float = ISOLATION_RADIUS,
) -> list[Relation]:
    """Spatial predicates: (track near landmark) and (person isolated crowd)."""
    if near_threshold <= 0:
        raise ValueError("near_threshold must be > 0")
    relations: list[Relation] = []
    for track in tracks:
        for lid, lpos in landmarks:
            dist = math.dist(tuple(track.position), lpos)
            if dist < near_threshold:
                relations.append(Relation(track.id, "near", lid))
    persons = [t for t in tracks if t.category == "person"]
    for track in persons:
        others = [p for p in persons if p.id != track.id]
        nearest = min(
            (math.dist(tuple(track.position), tuple(o.position)) for o in others),
            default=math.inf,
        )
        if nearest >= isolation_radius:
            relations.append(Relation(track.id, "isolated", "crowd"))
    return relations


def emit_world_model(
    tracks: Sequence[Track],
    ego_pose: Pose3,
    health: dict | None,
    timestamp: float,
    relations: Sequence[Relation] = (),
    current_tick: int | None = None,
    stale_ticks: int = STALE_TICKS,
    ego_position_var: float = 0.04,
) -> WorldModel:
    """Snapshot the live tracks into the wire-schema world model."""
    objects = []
    for track in sorted(tracks, key=lambda t: t.id):
        if current_tick is not None and current_tick - track.last_update_tick > stale_ticks:
            continue
        cov = tuple(tuple(float(v) for v in row) for row in track.covariance)
        objects.append(
            WorldObject(
                id=track.id,
                category=track.category,
                pose=tuple(float(v) for v in track.position),
                vel=tuple(float(v) for v in track.velocity),
                conf=float(min(1.0, max(0.0, track.confidence))),
                cov=cov,
                frames_stationary=track.frames_stationary,
                frames_seen=track.frames_seen,
                source_entity=track.source_entity,
            )
        )
    ego_cov = tuple(
        tuple(ego_position_var if i == j else 0.0 for j in range(3)) for i in range(3)
    )
    model = WorldModel(
        timestamp=timestamp,
        ego_pose=EgoPose(ego_pose.x, ego_pose.y, ego_pose.z, ego_pose.yaw, ego_cov),
        objects=tuple(objects),
        relations=tuple(relations),
        health={"degraded_sensors": list((health or {}).get("degraded_sensors", []))},
    )
    _validate(model)
    return model


def encode_world_model(model: WorldModel) -> str:
    return json.dumps(model.to_wire(), sort_keys=True)


def decode_world_model(text: str) -> WorldModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WorldModelError(f"invalid world model JSON: {exc.msg}") from exc
    try:
        objects = tuple(
            WorldObject(
                id=o["id"],
                category=o["class"],
                pose=tuple(map(float, o["pose"])),
                vel=tuple(map(float, o["vel"])),
                conf=float(o["conf"]),
                cov=tuple(tuple(map(float, row)) for row in o["cov"]),
            )
            for o in doc["objects"]
        )
        relations = tuple(
            Relation(r["subj"], r["pred"], r["obj"]) for r in doc["relations"]
        )
        ego = doc["ego_pose"]
        model = WorldModel(
            timestamp=float(doc["timestamp"]),
            ego_pose=EgoPose(
                float(ego["x"]),
                float(ego["y"]),
                float(ego["z"]),
                float(ego["yaw"]),
                tuple(tuple(map(float, row)) for row in ego["cov"]),
            ),
            objects=objects,
            relations=relations,
            health={"degraded_sensors": list(doc["health"]["degraded_sensors"])},
        )
    except (KeyError, TypeError) as exc:
        raise WorldModelError(f"world model missing field: {exc}") from exc
    _validate(model)
    return model
