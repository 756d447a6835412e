"""Deterministic tick-stepped world: entity behaviors, ego kinematics, events.

`step` is a pure function from one `SimState` snapshot to the next; snapshots
are safe to hand to other components between ticks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from ..geometry import Box, Frustum, Pose3, Vec3, vec_add, vec_dist, vec_norm, vec_scale, vec_sub
from .scenario import EntitySpec, ScenarioSpec

DEFAULT_EGO_SPEED = 8.0
BATTERY_IDLE_RATE = 0.0004     # fraction per second while airborne
BATTERY_MOVE_RATE = 0.00012    # extra fraction per meter flown


@dataclass(frozen=True)
class Entity:
    spec: EntitySpec
    pose: Pose3
    velocity: Vec3
    collapsed: bool = False
    waypoint_index: int = 0

    @property
    def id(self) -> str:
        return self.spec.id

    @property
    def category(self) -> str:
        return self.spec.category


@dataclass(frozen=True)
class EgoState:
    pose: Pose3
    velocity: Vec3 = (0.0, 0.0, 0.0)
    battery_fraction: float = 1.0
    landed: bool = False


@dataclass(frozen=True)
class FlightCommand:
    kind: str                      # fly_to | land | land_and_deploy | loiter
    target: Pose3 | None = None
    speed: float = DEFAULT_EGO_SPEED


@dataclass(frozen=True)
class Ack:
    accepted: bool
    reason: str = ""


@dataclass(frozen=True)
class SimEvent:
    tick: int
    type: str
    payload: dict

    def to_dict(self) -> dict:
        return {"tick": self.tick, "type": self.type, "payload": self.payload}


@dataclass(frozen=True)
class _ActiveCommand:
    kind: str
    target: Vec3
    speed: float
    descending: bool = False


@dataclass(frozen=True)
class SimState:
    spec: ScenarioSpec
    tick: int
    time: float
    entities: tuple[Entity, ...]
    ego: EgoState
    events: tuple[SimEvent, ...] = ()
    active: _ActiveCommand | None = None

    def entity(self, entity_id: str) -> Entity:
        for e in self.entities:
            if e.id == entity_id:
                return e
        raise KeyError(entity_id)


def init_state(spec: ScenarioSpec) -> SimState:
    entities = tuple(
        Entity(spec=e, pose=e.pose, velocity=e.velocity) for e in spec.entities
    )
    ego = EgoState(pose=spec.ego_start)
    return SimState(spec=spec, tick=0, time=0.0, entities=entities, ego=ego)


def _step_entity(ent: Entity, tick: int, dt: float) -> Entity:
    beh = ent.spec.behavior
    if ent.collapsed:
        return replace(ent, velocity=(0.0, 0.0, 0.0))
    if beh.collapse_tick is not None and tick >= beh.collapse_tick:
        return replace(ent, velocity=(0.0, 0.0, 0.0), collapsed=True)
    if beh.kind == "waypoint_walk" or (beh.kind == "collapse_at_tick" and beh.waypoints):
        waypoints = beh.waypoints
        idx = ent.waypoint_index
        pos = ent.pose.position
        remaining = beh.speed * dt
        while remaining > 0 and idx < len(waypoints):
            target = waypoints[idx]
            gap = vec_dist(pos, target)
            if gap <= remaining:
                pos = target
                remaining -= gap
                idx += 1
                if idx >= len(waypoints) and beh.loop:
                    idx = 0
            else:
                direction = vec_scale(vec_sub(target, pos), 1.0 / gap)
                pos = vec_add(pos, vec_scale(direction, remaining))
                remaining = 0.0
        if idx < len(waypoints):
            target = waypoints[idx]
            gap = vec_dist(pos, target)
            vel = vec_scale(vec_sub(target, pos), beh.speed / gap) if gap > 1e-9 else (0.0, 0.0, 0.0)
        else:
            vel = (0.0, 0.0, 0.0)
        return replace(ent, pose=ent.pose.moved_to(pos), velocity=vel, waypoint_index=idx)
    # stationary: drift with any fixed initial velocity
    if vec_norm(ent.velocity) > 0:
        pos = vec_add(ent.pose.position, vec_scale(ent.velocity, dt))
        return replace(ent, pose=ent.pose.moved_to(pos))
    return ent


def _step_ego(
    ego: EgoState, active: _ActiveCommand | None, dt: float, tick: int
) -> tuple[EgoState, _ActiveCommand | None, list[SimEvent]]:
    events: list[SimEvent] = []
    if active is None or ego.landed:
        drain = 0.0 if ego.landed else BATTERY_IDLE_RATE * dt
        battery = max(0.0, ego.battery_fraction - drain)
        return replace(ego, velocity=(0.0, 0.0, 0.0), battery_fraction=battery), active, events
    pos = ego.pose.position
    gap = vec_dist(pos, active.target)
    travel = min(gap, active.speed * dt)
    if gap > 1e-9:
        direction = vec_scale(vec_sub(active.target, pos), 1.0 / gap)
        new_pos = vec_add(pos, vec_scale(direction, travel))
        velocity = vec_scale(direction, active.speed if travel < gap else 0.0)
    else:
        new_pos = pos
        velocity = (0.0, 0.0, 0.0)
    battery = max(
        0.0, ego.battery_fraction - BATTERY_IDLE_RATE * dt - BATTERY_MOVE_RATE * travel
    )
    arrived = vec_dist(new_pos, active.target) <= 1e-9
    new_ego = replace(
        ego,
        pose=ego.pose.moved_to(new_pos),
        velocity=velocity,
        battery_fraction=battery,
    )
    if not arrived:
        return new_ego, active, events
    if active.descending:
        new_ego = replace(new_ego, landed=True, velocity=(0.0, 0.0, 0.0))
        events.append(SimEvent(tick, "landed", {"position": list(new_pos)}))
        if active.kind == "land_and_deploy":
            events.append(
                SimEvent(tick, "rescue_kit_deployed", {"position": list(new_pos)})
            )
    else:
        events.append(SimEvent(tick, "arrived", {"position": list(new_pos), "command": active.kind}))
    return new_ego, None, events


def step(state: SimState, dt: float) -> SimState:
    """Advance one tick of duration dt. dt == 0 returns the state unchanged."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    if dt == 0:
        return state
    tick = state.tick + 1
    new_entities = []
    events = list(state.events)
    for ent in state.entities:
        stepped = _step_entity(ent, tick, dt)
        if stepped.collapsed and not ent.collapsed:
            events.append(
                SimEvent(tick, "entity_collapsed", {"entity": ent.id, "position": list(stepped.pose.position)})
            )
        new_entities.append(stepped)
    ego, active, ego_events = _step_ego(state.ego, state.active, dt, tick)
    events.extend(ego_events)
    return SimState(
        spec=state.spec,
        tick=tick,
        time=state.time + dt,
        entities=tuple(new_entities),
        ego=ego,
        events=tuple(events),
        active=active,
    )


def visible_entities(state: SimState, fov: Frustum) -> list[tuple[Entity, float]]:
    """Entities inside the (closed) frustum, nearest first, id as tie-break."""
    hits = []
    for ent in state.entities:
        inside, rng = fov.contains(ent.pose.position)
        if inside:
            hits.append((ent, rng))
    hits.sort(key=lambda pair: (pair[1], pair[0].id))
    return hits


def ego_frustum(state: SimState, half_angle_rad: float | None = None, max_range: float = 60.0) -> Frustum:
    kwargs = {"apex": state.ego.pose.position, "max_range": max_range}
    if half_angle_rad is not None:
        kwargs["half_angle_rad"] = half_angle_rad
    return Frustum(**kwargs)


def apply_command(state: SimState, cmd: FlightCommand) -> tuple[SimState, Ack]:
    """Install a flight command. Unsafe targets are rejected with the state unchanged."""
    geofence = state.spec.geofence
    tick = state.tick
    if cmd.kind == "loiter":
        new = replace(
            state,
            active=None,
            events=state.events + (SimEvent(tick, "command", {"kind": "loiter"}),),
        )
        return new, Ack(True)
    if cmd.kind == "fly_to":
        if cmd.target is None:
            return state, Ack(False, "fly_to requires a target")
        target = cmd.target.position
        if not geofence.contains(target):
            new = replace(
                state,
                events=state.events
                + (SimEvent(tick, "command_rejected", {"kind": cmd.kind, "reason": "geofence"}),),
            )
            return new, Ack(False, "target outside geofence")
        active = _ActiveCommand("fly_to", target, max(0.1, cmd.speed))
        new = replace(
            state,
            active=active,
            events=state.events + (SimEvent(tick, "command", {"kind": "fly_to", "target": list(target)}),),
        )
        return new, Ack(True)
    if cmd.kind in ("land", "land_and_deploy"):
        base = cmd.target.position if cmd.target is not None else state.ego.pose.position
        ground = (base[0], base[1], geofence.min_corner[2])
        if not geofence.contains((base[0], base[1], max(ground[2], min(base[2], geofence.max_corner[2])))):
            new = replace(
                state,
                events=state.events
                + (SimEvent(tick, "command_rejected", {"kind": cmd.kind, "reason": "geofence"}),),
            )
            return new, Ack(False, "target outside geofence")
        active = _ActiveCommand(cmd.kind, ground, max(0.1, cmd.speed), descending=True)
        new = replace(
            state,
            active=active,
            events=state.events + (SimEvent(tick, "command", {"kind": cmd.kind, "target": list(ground)}),),
        )
        return new, Ack(True)
    return state, Ack(False, f"unknown command kind {cmd.kind!r}")


def record_violation(state: SimState, violation_type: str, detail: dict) -> SimState:
    event = SimEvent(state.tick, "safety_violation", {"violation": violation_type, **detail})
    return replace(state, events=state.events + (event,), active=None)


def write_event_log(path: str | Path, events: Iterable[SimEvent]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(json.dumps(ev.to_dict(), sort_keys=True) + "\n")
