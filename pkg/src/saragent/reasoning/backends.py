"""Reasoning backends: deterministic scripted tiers, remote HTTP, replay.

The scripted backend emulates the two agentic tiers offline. Its per-tier
confidence means, latency model and emission probabilities are calibration
constants chosen so that generated 44-scene logs land on the published
comparison rates in expectation; they are emulation targets, not
measurements.
"""
from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass

import numpy as np

from ..perception.worldmodel import WorldModel
from .prompts import Prompt

logger = logging.getLogger(__name__)

CRITICAL_ACTIONS = ("deploy rescue kit", "alert medical unit")
PERSISTENCE_FRAMES = 12

NORMAL_FEATURES_LONG = (
    "Pedestrians moving steadily through the monitored corridor in small "
    "groups; upright posture, regular gait, no obstructions or hazards in view."
)
NORMAL_FEATURES_SHORT = "Routine foot traffic."
CRITICAL_FEATURES = (
    "Person prone and motionless on open ground, several meters clear of the "
    "nearest pedestrian group; no bystander assistance visible near the site."
)


@dataclass(frozen=True)
class TierProfile:
    name: str
    confidence_mean: float
    confidence_sigma: float
    latency_mean: float
    latency_sd: float
    latency_floor: float
    p_action_normal: float    # P(non-critical response still recommends actions)
    p_context_normal: float   # P(non-critical response carries a long description)


TIER_PROFILES = {
    "local": TierProfile("local", 0.760, 0.08, 1.48, 0.58, 0.05, 0.73, 0.85),
    "cloud": TierProfile("cloud", 0.790, 0.08, 4.95, 1.15, 0.20, 0.90, 0.92),
}


class BackendError(RuntimeError):
    pass


class BackendTimeout(BackendError):
    pass


class BackendTransportError(BackendError):
    pass


@dataclass(frozen=True)
class BackendReply:
    text: str
    reported_latency: float | None = None


@dataclass(frozen=True)
class Invocation:
    text: str
    latency: float


def invoke_backend(backend, prompt: Prompt, timeout: float = 30.0) -> Invocation:
    """Call the backend and attach a latency figure.

    Scripted/replay backends report their own (modeled or recorded) latency so
    logs stay deterministic; the remote backend is timed on the wall clock.
    """
    start = time.monotonic()
    reply = backend.respond(prompt, timeout=timeout)
    measured = time.monotonic() - start
    latency = reply.reported_latency if reply.reported_latency is not None else measured
    return Invocation(text=reply.text, latency=latency)


def _isolated_ids(world: WorldModel) -> set[str]:
    return {r.subj for r in world.relations if r.pred == "isolated"}


def critical_candidates(world: WorldModel) -> list:
    """Person objects satisfying the emergency predicate (stationary + isolated)."""
    isolated = _isolated_ids(world)
    return [
        o
        for o in world.person_objects()
        if o.frames_stationary >= PERSISTENCE_FRAMES and o.id in isolated
    ]


class ScriptedBackend:
    """Deterministic rule-driven stand-in for the tiered language backends."""

    def __init__(self, tier: str, rng: np.random.Generator):
        if tier not in TIER_PROFILES:
            raise ValueError(f"unknown tier {tier!r}")
        self.profile = TIER_PROFILES[tier]
        self.rng = rng

    def _latency(self) -> float:
        p = self.profile
        return float(max(p.latency_floor, self.rng.normal(p.latency_mean, p.latency_sd)))

    def _confidence(self) -> float:
        p = self.profile
        return float(min(1.0, max(0.0, self.rng.normal(p.confidence_mean, p.confidence_sigma))))

    def respond(self, prompt: Prompt, timeout: float = 30.0) -> BackendReply:
        if prompt.kind == "plan":
            return BackendReply(self._plan_text(prompt), self._latency())
        return BackendReply(self._response_text(prompt.world), self._latency())

    def _response_text(self, world: WorldModel) -> str:
        persons = world.person_objects()
        detections = [
            {"object_id": o.id, "self_reported_confidence": round(self._confidence(), 4)}
            for o in persons
        ]
        critical = critical_candidates(world)
        if critical:
            doc = {
                "detections": detections,
                "severity": "critical",
                "surrounding_features": CRITICAL_FEATURES,
                "recommended_actions": list(CRITICAL_ACTIONS),
                "rationale": (
                    f"Track {critical[0].id} has shown no movement for "
                    f"{critical[0].frames_stationary} consecutive frames and is "
                    "isolated from every other tracked person."
                ),
            }
        else:
            emit_actions = self.rng.random() < self.profile.p_action_normal
            emit_context = self.rng.random() < self.profile.p_context_normal
            doc = {
                "detections": detections,
                "severity": "normal",
                "surrounding_features": NORMAL_FEATURES_LONG if emit_context else NORMAL_FEATURES_SHORT,
                "recommended_actions": ["continue monitoring"] if emit_actions else [],
                "rationale": "No tracked person meets the emergency predicate.",
            }
        return json.dumps(doc, sort_keys=True)

    def _plan_text(self, prompt: Prompt) -> str:
        goal = prompt.goal.strip().lower()
        world = prompt.world
        feedback = " ".join(prompt.feedback).lower()
        if "loiter" in goal:
            plan = {
                "plan_id": "plan-loiter",
                "goal": prompt.goal,
                "steps": [
                    {
                        "step_id": 1,
                        "action": "loiter",
                        "tool_name": None,
                        "args": {"duration_s": 2.0},
                        "preconditions": [],
                        "on_fail": "skip",
                    }
                ],
                "dependencies": {},
            }
            return json.dumps(plan, sort_keys=True)
        if "rescue" in goal or "assist" in goal or "inspect" in goal:
            critical = critical_candidates(world)
            if critical:
                target = list(critical[0].pose)
            else:
                objs = world.objects
                target = list(objs[0].pose) if objs else [world.ego_pose.x, world.ego_pose.y, 0.0]
            flight_action = "land_and_deploy" if ("rescue" in goal or "assist" in goal) else "fly_to"
            steps = []
            deps: dict[str, list[str]] = {}
            next_id = 1
            if "api.weather.get_forecast failed" in feedback:
                # scripted reflection rule: defer flight behind a loiter, then retry
                steps.append(
                    {
                        "step_id": next_id,
                        "action": "loiter",
                        "tool_name": None,
                        "args": {"duration_s": 1.0},
                        "preconditions": [],
                        "on_fail": "skip",
                    }
                )
                next_id += 1
            weather_id = next_id
            steps.append(
                {
                    "step_id": weather_id,
                    "action": "call_tool",
                    "tool_name": "api.weather.get_forecast",
                    "args": {"position": [world.ego_pose.x, world.ego_pose.y]},
                    "preconditions": [],
                    "on_fail": "trigger_reflection",
                }
            )
            flight_id = weather_id + 1
            steps.append(
                {
                    "step_id": flight_id,
                    "action": flight_action,
                    "tool_name": None,
                    "args": {"target": target},
                    "preconditions": [f"step_{weather_id}.wind_speed < 15"],
                    "on_fail": "trigger_reflection",
                }
            )
            deps[str(flight_id)] = [str(weather_id)]
            if weather_id > 1:
                deps[str(weather_id)] = ["1"]
            plan = {
                "plan_id": "plan-intervene",
                "goal": prompt.goal,
                "steps": steps,
                "dependencies": deps,
            }
            return json.dumps(plan, sort_keys=True)
        plan = {
            "plan_id": "plan-report",
            "goal": prompt.goal,
            "steps": [
                {
                    "step_id": 1,
                    "action": "report",
                    "tool_name": None,
                    "args": {"summary": "patrol status"},
                    "preconditions": [],
                    "on_fail": "skip",
                }
            ],
            "dependencies": {},
        }
        return json.dumps(plan, sort_keys=True)


class ReplayBackend:
    """Feeds back recorded responses; never touches the network."""

    def __init__(self, recorded: list[dict]):
        self._recorded = list(recorded)
        self._cursor = 0

    def respond(self, prompt: Prompt, timeout: float = 30.0) -> BackendReply:
        if self._cursor >= len(self._recorded):
            raise BackendError("replay log exhausted: no recorded response left")
        entry = self._recorded[self._cursor]
        self._cursor += 1
        return BackendReply(entry["text"], float(entry.get("latency", 0.0)))


def _default_transport(url: str, body: dict, headers: dict, timeout: float):
    import requests

    try:
        resp = requests.post(url, json=body, headers=headers, timeout=timeout)
    except requests.Timeout as exc:
        raise BackendTimeout(str(exc)) from exc
    except requests.RequestException as exc:
        raise BackendTransportError(str(exc)) from exc
    return resp.status_code, resp.text


class RemoteBackend:
    """Chat-style HTTP backend. Disabled in tests; transport is injectable."""

    def __init__(
        self,
        base_url: str | None = None,
        model: str | None = None,
        api_key_env: str = "AGENT_API_KEY",
        transport=None,
    ):
        self.base_url = base_url or os.environ.get("AGENT_API_BASE", "")
        self.model = model or os.environ.get("AGENT_MODEL", "")
        self.api_key_env = api_key_env
        self.transport = transport or _default_transport
        if not self.base_url:
            raise BackendError("remote backend requires AGENT_API_BASE or base_url")

    def respond(self, prompt: Prompt, timeout: float = 30.0) -> BackendReply:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt.text}],
        }
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        logged_headers = dict(headers)
        if "Authorization" in logged_headers:
            logged_headers["Authorization"] = "Bearer ***"
        logger.info("remote request to %s headers=%s", self.base_url, logged_headers)
        status, text = self.transport(self.base_url, body, headers, timeout)
        logger.info("remote response status=%s bytes=%d", status, len(text or ""))
        if status != 200:
            raise BackendTransportError(f"remote backend returned HTTP {status}")
        try:
            doc = json.loads(text)
            content = doc["choices"][0]["message"]["content"]
        except (json.JSONDecodeError, KeyError, IndexError, TypeError):
            content = text
        return BackendReply(content)
