"""Structured agent responses and their strict-but-forgiving parser."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

logger = logging.getLogger(__name__)

SEVERITIES = ("normal", "critical")


class ResponseParseError(ValueError):
    pass


@dataclass(frozen=True)
class ReportedDetection:
    object_id: str
    self_reported_confidence: float


@dataclass(frozen=True)
class AgentResponse:
    detections: tuple[ReportedDetection, ...] = ()
    severity: str = "normal"
    surrounding_features: str = ""
    recommended_actions: tuple[str, ...] = ()
    rationale: str = ""

    def to_wire(self) -> dict:
        return {
            "detections": [
                {"object_id": d.object_id, "self_reported_confidence": d.self_reported_confidence}
                for d in self.detections
            ],
            "severity": self.severity,
            "surrounding_features": self.surrounding_features,
            "recommended_actions": list(self.recommended_actions),
            "rationale": self.rationale,
        }


def _clip_confidence(value, object_id: str) -> float:
    try:
        conf = float(value)
    except (TypeError, ValueError) as exc:
        raise ResponseParseError(
            f"detection {object_id!r} confidence is not a number: {value!r}"
        ) from exc
    if conf < 0.0 or conf > 1.0:
        clipped = min(1.0, max(0.0, conf))
        logger.warning(
            "self-reported confidence %.3f for %s outside [0, 1]; clipped to %.1f",
            conf, object_id, clipped,
        )
        return clipped
    return conf


def parse_response(raw: str) -> AgentResponse:
    """Parse backend output into an AgentResponse.

    Missing fields default (empty lists / empty text / severity normal);
    out-of-range confidences are clipped with a warning; anything structurally
    wrong raises ResponseParseError.
    """
    if raw is None or not str(raw).strip():
        raise ResponseParseError("empty response")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ResponseParseError(f"response is not valid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ResponseParseError("response must be a JSON object")
    severity = doc.get("severity", "normal")
    if severity not in SEVERITIES:
        raise ResponseParseError(f"unknown severity {severity!r}")
    raw_dets = doc.get("detections", [])
    if not isinstance(raw_dets, list):
        raise ResponseParseError("detections must be a list")
    detections = []
    for entry in raw_dets:
        if not isinstance(entry, dict) or "object_id" not in entry:
            raise ResponseParseError(f"malformed detection entry: {entry!r}")
        oid = str(entry["object_id"])
        detections.append(
            ReportedDetection(oid, _clip_confidence(entry.get("self_reported_confidence", 0.0), oid))
        )
    actions = doc.get("recommended_actions", [])
    if not isinstance(actions, list) or not all(isinstance(a, str) for a in actions):
        raise ResponseParseError("recommended_actions must be a list of strings")
    if severity == "critical" and not actions:
        raise ResponseParseError("critical severity requires recommended actions")
    return AgentResponse(
        detections=tuple(detections),
        severity=severity,
        surrounding_features=str(doc.get("surrounding_features", "")),
        recommended_actions=tuple(actions),
        rationale=str(doc.get("rationale", "")),
    )
