"""Parameterized stand-in for a real object detector.

Misses, positional noise and confidence draws are all calibrated through
`DetectorParams`; the defaults target a 75% per-entity hit rate with a mean
confidence of 0.716.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import Vec3
from ..sim.world import Entity

DETECTABLE = ("person", "vehicle")


@dataclass(frozen=True)
class DetectorParams:
    miss_rate: float = 0.25
    false_positive_rate: float = 0.02
    noise_sigma: float = 0.15
    confidence_mean: float = 0.716
    confidence_sigma: float = 0.08
    occluded_entities: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if not 0.0 <= self.miss_rate <= 1.0:
            raise ValueError("miss_rate must be in [0, 1]")
        if not 0.0 <= self.false_positive_rate <= 1.0:
            raise ValueError("false_positive_rate must be in [0, 1]")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")
        if self.confidence_sigma < 0.0:
            raise ValueError("confidence_sigma must be >= 0")


@dataclass(frozen=True)
class Detection:
    category: str
    position: Vec3
    confidence: float
    source_entity: str | None = None   # ground-truth link, evaluation only

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError("confidence must be in [0, 1]")


def _draw_confidence(params: DetectorParams, rng: np.random.Generator) -> float:
    c = rng.normal(params.confidence_mean, params.confidence_sigma)
    return float(min(1.0, max(0.0, c)))


def simulate_detector(
    visible: list[tuple[Entity, float]],
    params: DetectorParams,
    rng: np.random.Generator,
) -> list[Detection]:
    """Turn ground-truth visibility into noisy detections.

    Each visible person/vehicle is independently missed with `miss_rate`;
    survivors get Gaussian position noise and a clipped-Gaussian confidence.
    With probability `false_positive_rate` one clutter detection is appended
    near a randomly chosen visible entity.
    """
    detections: list[Detection] = []
    for entity, _ in visible:
        if entity.category not in DETECTABLE:
            continue
        if entity.id in params.occluded_entities:
            continue
        if params.miss_rate >= 1.0 or rng.random() < params.miss_rate:
            continue
        noise = rng.normal(0.0, params.noise_sigma, size=3) if params.noise_sigma > 0 else np.zeros(3)
        pos = entity.pose.position
        detections.append(
            Detection(
                category=entity.category,
                position=(pos[0] + noise[0], pos[1] + noise[1], pos[2] + noise[2]),
                confidence=_draw_confidence(params, rng),
                source_entity=entity.id,
            )
        )
    targets = [e for e, _ in visible if e.category in DETECTABLE]
    if targets and params.false_positive_rate > 0 and rng.random() < params.false_positive_rate:
        anchor = targets[rng.integers(len(targets))]
        offset = rng.normal(0.0, 4.0, size=3)
        pos = anchor.pose.position
        detections.append(
            Detection(
                category="person",
                position=(pos[0] + offset[0], pos[1] + offset[1], pos[2] + abs(offset[2])),
                confidence=_draw_confidence(params, rng),
                source_entity=None,
            )
        )
    return detections
