"""Greedy gated nearest-neighbor association and M-of-N track management."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .detector import Detection
from .kalman import (
    SingularInnovationError,
    Track,
    default_measurement_noise,
    default_process_noise,
    kf_predict,
    kf_update,
    make_track,
)

BIRTH_CONSECUTIVE = 2
STALE_TICKS = 30


@dataclass(frozen=True)
class Assignment:
    matched: dict[int, str]        # detection index -> track id
    unmatched: tuple[int, ...]     # detection indices flagged for track birth


def associate(
    tracks: list[Track], detections: list[Detection], gate_radius: float
) -> Assignment:
    """Greedy nearest-neighbor matching inside the gate.

    Ties break on (distance, track id) ascending; each detection lands on at
    most one track and vice versa.
    """
    if gate_radius <= 0:
        raise ValueError("gate_radius must be > 0")
    candidates = []
    for det_idx, det in enumerate(detections):
        dpos = np.asarray(det.position)
        for track in tracks:
            dist = float(np.linalg.norm(track.position - dpos))
            if dist < gate_radius:
                candidates.append((dist, track.id, det_idx))
    candidates.sort()
    matched: dict[int, str] = {}
    used_tracks: set[str] = set()
    for dist, track_id, det_idx in candidates:
        if det_idx in matched or track_id in used_tracks:
            continue
        matched[det_idx] = track_id
        used_tracks.add(track_id)
    unmatched = tuple(i for i in range(len(detections)) if i not in matched)
    return Assignment(matched=matched, unmatched=unmatched)


@dataclass
class _PendingTrack:
    detection: Detection
    tick: int
    streak: int


@dataclass
class MultiObjectTracker:
    """Owns live tracks; birth after 2 consecutive hits, death after 30 stale ticks."""

    gate_radius: float = 2.5
    accel_psd: float = 0.002
    measurement_sigma: float = 0.15
    motion_eps: float = 0.05
    stale_ticks: int = STALE_TICKS
    tracks: dict[str, Track] = field(default_factory=dict)
    health_notes: list[str] = field(default_factory=list)
    _pending: list[_PendingTrack] = field(default_factory=list)
    _next_id: int = 1

    def _new_id(self) -> str:
        track_id = f"T-{self._next_id:03d}"
        self._next_id += 1
        return track_id

    def step(self, detections: list[Detection], tick: int, dt: float) -> list[Track]:
        q = default_process_noise(dt, self.accel_psd)
        r = default_measurement_noise(self.measurement_sigma)
        for tid, track in list(self.tracks.items()):
            self.tracks[tid] = kf_predict(track, dt, q)
        live = sorted(self.tracks.values(), key=lambda t: t.id)
        assignment = associate(live, detections, self.gate_radius) if live or detections else Assignment({}, ())
        for det_idx, tid in assignment.matched.items():
            try:
                self.tracks[tid] = kf_update(
                    self.tracks[tid], detections[det_idx], r, tick, self.motion_eps
                )
            except SingularInnovationError as exc:
                self.health_notes.append(f"tick {tick}: update skipped for {tid}: {exc}")
        # births: a pending detection confirmed by a nearby hit on the next tick
        leftover = [detections[i] for i in assignment.unmatched]
        still_pending: list[_PendingTrack] = []
        for pending in self._pending:
            confirm_idx = None
            best = math.inf
            for i, det in enumerate(leftover):
                if det is None or det.category != pending.detection.category:
                    continue
                dist = float(
                    np.linalg.norm(
                        np.asarray(det.position) - np.asarray(pending.detection.position)
                    )
                )
                if dist < self.gate_radius and dist < best:
                    best = dist
                    confirm_idx = i
            if confirm_idx is None:
                continue  # streak broken, pending dropped
            det = leftover[confirm_idx]
            leftover[confirm_idx] = None
            if pending.streak + 1 >= BIRTH_CONSECUTIVE:
                tid = self._new_id()
                track = make_track(tid, det, tick)
                self.tracks[tid] = track
            else:
                still_pending.append(_PendingTrack(det, tick, pending.streak + 1))
        for det in leftover:
            if det is not None:
                still_pending.append(_PendingTrack(det, tick, 1))
        self._pending = still_pending
        # deaths
        for tid, track in list(self.tracks.items()):
            if tick - track.last_update_tick > self.stale_ticks:
                del self.tracks[tid]
        return self.live_tracks(tick)

    def live_tracks(self, tick: int) -> list[Track]:
        return sorted(
            (t for t in self.tracks.values() if tick - t.last_update_tick <= self.stale_ticks),
            key=lambda t: t.id,
        )
