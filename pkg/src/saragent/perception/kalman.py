"""Constant-velocity Kalman filter over position-only measurements.

State is [x, y, z, vx, vy, vz]; the measurement model observes position.
Covariance updates use the Joseph form and explicit symmetrization so the
matrix stays PSD through long fuzz runs.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .detector import Detection

MOTION_EPS = 0.05          # m/s below which a track counts as stationary
CONFIDENCE_EMA_ALPHA = 0.3


class SingularInnovationError(RuntimeError):
    """Innovation covariance was not invertible; the update is skipped."""


def _check_psd(m: np.ndarray, name: str) -> None:
    if m.shape != (m.shape[0], m.shape[0]) or not np.allclose(m, m.T, atol=1e-9):
        raise ValueError(f"{name} must be symmetric")
    eigvals = np.linalg.eigvalsh(m)
    if eigvals.min() < -1e-9:
        raise ValueError(f"{name} must be positive semi-definite")


def default_process_noise(dt: float, accel_psd: float = 0.002) -> np.ndarray:
    """White-acceleration process noise for the CV model."""
    q = np.zeros((6, 6))
    q3 = accel_psd * dt ** 3 / 3.0
    q2 = accel_psd * dt ** 2 / 2.0
    q1 = accel_psd * dt
    for axis in range(3):
        q[axis, axis] = q3
        q[axis, axis + 3] = q2
        q[axis + 3, axis] = q2
        q[axis + 3, axis + 3] = q1
    return q


def default_measurement_noise(sigma: float = 0.15) -> np.ndarray:
    return np.eye(3) * sigma ** 2


@dataclass(frozen=True)
class Track:
    id: str
    category: str
    mean: np.ndarray                 # shape (6,)
    covariance: np.ndarray           # shape (6, 6)
    confidence: float
    frames_seen: int = 1
    frames_stationary: int = 0
    last_update_tick: int = 0
    source_entity: str | None = None   # ground-truth link, evaluation only

    @property
    def position(self) -> np.ndarray:
        return self.mean[:3]

    @property
    def velocity(self) -> np.ndarray:
        return self.mean[3:]

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.mean[3:]))


def make_track(
    track_id: str, detection: Detection, tick: int, position_var: float = 1.0, velocity_var: float = 1.0
) -> Track:
    mean = np.zeros(6)
    mean[:3] = detection.position
    cov = np.diag([position_var] * 3 + [velocity_var] * 3).astype(float)
    return Track(
        id=track_id,
        category=detection.category,
        mean=mean,
        covariance=cov,
        confidence=detection.confidence,
        frames_seen=1,
        frames_stationary=0,
        last_update_tick=tick,
        source_entity=detection.source_entity,
    )


def kf_predict(track: Track, dt: float, process_noise: np.ndarray) -> Track:
    """Constant-velocity prediction: position += velocity*dt, P = FPF' + Q."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    q = np.asarray(process_noise, dtype=float)
    _check_psd(q, "process noise")
    f = np.eye(6)
    for axis in range(3):
        f[axis, axis + 3] = dt
    mean = f @ track.mean
    cov = f @ track.covariance @ f.T + q
    cov = 0.5 * (cov + cov.T)
    return replace(track, mean=mean, covariance=cov)


def kf_update(
    track: Track,
    detection: Detection,
    measurement_noise: np.ndarray,
    tick: int,
    motion_eps: float = MOTION_EPS,
) -> Track:
    """Position-only linear update; maintains the stationarity streak counter."""
    r = np.asarray(measurement_noise, dtype=float)
    _check_psd(r, "measurement noise")
    h = np.zeros((3, 6))
    h[:, :3] = np.eye(3)
    z = np.asarray(detection.position, dtype=float)
    innovation = z - h @ track.mean
    s = h @ track.covariance @ h.T + r
    try:
        s_inv = np.linalg.inv(s)
    except np.linalg.LinAlgError as exc:
        raise SingularInnovationError(str(exc)) from exc
    if not np.isfinite(s_inv).all():
        raise SingularInnovationError("non-finite innovation covariance inverse")
    gain = track.covariance @ h.T @ s_inv
    mean = track.mean + gain @ innovation
    ikh = np.eye(6) - gain @ h
    cov = ikh @ track.covariance @ ikh.T + gain @ r @ gain.T
    cov = 0.5 * (cov + cov.T)
    speed = float(np.linalg.norm(mean[3:]))
    stationary = track.frames_stationary + 1 if speed < motion_eps else 0
    confidence = (
        CONFIDENCE_EMA_ALPHA * detection.confidence
        + (1.0 - CONFIDENCE_EMA_ALPHA) * track.confidence
    )
    return replace(
        track,
        mean=mean,
        covariance=cov,
        confidence=float(min(1.0, max(0.0, confidence))),
        frames_seen=track.frames_seen + 1,
        frames_stationary=stationary,
        last_update_tick=tick,
        source_entity=detection.source_entity or track.source_entity,
    )
