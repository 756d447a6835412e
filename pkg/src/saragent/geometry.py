"""Small 3D geometry helpers shared by the simulator and perception."""
from __future__ import annotations

import math
from dataclasses import dataclass

Vec3 = tuple[float, float, float]


def vec_add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vec_sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vec_scale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def vec_norm(a: Vec3) -> float:
    return math.sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2])


def vec_dist(a: Vec3, b: Vec3) -> float:
    return vec_norm(vec_sub(a, b))


@dataclass(frozen=True)
class Pose3:
    x: float
    y: float
    z: float
    yaw: float = 0.0

    @property
    def position(self) -> Vec3:
        return (self.x, self.y, self.z)

    def moved_to(self, p: Vec3) -> "Pose3":
        return Pose3(p[0], p[1], p[2], self.yaw)

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "z": self.z, "yaw": self.yaw}

    @classmethod
    def from_dict(cls, d: dict) -> "Pose3":
        return cls(float(d["x"]), float(d["y"]), float(d["z"]), float(d.get("yaw", 0.0)))


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, closed on all faces."""

    min_corner: Vec3
    max_corner: Vec3

    def __post_init__(self) -> None:
        for lo, hi in zip(self.min_corner, self.max_corner):
            if lo >= hi:
                raise ValueError("box min corner must be strictly below max corner")

    def contains(self, p: Vec3) -> bool:
        return all(lo <= v <= hi for v, lo, hi in zip(p, self.min_corner, self.max_corner))

    def to_dict(self) -> dict:
        return {"min": list(self.min_corner), "max": list(self.max_corner)}

    @classmethod
    def from_dict(cls, d: dict) -> "Box":
        return cls(tuple(map(float, d["min"])), tuple(map(float, d["max"])))


@dataclass(frozen=True)
class Frustum:
    """Conical sensor footprint: apex at the sensor, closed boundary."""

    apex: Vec3
    axis: Vec3 = (0.0, 0.0, -1.0)
    half_angle_rad: float = math.radians(60.0)
    max_range: float = 60.0

    def __post_init__(self) -> None:
        if vec_norm(self.axis) == 0.0:
            raise ValueError("frustum axis must be non-zero")
        if not 0.0 < self.half_angle_rad <= math.pi:
            raise ValueError("half angle must be in (0, pi]")
        if self.max_range <= 0.0:
            raise ValueError("max range must be positive")

    def contains(self, p: Vec3) -> tuple[bool, float]:
        """(inside, range). Points exactly on a boundary count as inside."""
        v = vec_sub(p, self.apex)
        r = vec_norm(v)
        if r > self.max_range:
            return False, r
        if r == 0.0:
            return True, 0.0
        axis = vec_scale(self.axis, 1.0 / vec_norm(self.axis))
        cos_angle = (v[0] * axis[0] + v[1] * axis[1] + v[2] * axis[2]) / r
        cos_angle = max(-1.0, min(1.0, cos_angle))
        return math.acos(cos_angle) <= self.half_angle_rad + 1e-12, r
