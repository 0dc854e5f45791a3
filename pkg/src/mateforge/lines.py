"""Undirected 3D lines in a canonical, hashable form."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from mateforge.config import DEFAULT_CONFIG, ToleranceConfig

POINT_QUANTUM = 1e-4
DIRECTION_QUANTUM = 1e-6


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def canonical_direction(direction) -> np.ndarray:
    """Unit vector whose first component with |c| > 1e-9 is positive."""
    d = np.asarray(direction, dtype=np.float64)
    n = math.sqrt(float(d @ d))
    if not n > 1e-9:
        raise ValueError("direction has zero length")
    if abs(n - 1.0) > 1e-15:
        d = d / n
    for c in d:
        if abs(c) > 1e-9:
            if c < 0:
                d = -d
            break
    return d


@dataclass(frozen=True, eq=False)
class AxisLine:
    """A line stored as its foot point from the origin plus a sign-fixed direction.

    Equality and hashing go through ``key`` (quantized fields) so that
    deduplication is transitive.
    """

    point: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", _frozen(self.point))
        object.__setattr__(self, "direction", _frozen(self.direction))

    @property
    def key(self) -> tuple:
        p = tuple(int(round(float(c) / POINT_QUANTUM)) for c in self.point)
        d = tuple(int(round(float(c) / DIRECTION_QUANTUM)) for c in self.direction)
        return p + d

    def __eq__(self, other) -> bool:
        if not isinstance(other, AxisLine):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def distance_to_point(self, p) -> float:
        v = np.asarray(p, dtype=np.float64) - self.point
        return float(np.linalg.norm(v - (v @ self.direction) * self.direction))

    def project(self, p) -> float:
        """Signed coordinate of ``p``'s projection along the line."""
        return float((np.asarray(p, dtype=np.float64) - self.point) @ self.direction)

    def to_dict(self) -> dict:
        return {"point": [float(c) for c in self.point], "direction": [float(c) for c in self.direction]}

    def __repr__(self) -> str:
        p = ", ".join(f"{c:.6g}" for c in self.point)
        d = ", ".join(f"{c:.6g}" for c in self.direction)
        return f"AxisLine(point=[{p}], direction=[{d}])"


def canonicalize_line(point, direction) -> AxisLine:
    """Canonical form of the line through ``point`` along ``direction``.

    Idempotent bit-for-bit: feeding a canonical line back in returns the same
    floats.
    """
    d = canonical_direction(direction)
    p = np.asarray(point, dtype=np.float64)
    if not np.all(np.isfinite(p)):
        raise ValueError("point must be finite")
    # project until the guard stops firing, so the result is a fixed point
    for _ in range(8):
        s = float(p @ d)
        if abs(s) <= 1e-15 * (1.0 + math.sqrt(float(p @ p))):
            break
        p = p - s * d
    return AxisLine(p, d)


def line_through(point, direction) -> AxisLine:
    return canonicalize_line(point, direction)


def direction_angle(d1, d2) -> float:
    """Angle in [0, π/2] between two undirected directions."""
    a0, a1, a2 = (float(x) for x in d1)
    b0, b1, b2 = (float(x) for x in d2)
    c = math.sqrt((a1 * b2 - a2 * b1) ** 2 + (a2 * b0 - a0 * b2) ** 2 + (a0 * b1 - a1 * b0) ** 2)
    return math.atan2(c, abs(a0 * b0 + a1 * b1 + a2 * b2))


def direction_angles(dirs: np.ndarray, d) -> np.ndarray:
    """Row-wise :func:`direction_angle` of unit ``dirs`` (n, 3) against ``d``."""
    d = np.asarray(d, dtype=np.float64)
    c = np.linalg.norm(np.cross(dirs, d[None, :]), axis=1)
    return np.arctan2(c, np.abs(dirs @ d))


def separations(points: np.ndarray, dirs: np.ndarray, line: "AxisLine") -> np.ndarray:
    """Row-wise :func:`line_separation` between lines (points, unit dirs) and ``line``."""
    r = points - line.point[None, :]
    off = r - (r @ line.direction)[:, None] * line.direction[None, :]
    d1 = np.linalg.norm(off, axis=1)
    s = -r
    off2 = s - np.einsum("ij,ij->i", s, dirs)[:, None] * dirs
    return np.maximum(d1, np.linalg.norm(off2, axis=1))


def directions_parallel(a, b, tol: ToleranceConfig = DEFAULT_CONFIG) -> bool:
    """Parallel test for lines or raw direction vectors (sign ignored)."""
    da = a.direction if isinstance(a, AxisLine) else np.asarray(a, dtype=np.float64)
    db = b.direction if isinstance(b, AxisLine) else np.asarray(b, dtype=np.float64)
    da = da / np.linalg.norm(da)
    db = db / np.linalg.norm(db)
    return direction_angle(da, db) <= tol.angle_tol


def line_separation(a: AxisLine, b: AxisLine) -> float:
    """Symmetric offset between nearly parallel lines (max of foot-point distances)."""
    return max(a.distance_to_point(b.point), b.distance_to_point(a.point))


def lines_coincident(a: AxisLine, b: AxisLine, tol: ToleranceConfig = DEFAULT_CONFIG) -> bool:
    return directions_parallel(a, b, tol) and line_separation(a, b) <= tol.dist_tol


def sort_lines(lines) -> list:
    return sorted(lines, key=lambda l: l.key)


def dedup_lines(lines, tol: ToleranceConfig = DEFAULT_CONFIG) -> list:
    """Drop lines coincident with an earlier one, visiting in canonical order."""
    kept: list = []
    for line in sort_lines(set(lines)):
        if not any(lines_coincident(line, k, tol) for k in kept):
            kept.append(line)
    return kept
