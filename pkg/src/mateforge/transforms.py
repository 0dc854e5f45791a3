"""Rigid transforms stored as (unit quaternion, translation) and screw decomposition."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from mateforge.lines import AxisLine, canonicalize_line


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def quat_multiply(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Hamilton product of wxyz quaternions; broadcasts over leading axes."""
    w1, x1, y1, z1 = q1[..., 0], q1[..., 1], q1[..., 2], q1[..., 3]
    w2, x2, y2, z2 = q2[..., 0], q2[..., 1], q2[..., 2], q2[..., 3]
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrices for wxyz unit quaternions, shape (..., 3, 3)."""
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    m = np.empty(q.shape[:-1] + (3, 3))
    m[..., 0, 0] = 1 - 2 * (y * y + z * z)
    m[..., 0, 1] = 2 * (x * y - w * z)
    m[..., 0, 2] = 2 * (x * z + w * y)
    m[..., 1, 0] = 2 * (x * y + w * z)
    m[..., 1, 1] = 1 - 2 * (x * x + z * z)
    m[..., 1, 2] = 2 * (y * z - w * x)
    m[..., 2, 0] = 2 * (x * z - w * y)
    m[..., 2, 1] = 2 * (y * z + w * x)
    m[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return m


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vectors ``v`` (..., 3) by quaternions ``q`` (..., 4)."""
    w = q[..., :1]
    u = q[..., 1:]
    uv = np.cross(u, v)
    return v + 2.0 * (w * uv + np.cross(u, uv))


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Proper rigid motion x -> R x + t with R held as a wxyz unit quaternion."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.rotation, dtype=np.float64).reshape(4)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(t))):
            raise ValueError("transform components must be finite")
        n = math.sqrt(float(q @ q))
        if n < 1e-12:
            raise ValueError("zero quaternion")
        if abs(n - 1.0) > 1e-12:
            q = q / n
        object.__setattr__(self, "rotation", _frozen(q))
        object.__setattr__(self, "translation", _frozen(t))

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.array([1.0, 0.0, 0.0, 0.0]), np.zeros(3))

    @classmethod
    def from_translation(cls, t) -> "RigidTransform":
        return cls(np.array([1.0, 0.0, 0.0, 0.0]), t)

    @classmethod
    def from_axis_angle(cls, axis, angle: float, point=None) -> "RigidTransform":
        """Rotation by ``angle`` about the line through ``point`` along ``axis``."""
        axis = np.asarray(axis, dtype=np.float64)
        axis = axis / np.linalg.norm(axis)
        half = 0.5 * angle
        q = np.concatenate([[math.cos(half)], math.sin(half) * axis])
        if point is None:
            return cls(q, np.zeros(3))
        p = np.asarray(point, dtype=np.float64)
        # x -> R(x - p) + p
        return cls(q, p - quat_rotate(q, p))

    @classmethod
    def from_matrix(cls, m) -> "RigidTransform":
        from scipy.spatial.transform import Rotation

        m = np.asarray(m, dtype=np.float64)
        xyzw = Rotation.from_matrix(m[:3, :3]).as_quat()
        return cls(np.roll(xyzw, 1), m[:3, 3])

    @property
    def rotation_matrix(self) -> np.ndarray:
        return quat_to_matrix(self.rotation)

    @property
    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation_matrix
        m[:3, 3] = self.translation
        return m

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation_matrix.T + self.translation

    def apply_vector(self, vectors) -> np.ndarray:
        return np.asarray(vectors, dtype=np.float64) @ self.rotation_matrix.T

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """``self ∘ other``: apply ``other`` first, then ``self``."""
        return compose_transforms(self, other)

    def inverse(self) -> "RigidTransform":
        q_inv = self.rotation * np.array([1.0, -1.0, -1.0, -1.0])
        return RigidTransform(q_inv, -quat_rotate(q_inv, self.translation))

    def transform_line(self, line: AxisLine) -> AxisLine:
        return canonicalize_line(self.apply(line.point), self.apply_vector(line.direction))

    def allclose(self, other: "RigidTransform", atol: float = 1e-9) -> bool:
        # q and -q are the same rotation
        dq = min(
            np.max(np.abs(self.rotation - other.rotation)),
            np.max(np.abs(self.rotation + other.rotation)),
        )
        return bool(dq <= atol and np.max(np.abs(self.translation - other.translation)) <= atol)

    def __repr__(self) -> str:
        q = ", ".join(f"{v:.6g}" for v in self.rotation)
        t = ", ".join(f"{v:.6g}" for v in self.translation)
        return f"RigidTransform(q=[{q}], t=[{t}])"


def compose_transforms(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Return ``a ∘ b`` (b applied first). The quaternion is renormalized."""
    q = quat_multiply(a.rotation, b.rotation)
    t = quat_rotate(a.rotation, b.translation) + a.translation
    return RigidTransform(q, t)


@dataclass(frozen=True, eq=False)
class ScrewMotion:
    angle: float
    axis: Optional[AxisLine]
    pitch_translation: np.ndarray


def screw_decompose(t: RigidTransform, angle_tol: float = 1e-3) -> ScrewMotion:
    """Split ``t`` into a rotation about a unique axis plus a slide along it.

    Below ``angle_tol`` the motion is treated as a pure translation and
    ``axis`` is None.
    """
    angles, dirs, points, axial = screw_decompose_batch(
        t.rotation[None, :], t.translation[None, :]
    )
    angle = float(angles[0])
    if angle <= angle_tol:
        return ScrewMotion(angle, None, t.translation.copy())
    axis = canonicalize_line(points[0], dirs[0])
    return ScrewMotion(angle, axis, axial[0] * dirs[0])


def screw_decompose_batch(q: np.ndarray, t: np.ndarray):
    """Vectorized screw decomposition.

    Returns ``(angle, direction, point, axial)`` where ``axial`` is the signed
    translation along ``direction``. For near-zero angles the direction is
    meaningless (zeros) and ``axial`` is 0; callers fall back to ``t``.
    """
    q = np.asarray(q, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    sign = np.where(q[:, 0] < 0, -1.0, 1.0)[:, None]
    q = q * sign
    v = q[:, 1:]
    s = np.sqrt(v[:, 0] ** 2 + v[:, 1] ** 2 + v[:, 2] ** 2)
    angle = 2.0 * np.arctan2(s, q[:, 0])
    safe = s > 1e-300
    u = np.zeros_like(v)
    u[safe] = v[safe] / s[safe, None]
    axial = t[:, 0] * u[:, 0] + t[:, 1] * u[:, 1] + t[:, 2] * u[:, 2]
    t_perp = t - axial[:, None] * u
    half = 0.5 * angle
    cot = np.zeros_like(angle)
    nz = np.sin(half) > 1e-300
    cot[nz] = np.cos(half[nz]) / np.sin(half[nz])
    # foot of the axis: p = (t_perp + cot(θ/2) u × t_perp) / 2
    point = 0.5 * (t_perp + cot[:, None] * np.cross(u, t_perp))
    return angle, u, point, axial
