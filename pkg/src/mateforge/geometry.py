"""Geometric predicates on placed parts: contact, candidate axes, sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from mateforge.config import DEFAULT_CONFIG, ToleranceConfig
from mateforge.lines import AxisLine, dedup_lines, directions_parallel, lines_coincident, sort_lines
from mateforge.meshdist import BVH, bvh_distance, count_intersections, winding_numbers
from mateforge.model import Assembly, Mate, MateType, Part, bbox_diagonal
from mateforge.transforms import RigidTransform


@dataclass(frozen=True)
class ContactReport:
    part_a: str
    part_b: str
    min_distance: float
    in_contact: bool
    contact_tol: float

    def to_dict(self) -> dict:
        return {
            "part_a": self.part_a,
            "part_b": self.part_b,
            "min_distance": self.min_distance,
            "in_contact": self.in_contact,
            "contact_tol": self.contact_tol,
        }


def min_distance(
    a: Part, b: Part, contact_tol: Optional[float] = None, config: ToleranceConfig = DEFAULT_CONFIG
) -> ContactReport:
    """Closest approach of two placed meshes (0 when they intersect).

    Without an explicit ``contact_tol`` the configured one is used, falling
    back to the relative tolerance on the pair's bounding-box diagonal.
    """
    if a.mesh.is_empty or b.mesh.is_empty:
        raise ValueError("empty mesh")
    d = bvh_distance(a.world_bvh, b.world_bvh)
    if contact_tol is None:
        contact_tol = config.contact_tol_for(bbox_diagonal(a, b))
    return ContactReport(a.id, b.id, d, d <= contact_tol, contact_tol)


def assembly_contact_tol(assembly: Assembly, config: ToleranceConfig = DEFAULT_CONFIG) -> float:
    return config.contact_tol_for(assembly.diagonal())


def extract_axes(p: Part, tol: ToleranceConfig = DEFAULT_CONFIG) -> list:
    """World-frame candidate lines: cylinder axes and face-centre normals, deduplicated."""
    return dedup_lines([f.axis_line() for f in p.world_features], tol)


@dataclass(frozen=True)
class CandidateAxisSet:
    axes: dict = field(default_factory=dict)

    def __getitem__(self, part_id: str) -> list:
        return self.axes.get(part_id, [])

    def to_dict(self) -> dict:
        return {pid: [l.to_dict() for l in lines] for pid, lines in sorted(self.axes.items())}


def candidate_axes(assembly: Assembly, tol: ToleranceConfig = DEFAULT_CONFIG) -> CandidateAxisSet:
    return CandidateAxisSet({p.id: extract_axes(p, tol) for p in assembly.parts})


def _part_id(p) -> str:
    return p.id if isinstance(p, Part) else p


def shared_axes(a, b, candidates: CandidateAxisSet, tol: ToleranceConfig = DEFAULT_CONFIG) -> list:
    """Lines that appear (up to coincidence) among both parts' candidates.

    ``a`` and ``b`` may be parts or part ids.
    """
    la, lb = candidates[_part_id(a)], candidates[_part_id(b)]
    hits = [x for x in la if any(lines_coincident(x, y, tol) for y in lb)]
    return dedup_lines(hits, tol)


@dataclass(frozen=True)
class AxisAmbiguity:
    equivalent_axes: list
    ambiguous: bool
    mate_axis_in_shared: bool
    shared: list


def axis_equivalent(mate_type: Optional[MateType], mate_axis: AxisLine, other: AxisLine, tol) -> bool:
    """Whether placing a mate of this type on ``other`` describes the same motion."""
    if mate_type is MateType.FASTEN:
        return True
    if mate_type is MateType.SLIDER:
        return directions_parallel(mate_axis, other, tol)
    return lines_coincident(mate_axis, other, tol)


def axis_ambiguity(
    assembly: Assembly, mate: Mate, candidates: CandidateAxisSet, tol: ToleranceConfig = DEFAULT_CONFIG
) -> AxisAmbiguity:
    """Shared axes that are interchangeable with the mate's own axis.

    A mate is ambiguous when at least one shared axis would describe a
    different motion. ``mate_axis_in_shared`` is False when the mate's axis is
    not itself a candidate (reported, not an error).
    """
    shared = shared_axes(mate.part_a, mate.part_b, candidates, tol)
    equivalent = [s for s in shared if axis_equivalent(mate.mate_type, mate.axis, s, tol)]
    in_shared = any(lines_coincident(mate.axis, s, tol) for s in shared)
    return AxisAmbiguity(equivalent, len(equivalent) < len(shared), in_shared, shared)


# --- swept-motion feasibility ---------------------------------------------------------


@dataclass(frozen=True)
class FeasibilityLabel:
    pair: tuple
    axis: AxisLine
    rotatable: bool
    slidable: bool
    blocked_rotations: tuple = ()
    blocked_translations: tuple = ()

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "axis": self.axis.to_dict(),
            "rotatable": self.rotatable,
            "slidable": self.slidable,
        }


def vertex_normals(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Area-weighted unit vertex normals (zero where they cancel)."""
    tris = vertices[triangles]
    fn = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    vn = np.zeros_like(vertices)
    for k in range(3):
        np.add.at(vn, triangles[:, k], fn)
    n = np.linalg.norm(vn, axis=1, keepdims=True)
    return np.divide(vn, n, out=np.zeros_like(vn), where=n > 1e-300)


def shrink_vertices(vertices: np.ndarray, triangles: np.ndarray, offset: float) -> np.ndarray:
    """Move every vertex inward along its normal by ``offset``."""
    return vertices - offset * vertex_normals(vertices, triangles)


def _spot_indices(n: int, k: int) -> np.ndarray:
    if k <= 0 or n == 0:
        return np.zeros(0, dtype=np.int64)
    if n <= k:
        return np.arange(n)
    return np.linspace(0, n - 1, k).round().astype(np.int64)


class _Sweep:
    """Penetration checks of a shrunken moving part against a fixed one."""

    def __init__(self, fixed: Part, moving: Part, pen_tol: float, samples: int):
        self.fixed_bvh = fixed.world_bvh
        self.fixed_tris = fixed.world_mesh.triangle_coords()
        self.fixed_spots = fixed.world_vertices[_spot_indices(len(fixed.world_vertices), samples)]
        tris = moving.mesh.triangles
        self.moving_tris_idx = tris
        self.moving_verts = shrink_vertices(moving.world_vertices, tris, pen_tol)
        self.moving_spots = _spot_indices(len(self.moving_verts), samples)

    def penetrates(self, pose: RigidTransform) -> bool:
        verts = pose.apply(self.moving_verts)
        tris = verts[self.moving_tris_idx]
        if count_intersections(self.fixed_bvh, BVH.build(tris), limit=1) > 0:
            return True
        if np.any(winding_numbers(verts[self.moving_spots], self.fixed_tris) > 0.5):
            return True
        return bool(np.any(winding_numbers(self.fixed_spots, tris) > 0.5))


def sweep_feasibility(
    a: Part, b: Part, axis: AxisLine, config: ToleranceConfig = DEFAULT_CONFIG
) -> FeasibilityLabel:
    """Can ``b`` turn about / slide along ``axis`` without running into ``a``?

    ``b`` is shrunk by the penetration tolerance, then posed at each sampled
    rotation (both senses) and each sampled translation (both signs, as a
    fraction of the pair's bounding-box diagonal). Any properly crossing
    triangle pair or any spot-checked vertex inside the other solid blocks
    that motion.
    """
    diag = bbox_diagonal(a, b)
    sweep = _Sweep(a, b, config.penetration_tol_for(diag), config.containment_samples)
    blocked_rot = []
    for deg in config.sweep_angles_deg:
        for sgn in (1.0, -1.0):
            pose = RigidTransform.from_axis_angle(axis.direction, sgn * math.radians(deg), axis.point)
            if sweep.penetrates(pose):
                blocked_rot.append(sgn * deg)
    blocked_tr = []
    for frac in config.sweep_translation_fracs:
        for sgn in (1.0, -1.0):
            pose = RigidTransform.from_translation(sgn * frac * diag * axis.direction)
            if sweep.penetrates(pose):
                blocked_tr.append(sgn * frac)
    return FeasibilityLabel(
        (a.id, b.id), axis, not blocked_rot, not blocked_tr, tuple(blocked_rot), tuple(blocked_tr)
    )


__all__ = [
    "AxisAmbiguity",
    "CandidateAxisSet",
    "ContactReport",
    "FeasibilityLabel",
    "assembly_contact_tol",
    "axis_ambiguity",
    "axis_equivalent",
    "candidate_axes",
    "extract_axes",
    "min_distance",
    "shared_axes",
    "sort_lines",
    "sweep_feasibility",
]
