"""Assembly data model: meshes, analytic features, parts, mates."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from mateforge.lines import AxisLine, canonical_direction, canonicalize_line
from mateforge.transforms import RigidTransform


class MateType(str, enum.Enum):
    FASTEN = "fasten"
    REVOLUTE = "revolute"
    SLIDER = "slider"
    CYLINDRICAL = "cylindrical"

    @property
    def dof(self) -> int:
        return _DOF[self]

    @property
    def order(self) -> int:
        return MATE_TYPE_ORDER.index(self)


MATE_TYPE_ORDER = (MateType.FASTEN, MateType.REVOLUTE, MateType.SLIDER, MateType.CYLINDRICAL)
_DOF = {MateType.FASTEN: 0, MateType.REVOLUTE: 1, MateType.SLIDER: 1, MateType.CYLINDRICAL: 2}


def parse_mate_type(tag: str) -> Optional[MateType]:
    try:
        return MateType(tag.lower())
    except ValueError:
        return None


class Provenance(str, enum.Enum):
    ORIGINAL = "original"
    DENSIFIED = "densified"
    PREDICTED = "predicted"


class FeatureKind(str, enum.Enum):
    PLANAR_FACE = "planar_face"
    CYLINDRICAL_FACE = "cylindrical_face"


def _frozen(a, dtype=np.float64) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        v = _frozen(self.vertices).reshape(-1, 3)
        t = _frozen(self.triangles, dtype=np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(v)):
            raise ValueError("mesh vertices must be finite")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        if t.size:
            areas = triangle_areas(v[t])
            bad = np.flatnonzero(areas <= 1e-12)
            if bad.size:
                raise ValueError(f"degenerate triangle at index {int(bad[0])}")

    @property
    def is_empty(self) -> bool:
        return len(self.triangles) == 0

    def triangle_coords(self) -> np.ndarray:
        return self.vertices[self.triangles]

    def transformed(self, t: RigidTransform) -> "TriangleMesh":
        return TriangleMesh(t.apply(self.vertices), self.triangles)


def triangle_areas(tris: np.ndarray) -> np.ndarray:
    return 0.5 * np.linalg.norm(np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]), axis=1)


@dataclass(frozen=True, eq=False)
class Feature:
    """Analytic face data: a planar face (centroid + normal) or a cylinder.

    Cylinder extents are signed coordinates along ``axis`` measured from the
    axis' canonical foot point.
    """

    kind: FeatureKind
    centroid: Optional[np.ndarray] = None
    normal: Optional[np.ndarray] = None
    axis: Optional[AxisLine] = None
    radius: Optional[float] = None
    extent: Optional[tuple] = None

    def __post_init__(self):
        kind = FeatureKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is FeatureKind.PLANAR_FACE:
            if self.centroid is None or self.normal is None:
                raise ValueError("planar face needs centroid and normal")
            n = np.asarray(self.normal, dtype=np.float64)
            if abs(np.linalg.norm(n) - 1.0) > 1e-9:
                raise ValueError("planar face normal must be unit length")
            object.__setattr__(self, "centroid", _frozen(self.centroid))
            object.__setattr__(self, "normal", _frozen(n))
        else:
            if self.axis is None or self.radius is None or self.extent is None:
                raise ValueError("cylindrical face needs axis, radius and extent")
            if not self.radius > 0:
                raise ValueError("cylinder radius must be positive")
            lo, hi = (float(x) for x in self.extent)
            if not lo < hi:
                raise ValueError("cylinder extent must be nonempty")
            object.__setattr__(self, "radius", float(self.radius))
            object.__setattr__(self, "extent", (lo, hi))

    @classmethod
    def planar(cls, centroid, normal) -> "Feature":
        n = np.asarray(normal, dtype=np.float64)
        return cls(FeatureKind.PLANAR_FACE, centroid=centroid, normal=n / np.linalg.norm(n))

    @classmethod
    def cylinder(cls, point, direction, radius: float, start, end) -> "Feature":
        """Cylinder along the segment from ``start`` to ``end`` (points on the axis)."""
        axis = canonicalize_line(point, direction)
        a, b = sorted((axis.project(start), axis.project(end)))
        return cls(FeatureKind.CYLINDRICAL_FACE, axis=axis, radius=radius, extent=(a, b))

    def axis_line(self) -> AxisLine:
        if self.kind is FeatureKind.CYLINDRICAL_FACE:
            return self.axis
        return canonicalize_line(self.centroid, self.normal)

    def transformed(self, t: RigidTransform) -> "Feature":
        if self.kind is FeatureKind.PLANAR_FACE:
            return Feature(
                FeatureKind.PLANAR_FACE,
                centroid=t.apply(self.centroid),
                normal=t.apply_vector(self.normal),
            )
        ends = [self.axis.point + s * self.axis.direction for s in self.extent]
        world_axis = t.transform_line(self.axis)
        a, b = sorted(world_axis.project(t.apply(e)) for e in ends)
        return Feature(
            FeatureKind.CYLINDRICAL_FACE, axis=world_axis, radius=self.radius, extent=(a, b)
        )


@dataclass(frozen=True, eq=False)
class Part:
    id: str
    mesh: TriangleMesh
    features: tuple = ()
    placement: RigidTransform = field(default_factory=RigidTransform.identity)

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))

    @cached_property
    def world_vertices(self) -> np.ndarray:
        return self.placement.apply(self.mesh.vertices)

    @cached_property
    def world_mesh(self) -> TriangleMesh:
        return TriangleMesh(self.world_vertices, self.mesh.triangles)

    @cached_property
    def world_bvh(self):
        from mateforge.meshdist import BVH

        if self.mesh.is_empty:
            raise ValueError(f"part {self.id} has an empty mesh")
        return BVH.build(self.world_mesh.triangle_coords())

    @cached_property
    def world_features(self) -> tuple:
        return tuple(f.transformed(self.placement) for f in self.features)

    def with_placement(self, placement: RigidTransform) -> "Part":
        return Part(self.id, self.mesh, self.features, placement)


@dataclass(frozen=True, eq=False)
class Mate:
    """Connection between two parts.

    ``tag`` keeps the declared type string verbatim so that non-whitelisted
    types ("planar", "spherical", ...) survive loading; ``mate_type`` is None
    for those.
    """

    id: str
    part_a: str
    part_b: str
    mate_type: Optional[MateType]
    axis: AxisLine
    provenance: Provenance = Provenance.ORIGINAL
    tag: str = ""

    def __post_init__(self):
        if self.part_a == self.part_b:
            raise ValueError(f"mate {self.id} connects part {self.part_a} to itself")
        if self.mate_type is not None:
            object.__setattr__(self, "mate_type", MateType(self.mate_type))
        if not self.tag:
            if self.mate_type is None:
                raise ValueError("mate needs a type or a tag")
            object.__setattr__(self, "tag", self.mate_type.value)
        elif self.mate_type is None:
            object.__setattr__(self, "mate_type", parse_mate_type(self.tag))
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @property
    def pair(self) -> frozenset:
        return frozenset((self.part_a, self.part_b))

    @property
    def pair_key(self) -> tuple:
        return tuple(sorted((self.part_a, self.part_b)))


@dataclass(frozen=True, eq=False)
class Assembly:
    id: str
    parts: tuple
    mates: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "mates", tuple(self.mates))
        ids = [p.id for p in self.parts]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate part ids in assembly {self.id}")
        known = set(ids)
        for m in self.mates:
            for pid in (m.part_a, m.part_b):
                if pid not in known:
                    raise ValueError(f"mate {m.id} references unknown part {pid}")

    @cached_property
    def part_map(self) -> dict:
        return {p.id: p for p in self.parts}

    def part(self, part_id: str) -> Part:
        return self.part_map[part_id]

    def with_mates(self, mates) -> "Assembly":
        return Assembly(self.id, self.parts, tuple(mates), dict(self.metadata))

    def mated_pairs(self) -> set:
        return {m.pair_key for m in self.mates}

    def bounding_box(self) -> tuple:
        pts = [p.world_vertices for p in self.parts if len(p.mesh.vertices)]
        if not pts:
            return np.zeros(3), np.zeros(3)
        allp = np.concatenate(pts)
        return allp.min(axis=0), allp.max(axis=0)

    def diagonal(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    def transformed(self, t: RigidTransform) -> "Assembly":
        """Whole assembly moved rigidly: placements and mate axes."""
        parts = [p.with_placement(t.compose(p.placement)) for p in self.parts]
        mates = [
            Mate(m.id, m.part_a, m.part_b, m.mate_type, t.transform_line(m.axis), m.provenance, m.tag)
            for m in self.mates
        ]
        return Assembly(self.id, parts, mates, dict(self.metadata))


def bbox_diagonal(*parts: Part) -> float:
    pts = np.concatenate([p.world_vertices for p in parts])
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))


__all__ = [
    "Assembly",
    "Feature",
    "FeatureKind",
    "MATE_TYPE_ORDER",
    "Mate",
    "MateType",
    "Part",
    "Provenance",
    "TriangleMesh",
    "bbox_diagonal",
    "canonical_direction",
    "parse_mate_type",
]
