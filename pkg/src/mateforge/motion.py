"""Motion groups of the four mate types and their composition/intersection.

A group is the set of relative rigid motions a joint (or a chain of joints)
permits between two parts, expressed in world coordinates at the current
pose. Anything outside the four simple mate groups collapses to ``COMPLEX``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import reduce
from typing import Optional, Sequence

import networkx as nx
import numpy as np

from mateforge.config import DEFAULT_CONFIG, ToleranceConfig
from mateforge.lines import (
    AxisLine,
    canonical_direction,
    canonicalize_line,
    direction_angles,
    directions_parallel,
    separations,
    lines_coincident,
)
from mateforge.model import Assembly, Mate, MateType
from mateforge.transforms import RigidTransform, quat_multiply, quat_rotate, screw_decompose_batch


class GroupKind(str, enum.Enum):
    FIXED = "fixed"
    ROTATION = "rotation"
    TRANSLATION = "translation"
    CYLINDRICAL = "cylindrical"
    COMPLEX = "complex"


@dataclass(frozen=True, eq=False)
class MotionGroup:
    kind: GroupKind
    axis: Optional[AxisLine] = None
    direction: Optional[np.ndarray] = None

    def __post_init__(self):
        kind = GroupKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind in (GroupKind.ROTATION, GroupKind.CYLINDRICAL):
            if self.axis is None:
                raise ValueError(f"{kind.value} group needs an axis")
            object.__setattr__(self, "direction", self.axis.direction)
        elif kind is GroupKind.TRANSLATION:
            if self.direction is None:
                raise ValueError("translation group needs a direction")
            d = canonical_direction(self.direction)
            d.setflags(write=False)
            object.__setattr__(self, "direction", d)
            object.__setattr__(self, "axis", None)
        else:
            object.__setattr__(self, "axis", None)
            object.__setattr__(self, "direction", None)

    @classmethod
    def fixed(cls) -> "MotionGroup":
        return cls(GroupKind.FIXED)

    @classmethod
    def complex(cls) -> "MotionGroup":
        return cls(GroupKind.COMPLEX)

    @classmethod
    def rotation(cls, axis: AxisLine) -> "MotionGroup":
        return cls(GroupKind.ROTATION, axis=axis)

    @classmethod
    def translation(cls, direction) -> "MotionGroup":
        return cls(GroupKind.TRANSLATION, direction=direction)

    @classmethod
    def cylindrical(cls, axis: AxisLine) -> "MotionGroup":
        return cls(GroupKind.CYLINDRICAL, axis=axis)

    def same_as(self, other: "MotionGroup", tol: ToleranceConfig = DEFAULT_CONFIG) -> bool:
        """Geometric equality: same kind and coincident axis / parallel direction."""
        if self.kind is not other.kind:
            return False
        if self.axis is not None:
            return lines_coincident(self.axis, other.axis, tol)
        if self.direction is not None:
            return directions_parallel(self.direction, other.direction, tol)
        return True

    def to_dict(self) -> dict:
        d: dict = {"kind": self.kind.value}
        if self.axis is not None:
            d["axis"] = self.axis.to_dict()
        elif self.direction is not None:
            d["direction"] = [float(c) for c in self.direction]
        return d

    def __repr__(self) -> str:
        if self.axis is not None:
            return f"MotionGroup({self.kind.value}, {self.axis!r})"
        if self.direction is not None:
            return f"MotionGroup({self.kind.value}, direction={np.round(self.direction, 6).tolist()})"
        return f"MotionGroup({self.kind.value})"


G = GroupKind


def mate_to_group(m: Mate) -> MotionGroup:
    if m.mate_type is None:
        # spherical, planar, ... are not among the simple groups
        return MotionGroup.complex()
    if m.mate_type is MateType.FASTEN:
        return MotionGroup.fixed()
    if m.mate_type is MateType.REVOLUTE:
        return MotionGroup.rotation(m.axis)
    if m.mate_type is MateType.SLIDER:
        return MotionGroup.translation(m.axis.direction)
    return MotionGroup.cylindrical(m.axis)


_GROUP_TO_TYPE = {
    G.FIXED: MateType.FASTEN,
    G.ROTATION: MateType.REVOLUTE,
    G.TRANSLATION: MateType.SLIDER,
    G.CYLINDRICAL: MateType.CYLINDRICAL,
}


def group_to_mate_type(g: MotionGroup) -> Optional[MateType]:
    return _GROUP_TO_TYPE.get(g.kind)


def _parallel_to_axis(direction, axis: AxisLine, tol) -> bool:
    return directions_parallel(direction, axis.direction, tol)


def compose(g1: MotionGroup, g2: MotionGroup, tol: ToleranceConfig = DEFAULT_CONFIG) -> MotionGroup:
    """Smallest simple group containing every product of an element of g1 and one of g2.

    When the result carries an axis it is taken from ``g1`` if ``g1`` has
    one, else from ``g2``.
    """
    k1, k2 = g1.kind, g2.kind
    if k1 is G.FIXED:
        return g2
    if k2 is G.FIXED:
        return g1
    if G.COMPLEX in (k1, k2):
        return MotionGroup.complex()
    if k1 is k2:
        if k1 is G.TRANSLATION:
            return g1 if directions_parallel(g1.direction, g2.direction, tol) else MotionGroup.complex()
        return g1 if lines_coincident(g1.axis, g2.axis, tol) else MotionGroup.complex()
    kinds = {k1, k2}
    if kinds == {G.ROTATION, G.TRANSLATION}:
        rot, tr = (g1, g2) if k1 is G.ROTATION else (g2, g1)
        if _parallel_to_axis(tr.direction, rot.axis, tol):
            return MotionGroup.cylindrical(rot.axis)
        return MotionGroup.complex()
    if kinds == {G.CYLINDRICAL, G.ROTATION}:
        cyl, rot = (g1, g2) if k1 is G.CYLINDRICAL else (g2, g1)
        if lines_coincident(cyl.axis, rot.axis, tol):
            return MotionGroup.cylindrical(g1.axis)
        return MotionGroup.complex()
    # cylindrical with translation
    cyl, tr = (g1, g2) if k1 is G.CYLINDRICAL else (g2, g1)
    if _parallel_to_axis(tr.direction, cyl.axis, tol):
        return cyl
    return MotionGroup.complex()


def intersect(g1: MotionGroup, g2: MotionGroup, tol: ToleranceConfig = DEFAULT_CONFIG) -> MotionGroup:
    """Motions allowed by both groups (the combined constraint of two parallel paths)."""
    k1, k2 = g1.kind, g2.kind
    if k1 is G.COMPLEX:
        return g2
    if k2 is G.COMPLEX:
        return g1
    if G.FIXED in (k1, k2):
        return MotionGroup.fixed()
    if k1 is k2:
        if k1 is G.TRANSLATION:
            return g1 if directions_parallel(g1.direction, g2.direction, tol) else MotionGroup.fixed()
        if lines_coincident(g1.axis, g2.axis, tol):
            return g1
        if k1 is G.CYLINDRICAL and directions_parallel(g1.axis, g2.axis, tol):
            return MotionGroup.translation(g1.axis.direction)
        return MotionGroup.fixed()
    kinds = {k1, k2}
    if kinds == {G.ROTATION, G.TRANSLATION}:
        return MotionGroup.fixed()
    if kinds == {G.CYLINDRICAL, G.ROTATION}:
        cyl, rot = (g1, g2) if k1 is G.CYLINDRICAL else (g2, g1)
        return rot if lines_coincident(cyl.axis, rot.axis, tol) else MotionGroup.fixed()
    cyl, tr = (g1, g2) if k1 is G.CYLINDRICAL else (g2, g1)
    return tr if _parallel_to_axis(tr.direction, cyl.axis, tol) else MotionGroup.fixed()


class DisconnectedPartsError(ValueError):
    pass


def mate_graph(assembly: Assembly, tol: ToleranceConfig = DEFAULT_CONFIG) -> nx.Graph:
    """Simple graph over part ids; parallel mates on one pair are intersected."""
    g = nx.Graph()
    g.add_nodes_from(sorted(p.id for p in assembly.parts))
    for m in sorted(assembly.mates, key=lambda m: m.id):
        a, b = m.pair_key
        grp = mate_to_group(m)
        if g.has_edge(a, b):
            data = g.edges[a, b]
            data["group"] = intersect(data["group"], grp, tol)
            data["mate_id"] = min(data["mate_id"], m.id)
        else:
            g.add_edge(a, b, group=grp, mate_id=m.id)
    return g


def _path_mate_ids(g: nx.Graph, path: Sequence[str]) -> tuple:
    return tuple(g.edges[u, v]["mate_id"] for u, v in zip(path, path[1:]))


def _best_shortest_path(g: nx.Graph, a: str, b: str) -> list:
    paths = nx.all_shortest_paths(g, a, b)
    return min(paths, key=lambda p: _path_mate_ids(g, p))


def _compose_path(g: nx.Graph, path: Sequence[str], tol) -> MotionGroup:
    groups = [g.edges[u, v]["group"] for u, v in zip(path, path[1:])]
    return reduce(lambda x, y: compose(x, y, tol), groups, MotionGroup.fixed())


def _edge_set(path: Sequence[str]) -> set:
    return {frozenset(e) for e in zip(path, path[1:])}


def candidate_paths(g: nx.Graph, a: str, b: str) -> list:
    """Shortest path plus its detours through each fundamental cycle it shares an edge with."""
    if a not in g or b not in g or not nx.has_path(g, a, b):
        raise DisconnectedPartsError(f"parts {a} and {b} are not connected by mates")
    main = _best_shortest_path(g, a, b)
    paths = [main]
    main_edges = _edge_set(main)
    for cycle in nx.cycle_basis(g, root=min(g.nodes)):
        cyc_edges = {frozenset(e) for e in zip(cycle, cycle[1:] + cycle[:1])}
        if not (cyc_edges & main_edges):
            continue
        detour_edges = cyc_edges ^ main_edges
        sub = nx.Graph()
        sub.add_nodes_from(sorted({n for e in detour_edges for n in e}))
        for e in sorted(tuple(sorted(e)) for e in detour_edges):
            sub.add_edge(*e, **g.edges[e])
        if a in sub and b in sub and nx.has_path(sub, a, b):
            detour = _best_shortest_path(sub, a, b)
            if detour not in paths:
                paths.append(detour)
    return paths


def relative_motion(
    assembly: Assembly, part_a: str, part_b: str, tol: ToleranceConfig = DEFAULT_CONFIG
) -> MotionGroup:
    """Group of motions of ``part_b`` relative to ``part_a`` implied by the mates.

    Composes mate groups along the shortest mate chain; detours through the
    cycle basis are composed too and intersected with it.
    """
    if part_a == part_b:
        return MotionGroup.fixed()
    g = mate_graph(assembly, tol)
    result = None
    for path in candidate_paths(g, part_a, part_b):
        grp = _compose_path(g, path, tol)
        result = grp if result is None else intersect(result, grp, tol)
    return result


# --- transform-sample classification -------------------------------------------------


class TooFewSamplesError(ValueError):
    pass


MIN_SAMPLES = 8


def classify_transform_samples(samples, tol: ToleranceConfig = DEFAULT_CONFIG) -> MotionGroup:
    """Infer the motion group spanned by a set of sampled relative transforms."""
    samples = list(samples)
    if len(samples) < MIN_SAMPLES:
        raise TooFewSamplesError(f"need at least {MIN_SAMPLES} samples, got {len(samples)}")
    q = np.stack([s.rotation for s in samples])
    t = np.stack([s.translation for s in samples])
    return classify_arrays(q, t, tol)


def classify_arrays(q: np.ndarray, t: np.ndarray, tol: ToleranceConfig = DEFAULT_CONFIG) -> MotionGroup:
    """Array form of :func:`classify_transform_samples` (wxyz quaternions, translations)."""
    if len(q) < MIN_SAMPLES:
        raise TooFewSamplesError(f"need at least {MIN_SAMPLES} samples, got {len(q)}")
    angle, u, point, axial = screw_decompose_batch(q, t)
    rotating = angle > tol.angle_tol
    tnorm = np.linalg.norm(t, axis=1)
    sliding = (~rotating) & (tnorm > tol.dist_tol)

    slide_dirs = t[sliding] / tnorm[sliding, None]
    if not rotating.any():
        if not sliding.any():
            return MotionGroup.fixed()
        ref = slide_dirs[0]
        if all(directions_parallel(ref, d, tol) for d in slide_dirs[1:]):
            return MotionGroup.translation(ref)
        return MotionGroup.complex()

    idx = np.flatnonzero(rotating)
    ref = canonicalize_line(point[idx[0]], u[idx[0]])
    ang = direction_angles(u[idx], ref.direction)
    sep = separations(point[idx], u[idx], ref)
    if np.any(ang > tol.angle_tol) or np.any(sep > tol.dist_tol):
        return MotionGroup.complex()
    if len(slide_dirs) and np.any(direction_angles(slide_dirs, ref.direction) > tol.angle_tol):
        return MotionGroup.complex()
    if sliding.any() or np.any(np.abs(axial[idx]) > tol.dist_tol):
        return MotionGroup.cylindrical(ref)
    return MotionGroup.rotation(ref)


def member(t: RigidTransform, g: MotionGroup, tol: ToleranceConfig = DEFAULT_CONFIG) -> bool:
    """Whether transform ``t`` belongs to group ``g`` (within tolerance)."""
    return bool(member_arrays(t.rotation[None], t.translation[None], g, tol)[0])


def member_arrays(q, t, g: MotionGroup, tol: ToleranceConfig = DEFAULT_CONFIG) -> np.ndarray:
    n = len(q)
    if g.kind is G.COMPLEX:
        return np.ones(n, dtype=bool)
    angle, u, point, axial = screw_decompose_batch(q, t)
    rotating = angle > tol.angle_tol
    tnorm = np.linalg.norm(t, axis=1)
    ident = (~rotating) & (tnorm <= tol.dist_tol)
    if g.kind is G.FIXED:
        return ident
    out = ident.copy()
    if g.kind in (G.ROTATION, G.CYLINDRICAL):
        on_axis = (direction_angles(u, g.axis.direction) <= tol.angle_tol) & (
            separations(point, u, g.axis) <= tol.dist_tol
        )
        ok = on_axis if g.kind is G.CYLINDRICAL else on_axis & (np.abs(axial) <= tol.dist_tol)
        out |= rotating & ok
    if g.kind in (G.TRANSLATION, G.CYLINDRICAL):
        safe = np.where(tnorm > 0, tnorm, 1.0)
        par = direction_angles(t / safe[:, None], g.direction) <= tol.angle_tol
        out |= (~rotating) & (~ident) & par
    return out


# --- random group elements (oracle support) -----------------------------------------


def _excluded_uniform(rng, lo, hi, min_abs, size):
    out = rng.uniform(lo, hi, size)
    bad = np.abs(out) < min_abs
    while bad.any():
        out[bad] = rng.uniform(lo, hi, int(bad.sum()))
        bad = np.abs(out) < min_abs
    return out


def sample_group(
    g: MotionGroup,
    n: int,
    rng: np.random.Generator,
    tol: ToleranceConfig = DEFAULT_CONFIG,
    zero_prob: float = 0.0,
):
    """Draw ``n`` elements of ``g`` as (quaternions, translations) arrays.

    Angles lie in [-π/2, π/2] away from |θ| < 10·angle_tol; translations in
    [-10, 10] away from small magnitudes. With ``zero_prob`` > 0 each free
    parameter is independently set to exactly zero with that probability,
    which exposes the lower-dimensional subgroups.
    """
    theta = _excluded_uniform(rng, -np.pi / 2, np.pi / 2, 10 * tol.angle_tol, n)
    slide = _excluded_uniform(rng, -10.0, 10.0, max(0.5, 100 * tol.dist_tol), n)
    if zero_prob > 0:
        theta[rng.random(n) < zero_prob] = 0.0
        slide[rng.random(n) < zero_prob] = 0.0
    q = np.zeros((n, 4))
    q[:, 0] = 1.0
    t = np.zeros((n, 3))
    k = g.kind
    if k is G.FIXED:
        return q, t
    if k is G.COMPLEX:
        axes = rng.normal(size=(n, 3))
        axes /= np.linalg.norm(axes, axis=1, keepdims=True)
        q = np.concatenate([np.cos(theta / 2)[:, None], np.sin(theta / 2)[:, None] * axes], axis=1)
        t = rng.uniform(-10, 10, (n, 3))
        return q, t
    if k is G.TRANSLATION:
        return q, slide[:, None] * g.direction[None, :]
    d = g.axis.direction
    p = g.axis.point
    q = np.concatenate([np.cos(theta / 2)[:, None], np.sin(theta / 2)[:, None] * d[None, :]], axis=1)
    t = p[None, :] - quat_rotate(q, np.broadcast_to(p, (n, 3)))
    if k is G.CYLINDRICAL:
        t = t + slide[:, None] * d[None, :]
    return q, t


def compose_arrays(q1, t1, q2, t2):
    q = quat_multiply(q1, q2)
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    return q, quat_rotate(q1, t2) + t1


def oracle_compose(
    g1: MotionGroup,
    g2: MotionGroup,
    rng: np.random.Generator,
    tol: ToleranceConfig = DEFAULT_CONFIG,
    n: int = 50,
) -> MotionGroup:
    """Classify ``n`` random products of elements of g1 and g2."""
    q1, t1 = sample_group(g1, n, rng, tol)
    q2, t2 = sample_group(g2, n, rng, tol)
    q, t = compose_arrays(q1, t1, q2, t2)
    # a product whose angle lands in the ambiguous band near the angle
    # tolerance is redrawn; such samples say nothing about the group
    angle = screw_decompose_batch(q, t)[0]
    bad = (angle > 1e-9) & (angle < 10 * tol.angle_tol)
    while bad.any():
        m = int(bad.sum())
        a1, b1 = sample_group(g1, m, rng, tol)
        a2, b2 = sample_group(g2, m, rng, tol)
        q[bad], t[bad] = compose_arrays(a1, b1, a2, b2)
        angle = screw_decompose_batch(q, t)[0]
        bad = (angle > 1e-9) & (angle < 10 * tol.angle_tol)
    return classify_arrays(q, t, tol)


def oracle_intersect(
    g1: MotionGroup,
    g2: MotionGroup,
    rng: np.random.Generator,
    tol: ToleranceConfig = DEFAULT_CONFIG,
    n: int = 50,
) -> MotionGroup:
    """Classify the sampled elements of g1 ∪ g2 that belong to both groups."""
    qa, ta = sample_group(g1, n, rng, tol, zero_prob=0.3)
    qb, tb = sample_group(g2, n, rng, tol, zero_prob=0.3)
    q = np.concatenate([qa, qb])
    t = np.concatenate([ta, tb])
    keep = member_arrays(q, t, g1, tol) & member_arrays(q, t, g2, tol)
    q, t = q[keep], t[keep]
    # the identity lies in every group; pad so classification has enough samples
    pad = max(0, MIN_SAMPLES - len(q))
    if pad:
        q = np.concatenate([q, np.tile([1.0, 0, 0, 0], (pad, 1))])
        t = np.concatenate([t, np.zeros((pad, 3))])
    return classify_arrays(q, t, tol)


__all__ = [
    "DisconnectedPartsError",
    "GroupKind",
    "MotionGroup",
    "TooFewSamplesError",
    "classify_arrays",
    "classify_transform_samples",
    "compose",
    "group_to_mate_type",
    "intersect",
    "mate_graph",
    "mate_to_group",
    "member",
    "oracle_compose",
    "oracle_intersect",
    "relative_motion",
    "sample_group",
]
