"""Synthetic assemblies with known mates and known pipeline verdicts.

Each fixture mirrors one joint archetype (shaft in hole, flanged hinge pin,
keyed slider, press fit, telescope yoke) or plants exactly one defect that a
pipeline stage must catch. Round holes are tessellated so that the hole's
inscribed circle equals the shaft's circumscribed circle: the parts touch at
rest and only the shrunken moving mesh has room to turn.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from mateforge.lines import canonicalize_line
from mateforge.model import Assembly, Feature, Mate, MateType, Part, TriangleMesh
from mateforge.transforms import RigidTransform

SEGMENTS = 48

FIXTURE_NAMES = (
    "telescope",
    "hinge_flanged",
    "shaft_hole",
    "keyed_slider",
    "press_fit",
    "floating_pair",
    "compound_pair",
    "disconnected",
    "planar_tagged",
    "skew_loop",
)

# stage at which the pipeline rejects each fixture (None = kept)
EXPECTED_VERDICTS = {
    "telescope": None,
    "hinge_flanged": None,
    "shaft_hole": None,
    "keyed_slider": None,
    "press_fit": "moving_part",
    "floating_pair": "geometric_consistency",
    "compound_pair": "compound_mate",
    "disconnected": "connectivity",
    "planar_tagged": "type_whitelist",
    "skew_loop": "densify_complex",
}

EXPECTED_TYPES = {
    "shaft_hole": MateType.CYLINDRICAL,
    "hinge_flanged": MateType.REVOLUTE,
    "keyed_slider": MateType.SLIDER,
    "press_fit": MateType.FASTEN,
}


class UnknownFixtureError(KeyError):
    pass


# --- mesh builders --------------------------------------------------------------------


def merge_meshes(*meshes) -> TriangleMesh:
    verts, tris, off = [], [], 0
    for v, t in meshes:
        verts.append(np.asarray(v, dtype=np.float64))
        tris.append(np.asarray(t, dtype=np.int64) + off)
        off += len(v)
    return TriangleMesh(np.concatenate(verts), np.concatenate(tris))


def box(lo, hi, inward: bool = False):
    """Closed box as (vertices, triangles), outward-facing unless ``inward``."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    v = np.array([[(hi if (i >> k) & 1 else lo)[k] for k in range(3)] for i in range(8)])
    quads = [
        (0, 2, 3, 1),  # z lo
        (4, 5, 7, 6),  # z hi
        (0, 1, 5, 4),  # y lo
        (2, 6, 7, 3),  # y hi
        (0, 4, 6, 2),  # x lo
        (1, 3, 7, 5),  # x hi
    ]
    t = []
    for a, b, c, d in quads:
        t += [(a, b, c), (a, c, d)]
    t = np.array(t)
    if inward:
        t = t[:, ::-1]
    return v, t


def _ring(radius: float, z: float, n: int, phase: float) -> np.ndarray:
    th = phase + 2 * np.pi * np.arange(n) / n
    return np.stack([radius * np.cos(th), radius * np.sin(th), np.full(n, z)], axis=1)


def cylinder(radius: float, z0: float, z1: float, n: int = SEGMENTS, phase: float = 0.0):
    """Closed prism approximating a z-aligned cylinder (vertices on the circle)."""
    bot = _ring(radius, z0, n, phase)
    top = _ring(radius, z1, n, phase)
    v = np.concatenate([bot, top, [[0, 0, z0], [0, 0, z1]]])
    cb, ct = 2 * n, 2 * n + 1
    t = []
    for i in range(n):
        j = (i + 1) % n
        t += [(i, j, n + j), (i, n + j, n + i)]
        t += [(cb, j, i), (ct, n + i, n + j)]
    return v, np.array(t)


def _square_ring(half: float, z: float, n: int, phase: float) -> np.ndarray:
    """Points where rays at the ring angles meet the square |x|, |y| = half."""
    th = phase + 2 * np.pi * np.arange(n) / n
    c, s = np.cos(th), np.sin(th)
    r = half / np.maximum(np.abs(c), np.abs(s))
    return np.stack([r * c, r * s, np.full(n, z)], axis=1)


def block_with_hole(half: float, z0: float, z1: float, hole_radius: float, n: int = SEGMENTS):
    """Square block with a z-aligned through hole; ``n`` must be a multiple of 4.

    Ring vertices sit at angles π/4 + 2πk/n so that the outer ring hits the
    square's corners and traces its boundary exactly.
    """
    if n % 4:
        raise ValueError("segment count must be a multiple of 4")
    phase = np.pi / 4
    ib = _ring(hole_radius, z0, n, phase)
    it = _ring(hole_radius, z1, n, phase)
    ob = _square_ring(half, z0, n, phase)
    ot = _square_ring(half, z1, n, phase)
    v = np.concatenate([ib, it, ob, ot])
    IB, IT, OB, OT = 0, n, 2 * n, 3 * n
    t = []
    for i in range(n):
        j = (i + 1) % n
        t += [(IT + i, OT + j, IT + j), (IT + i, OT + i, OT + j)]  # top, +z
        t += [(IB + i, IB + j, OB + j), (IB + i, OB + j, OB + i)]  # bottom, -z
        t += [(OB + i, OB + j, OT + j), (OB + i, OT + j, OT + i)]  # outer wall
        t += [(IB + i, IT + j, IB + j), (IB + i, IT + i, IT + j)]  # hole wall, faces the axis
    return v, np.asarray(t)


def signed_volume(mesh: TriangleMesh) -> float:
    tris = mesh.triangle_coords()
    return float(np.einsum("ij,ij->i", tris[:, 0], np.cross(tris[:, 1], tris[:, 2])).sum() / 6.0)


def box_faces(lo, hi) -> list:
    """Planar-face features (centroid + outward normal) of an axis-aligned box."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    c = 0.5 * (lo + hi)
    out = []
    for k in range(3):
        for val, sgn in ((lo[k], -1.0), (hi[k], 1.0)):
            cen = c.copy()
            cen[k] = val
            n = np.zeros(3)
            n[k] = sgn
            out.append(Feature.planar(cen, n))
    return out


def _z_cylinder(radius, z0, z1, x=0.0, y=0.0) -> Feature:
    return Feature.cylinder([x, y, 0.0], [0, 0, 1], radius, [x, y, z0], [x, y, z1])


def _line(point, direction):
    return canonicalize_line(point, direction)


def _box_part(pid, lo, hi, extra=(), placement=None) -> Part:
    return Part(
        pid,
        merge_meshes(box(lo, hi)),
        box_faces(lo, hi) + list(extra),
        placement or RigidTransform.identity(),
    )


# --- joint archetypes -----------------------------------------------------------------


def _housing(n: int, shaft_radius: float) -> Part:
    hole = shaft_radius / math.cos(math.pi / n)
    feats = [
        _z_cylinder(hole, -1.0, 1.0),
        Feature.planar([0, 0, 1], [0, 0, 1]),
        Feature.planar([0, 0, -1], [0, 0, -1]),
    ] + [f for f in box_faces([-2, -2, -1], [2, 2, 1]) if abs(f.normal[2]) < 0.5]
    return Part("housing", merge_meshes(block_with_hole(2.0, -1.0, 1.0, hole, n)), feats)


def shaft_hole(n: int = SEGMENTS) -> Assembly:
    r = 1.0
    shaft = Part(
        "shaft",
        merge_meshes(cylinder(r, -3.0, 3.0, n, math.pi / 4 + math.pi / n)),
        [
            _z_cylinder(r, -3.0, 3.0),
            Feature.planar([0, 0, 3], [0, 0, 1]),
            Feature.planar([0, 0, -3], [0, 0, -1]),
        ],
    )
    mate = Mate("m_shaft", "housing", "shaft", MateType.CYLINDRICAL, _line([0, 0, 0], [0, 0, 1]))
    return Assembly("shaft_hole", [_housing(n, r), shaft], [mate])


def hinge_flanged(n: int = SEGMENTS) -> Assembly:
    r, rf, f = 1.0, 1.6, 0.4
    phase = math.pi / 4 + math.pi / n
    pin = Part(
        "pin",
        merge_meshes(
            cylinder(r, -1.0, 1.0, n, phase),
            cylinder(rf, 1.0, 1.0 + f, n, phase),
            cylinder(rf, -1.0 - f, -1.0, n, phase),
        ),
        [
            _z_cylinder(r, -1.0, 1.0),
            _z_cylinder(rf, 1.0, 1.0 + f),
            _z_cylinder(rf, -1.0 - f, -1.0),
            Feature.planar([0, 0, 1 + f], [0, 0, 1]),
            Feature.planar([0, 0, -1 - f], [0, 0, -1]),
            Feature.planar([0, 0, 1], [0, 0, -1]),
            Feature.planar([0, 0, -1], [0, 0, 1]),
        ],
    )
    mate = Mate("m_hinge", "housing", "pin", MateType.REVOLUTE, _line([0, 0, 0], [0, 0, 1]))
    return Assembly("hinge_flanged", [_housing(n, r), pin], [mate])


def keyed_slider() -> Assembly:
    """Square key bar running through a square slot: slides, cannot turn."""
    slabs = [
        box([-1, -1.5, 0.5], [1, 1.5, 1.5]),
        box([-1, -1.5, -1.5], [1, 1.5, -0.5]),
        box([-1, -1.5, -0.5], [1, -0.5, 0.5]),
        box([-1, 0.5, -0.5], [1, 1.5, 0.5]),
    ]
    inner = [
        Feature.planar([0, 0, 0.5], [0, 0, -1]),
        Feature.planar([0, 0, -0.5], [0, 0, 1]),
        Feature.planar([0, 0.5, 0], [0, -1, 0]),
        Feature.planar([0, -0.5, 0], [0, 1, 0]),
    ]
    sleeve = Part("sleeve", merge_meshes(*slabs), box_faces([-1, -1.5, -1.5], [1, 1.5, 1.5]) + inner)
    bar = _box_part("key_bar", [-3, -0.5, -0.5], [3, 0.5, 0.5])
    mate = Mate("m_key", "sleeve", "key_bar", MateType.SLIDER, _line([0, 0, 0], [1, 0, 0]))
    return Assembly("keyed_slider", [sleeve, bar], [mate])


def press_fit() -> Assembly:
    """Cube sealed inside a matching cavity: no motion at all."""
    shell = Part(
        "shell",
        merge_meshes(box([-1.5] * 3, [1.5] * 3), box([-0.5] * 3, [0.5] * 3, inward=True)),
        box_faces([-1.5] * 3, [1.5] * 3)
        + [Feature.planar(f.centroid, -f.normal) for f in box_faces([-0.5] * 3, [0.5] * 3)],
    )
    core = _box_part("core", [-0.5] * 3, [0.5] * 3)
    mate = Mate("m_fit", "shell", "core", MateType.FASTEN, _line([0, 0, 0], [0, 0, 1]))
    return Assembly("press_fit", [shell, core], [mate])


def telescope() -> Assembly:
    """Tube hinged in a yoke: revolute to one bracket, touching the other coaxially.

    Only one side carries a mate; the opposite bracket touches the tube on
    the same axis, so densification must add the mirror revolute.
    """
    za = 1.5
    bolt = lambda x, z0, z1: _z_cylinder(0.2, z0, z1, x=x)  # noqa: E731
    base = _box_part("base", [-3, -1, -0.5], [3, 1, 0], [bolt(-2.5, -0.5, 0), bolt(2.5, -0.5, 0)])

    def bracket(pid, x0, x1):
        xc = 0.5 * (x0 + x1)
        bore = Feature.cylinder([0, 0, za], [1, 0, 0], 0.3, [x0, 0, za], [x1, 0, za])
        return _box_part(pid, [x0, -1, 0], [x1, 1, 3], [bolt(xc, 0, 3), bore])

    # tube modelled along local z, placed along world x at the axle height
    to_x = RigidTransform(RigidTransform.from_axis_angle([0, 1, 0], math.pi / 2).rotation, [0, 0, za])
    tube = Part(
        "tube",
        merge_meshes(cylinder(0.8, -2.0, 2.0, SEGMENTS)),
        [
            _z_cylinder(0.8, -2.0, 2.0),
            Feature.planar([0, 0, 2], [0, 0, 1]),
            Feature.planar([0, 0, -2], [0, 0, -1]),
        ],
        to_x,
    )
    axle = _line([0, 0, za], [1, 0, 0])
    mates = [
        Mate("m1", "base", "bracket_l", MateType.FASTEN, _line([-2.5, 0, 0], [0, 0, 1])),
        Mate("m2", "base", "bracket_r", MateType.FASTEN, _line([2.5, 0, 0], [0, 0, 1])),
        Mate("m3", "bracket_l", "tube", MateType.REVOLUTE, axle),
    ]
    return Assembly(
        "telescope", [base, bracket("bracket_l", -3, -2), bracket("bracket_r", 2, 3), tube], mates
    )


# --- planted defects ------------------------------------------------------------------


def _stacked_pair(aid, gap: float, mates_spec) -> Assembly:
    a = _box_part("lower", [-1, -1, 0], [1, 1, 1])
    b = _box_part("upper", [-1, -1, 1 + gap], [1, 1, 2 + gap])
    z = _line([0, 0, 0], [0, 0, 1])
    mates = [Mate(mid, "lower", "upper", None, z, tag=tag) for mid, tag in mates_spec]
    return Assembly(aid, [a, b], mates)


def floating_pair() -> Assembly:
    return _stacked_pair("floating_pair", 0.5, [("m_float", "revolute")])


def compound_pair() -> Assembly:
    return _stacked_pair("compound_pair", 0.0, [("m_rev", "revolute"), ("m_slide", "slider")])


def planar_tagged() -> Assembly:
    return _stacked_pair("planar_tagged", 0.0, [("m_planar", "planar")])


def disconnected() -> Assembly:
    asm = _stacked_pair("disconnected", 0.0, [("m_rev", "revolute")])
    stray = _box_part("stray", [5, -1, 0], [7, 1, 1])
    return Assembly("disconnected", list(asm.parts) + [stray], asm.mates)


def skew_loop() -> Assembly:
    """Three cubes whose closing pair touches but inherits two skew revolutes."""
    a = _box_part("a", [-1, -1, -1], [1, 1, 1])
    pin = lambda: Feature.cylinder([1, 1, 0], [0, 0, 1], 0.1, [1, 1, -1], [1, 1, 1])  # noqa: E731
    b = _box_part("b", [1, -1, -1], [3, 1, 1], [pin()])
    c = _box_part("c", [-1, 1, -1], [1, 3, 1], [pin()])
    mates = [
        Mate("m_ab", "a", "b", MateType.REVOLUTE, _line([0, 0, 0], [1, 0, 0])),
        Mate("m_bc", "b", "c", MateType.REVOLUTE, _line([1, 1, 0], [0, 0, 1])),
    ]
    return Assembly("skew_loop", [a, b, c], mates)


_BUILDERS = {
    "telescope": telescope,
    "hinge_flanged": hinge_flanged,
    "shaft_hole": shaft_hole,
    "keyed_slider": keyed_slider,
    "press_fit": press_fit,
    "floating_pair": floating_pair,
    "compound_pair": compound_pair,
    "disconnected": disconnected,
    "planar_tagged": planar_tagged,
    "skew_loop": skew_loop,
}


def random_rigid_transform(rng: np.random.Generator, max_translation: float = 10.0) -> RigidTransform:
    q = rng.normal(size=4)
    return RigidTransform(q / np.linalg.norm(q), rng.uniform(-max_translation, max_translation, 3))


def generate_fixture(name: str, params: Optional[dict] = None, seed: Optional[int] = None) -> Assembly:
    """Build a named fixture.

    ``params`` may set ``segments`` for the round archetypes. A ``seed``
    moves the whole assembly by a seeded random rigid transform; without one
    the canonical pose is returned.
    """
    if name not in _BUILDERS:
        raise UnknownFixtureError(name)
    params = dict(params or {})
    kwargs = {}
    if "segments" in params and name in ("shaft_hole", "hinge_flanged"):
        kwargs["n"] = int(params.pop("segments"))
    if params:
        raise ValueError(f"fixture {name} does not take parameters {sorted(params)}")
    asm = _BUILDERS[name](**kwargs)
    if seed is not None:
        asm = asm.transformed(random_rigid_transform(np.random.default_rng(seed)))
    meta = {"fixture": name, "expected_verdict": EXPECTED_VERDICTS[name] or "kept"}
    if name in EXPECTED_TYPES:
        meta["expected_type"] = EXPECTED_TYPES[name].value
    if name == "telescope":
        meta["expected_densified"] = 1
    return Assembly(asm.id, asm.parts, asm.mates, meta)


def all_fixtures(seed: Optional[int] = None) -> list:
    return [generate_fixture(n, seed=seed) for n in FIXTURE_NAMES]
