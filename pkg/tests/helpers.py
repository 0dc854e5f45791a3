"""Shared generators and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from mateforge.lines import canonicalize_line
from mateforge.motion import GroupKind, MotionGroup

KINDS = tuple(GroupKind)


def unit(rng, avoid=None, min_angle=0.2):
    """Random unit vector, optionally at least ``min_angle`` away from ±``avoid``."""
    while True:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        if avoid is None:
            return v
        c = abs(float(v @ avoid))
        if np.arccos(min(1.0, c)) > min_angle:
            return v


def perpendicular(rng, d):
    v = np.cross(d, unit(rng, d))
    return v / np.linalg.norm(v)


def related_line(rng, base, relation):
    """A line standing in a given relation to ``base``.

    relation: coincident | parallel | intersecting | skew
    """
    p, d = base.point, base.direction
    if relation == "coincident":
        sign = rng.choice([-1.0, 1.0])
        return canonicalize_line(p + rng.uniform(-5, 5) * d, sign * d)
    if relation == "parallel":
        off = perpendicular(rng, d) * rng.uniform(0.5, 3.0)
        return canonicalize_line(p + off, d)
    d2 = unit(rng, d)
    if relation == "intersecting":
        return canonicalize_line(p + rng.uniform(-3, 3) * d, d2)
    n = np.cross(d, d2)
    n /= np.linalg.norm(n)
    return canonicalize_line(p + rng.uniform(0.5, 3.0) * n, d2)


RELATIONS = ("coincident", "parallel", "intersecting", "skew")


def make_group(kind, line):
    if kind is GroupKind.FIXED:
        return MotionGroup.fixed()
    if kind is GroupKind.COMPLEX:
        return MotionGroup.complex()
    if kind is GroupKind.TRANSLATION:
        return MotionGroup.translation(line.direction)
    if kind is GroupKind.ROTATION:
        return MotionGroup.rotation(line)
    return MotionGroup.cylindrical(line)


def random_group_pair(rng):
    """Two groups whose axes stand in a random (often special) relation."""
    k1, k2 = rng.choice(len(KINDS), 2)
    base = canonicalize_line(rng.uniform(-5, 5, 3), unit(rng))
    other = related_line(rng, base, RELATIONS[rng.integers(len(RELATIONS))])
    return make_group(KINDS[k1], base), make_group(KINDS[k2], other)


def qp_triangle_distance(ta, tb):
    """Distance between two triangles by barycentric QP (independent of the kernels)."""
    ta, tb = np.asarray(ta, float), np.asarray(tb, float)

    def pts(x):
        a = np.array([x[0], x[1], 1 - x[0] - x[1]]) @ ta
        b = np.array([x[2], x[3], 1 - x[2] - x[3]]) @ tb
        return a, b

    def f(x):
        a, b = pts(x)
        r = a - b
        return r @ r

    def grad(x):
        a, b = pts(x)
        r = 2 * (a - b)
        ea = [ta[0] - ta[2], ta[1] - ta[2]]
        eb = [tb[0] - tb[2], tb[1] - tb[2]]
        return np.array([r @ ea[0], r @ ea[1], -(r @ eb[0]), -(r @ eb[1])])

    cons = [
        {"type": "ineq", "fun": lambda x: 1 - x[0] - x[1], "jac": lambda x: np.array([-1.0, -1, 0, 0])},
        {"type": "ineq", "fun": lambda x: 1 - x[2] - x[3], "jac": lambda x: np.array([0, 0, -1.0, -1])},
    ]
    best = np.inf
    for x0 in ([1 / 3] * 4, [1, 0, 1, 0], [0, 1, 0, 1], [0, 0, 0, 0], [0.5, 0.5, 0.5, 0]):
        res = minimize(f, x0, jac=grad, bounds=[(0, 1)] * 4, constraints=cons, method="SLSQP",
                       options={"ftol": 1e-16, "maxiter": 500})
        best = min(best, float(np.sqrt(max(res.fun, 0.0))))
    return best


def random_soup(rng, n, center=(0, 0, 0), scale=1.0, size=0.3):
    """``n`` random non-degenerate triangles around ``center``."""
    c = rng.uniform(-scale, scale, (n, 1, 3)) + np.asarray(center, float)
    tris = c + rng.normal(scale=size, size=(n, 3, 3))
    return tris


def random_mesh_pair(rng, max_tris=500):
    na, nb = rng.integers(1, max_tris + 1, 2)
    a = random_soup(rng, na)
    gap = rng.choice([0.0, 0.5, 2.0, 4.0])
    b = random_soup(rng, nb, center=unit(rng) * gap)
    return a, b
