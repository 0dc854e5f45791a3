"""Compiled scalar triangle-pair kernels (numba)."""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _sub(a, b):
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


@njit(cache=True)
def _dot(a, b):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


@njit(cache=True)
def _cross(a, b):
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


@njit(cache=True)
def _dist(a, b):
    d = _sub(a, b)
    return math.sqrt(_dot(d, d))


@njit(cache=True)
def _lerp(a, d, s):
    return (a[0] + s * d[0], a[1] + s * d[1], a[2] + s * d[2])


@njit(cache=True)
def point_triangle(p, a, b, c):
    ab = _sub(b, a)
    ac = _sub(c, a)
    ap = _sub(p, a)
    d1 = _dot(ab, ap)
    d2 = _dot(ac, ap)
    if d1 <= 0.0 and d2 <= 0.0:
        return _dist(p, a)
    bp = _sub(p, b)
    d3 = _dot(ab, bp)
    d4 = _dot(ac, bp)
    if d3 >= 0.0 and d4 <= d3:
        return _dist(p, b)
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        return _dist(p, _lerp(a, ab, d1 / (d1 - d3)))
    cp = _sub(p, c)
    d5 = _dot(ab, cp)
    d6 = _dot(ac, cp)
    if d6 >= 0.0 and d5 <= d6:
        return _dist(p, c)
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        return _dist(p, _lerp(a, ac, d2 / (d2 - d6)))
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        return _dist(p, _lerp(b, _sub(c, b), (d4 - d3) / ((d4 - d3) + (d5 - d6))))
    inv = 1.0 / (va + vb + vc)
    v = vb * inv
    w = vc * inv
    q = (a[0] + v * ab[0] + w * ac[0], a[1] + v * ab[1] + w * ac[1], a[2] + v * ab[2] + w * ac[2])
    return _dist(p, q)


@njit(cache=True)
def _clamp01(x):
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


@njit(cache=True)
def segment_segment(p1, q1, p2, q2):
    d1 = _sub(q1, p1)
    d2 = _sub(q2, p2)
    r = _sub(p1, p2)
    a = _dot(d1, d1)
    e = _dot(d2, d2)
    f = _dot(d2, r)
    c = _dot(d1, r)
    b = _dot(d1, d2)
    if a <= 1e-300 or e <= 1e-300:
        # at least one segment is a point
        if a <= 1e-300 and e <= 1e-300:
            return _dist(p1, p2)
        if a <= 1e-300:
            return _dist(p1, _lerp(p2, d2, _clamp01(f / e)))
        return _dist(_lerp(p1, d1, _clamp01(-c / a)), p2)
    denom = a * e - b * b
    s = 0.0
    if denom > 1e-30 * a * e:
        s = _clamp01((b * f - c * e) / denom)
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = _clamp01(-c / a)
    elif t > 1.0:
        t = 1.0
        s = _clamp01((b - c) / a)
    return _dist(_lerp(p1, d1, s), _lerp(p2, d2, t))


@njit(cache=True)
def _orient(a, b, c, d):
    return _dot(_cross(_sub(b, a), _sub(c, a)), _sub(d, a))


@njit(cache=True)
def segment_crosses(p, q, a, b, c):
    sp = _orient(a, b, c, p)
    sq = _orient(a, b, c, q)
    if not sp * sq < 0.0:
        return False
    e1 = _orient(p, q, a, b)
    e2 = _orient(p, q, b, c)
    e3 = _orient(p, q, c, a)
    return (e1 > 0.0 and e2 > 0.0 and e3 > 0.0) or (e1 < 0.0 and e2 < 0.0 and e3 < 0.0)


@njit(cache=True)
def _v(t, i):
    return (t[i, 0], t[i, 1], t[i, 2])


@njit(cache=True)
def tri_tri_intersect(ta, tb):
    for i in range(3):
        p = _v(ta, i)
        q = _v(ta, (i + 1) % 3)
        if segment_crosses(p, q, _v(tb, 0), _v(tb, 1), _v(tb, 2)):
            return True
        p = _v(tb, i)
        q = _v(tb, (i + 1) % 3)
        if segment_crosses(p, q, _v(ta, 0), _v(ta, 1), _v(ta, 2)):
            return True
    return False


@njit(cache=True)
def tri_tri_distance(ta, tb):
    if tri_tri_intersect(ta, tb):
        return 0.0
    a0, a1, a2 = _v(ta, 0), _v(ta, 1), _v(ta, 2)
    b0, b1, b2 = _v(tb, 0), _v(tb, 1), _v(tb, 2)
    d = point_triangle(a0, b0, b1, b2)
    d = min(d, point_triangle(a1, b0, b1, b2))
    d = min(d, point_triangle(a2, b0, b1, b2))
    d = min(d, point_triangle(b0, a0, a1, a2))
    d = min(d, point_triangle(b1, a0, a1, a2))
    d = min(d, point_triangle(b2, a0, a1, a2))
    for i in range(3):
        p1 = _v(ta, i)
        q1 = _v(ta, (i + 1) % 3)
        for j in range(3):
            d = min(d, segment_segment(p1, q1, _v(tb, j), _v(tb, (j + 1) % 3)))
    return d


@njit(cache=True)
def min_distance_all_pairs(tris_a, tris_b, bound):
    """Minimum over every (i, j) pair; stops at 0."""
    best = bound
    for i in range(tris_a.shape[0]):
        for j in range(tris_b.shape[0]):
            d = tri_tri_distance(tris_a[i], tris_b[j])
            if d < best:
                best = d
                if best == 0.0:
                    return best
    return best


@njit(cache=True)
def count_crossings_all_pairs(tris_a, tris_b, limit):
    n = 0
    for i in range(tris_a.shape[0]):
        for j in range(tris_b.shape[0]):
            if tri_tri_intersect(tris_a[i], tris_b[j]):
                n += 1
                if limit > 0 and n >= limit:
                    return n
    return n


@njit(cache=True)
def paired_distances(tris_a, tris_b):
    out = np.empty(tris_a.shape[0])
    for k in range(tris_a.shape[0]):
        out[k] = tri_tri_distance(tris_a[k], tris_b[k])
    return out
