"""Triangle-set distance and intersection queries.

The BVH search and the brute-force scan both evaluate triangle pairs with
the same compiled scalar kernel, so a pair yields the same float on either
path and the two minima agree bit-for-bit. The numpy functions below are a
batched second implementation of the same primitives, kept for
cross-checking the kernel.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from mateforge import _kernels

LEAF_SIZE = 8
_CHUNK = 40000


def _dot(a, b):
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def _cross(a, b):
    return np.stack(
        [
            a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
            a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
            a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
        ],
        axis=-1,
    )


def _norm(a):
    return np.sqrt(_dot(a, a))


def point_triangle_distance(p: np.ndarray, tri: np.ndarray) -> np.ndarray:
    """Distance from points (N, 3) to triangles (N, 3, 3), by Voronoi region."""
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    ab, ac, ap = b - a, c - a, p - a
    d1, d2 = _dot(ab, ap), _dot(ac, ap)
    bp = p - b
    d3, d4 = _dot(ab, bp), _dot(ac, bp)
    cp = p - c
    d5, d6 = _dot(ab, cp), _dot(ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    closest = np.empty_like(p)
    done = np.zeros(len(p), dtype=bool)

    def assign(mask, value):
        m = mask & ~done
        if m.any():
            closest[m] = value[m] if value.ndim == 2 else value
            done[m] = True

    assign((d1 <= 0) & (d2 <= 0), a)
    assign((d3 >= 0) & (d4 <= d3), b)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
        v = np.where(m, d1 / np.where(m, d1 - d3, 1.0), 0.0)
        assign(m, a + v[:, None] * ab)
        assign((d6 >= 0) & (d5 <= d6), c)
        m = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
        w = np.where(m, d2 / np.where(m, d2 - d6, 1.0), 0.0)
        assign(m, a + w[:, None] * ac)
        m = (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0)
        den = (d4 - d3) + (d5 - d6)
        w = np.where(m, (d4 - d3) / np.where(m, den, 1.0), 0.0)
        assign(m, b + w[:, None] * (c - b))
        denom = va + vb + vc
        inv = np.where(denom != 0, 1.0 / np.where(denom != 0, denom, 1.0), 0.0)
        v = vb * inv
        w = vc * inv
        assign(np.ones(len(p), dtype=bool), a + v[:, None] * ab + w[:, None] * ac)
    return _norm(p - closest)


def segment_segment_distance(p1, q1, p2, q2) -> np.ndarray:
    """Distance between segments [p1, q1] and [p2, q2], batched over N."""
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = _dot(d1, d1)
    e = _dot(d2, d2)
    f = _dot(d2, r)
    c = _dot(d1, r)
    b = _dot(d1, d2)
    denom = a * e - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 1e-30 * a * e, np.clip((b * f - c * e) / denom, 0.0, 1.0), 0.0)
        t = (b * s + f) / e
        lo = t < 0
        hi = t > 1
        t = np.clip(t, 0.0, 1.0)
        s = np.where(lo, np.clip(-c / a, 0.0, 1.0), s)
        s = np.where(hi, np.clip((b - c) / a, 0.0, 1.0), s)
        # segments that are points
        pa, pe = a <= 1e-300, e <= 1e-300
        s = np.where(pa, 0.0, np.where(pe, np.clip(-c / a, 0.0, 1.0), s))
        t = np.where(pe, 0.0, np.where(pa, np.clip(f / e, 0.0, 1.0), t))
    c1 = p1 + s[:, None] * d1
    c2 = p2 + t[:, None] * d2
    return _norm(c1 - c2)


def _orient(a, b, c, d):
    """Signed volume of tetrahedron (a, b, c, d) times 6."""
    return _dot(_cross(b - a, c - a), d - a)


def segment_crosses_triangle(p, q, tri) -> np.ndarray:
    """Strict crossing: p and q on opposite sides and the line passes strictly inside."""
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    sp = _orient(a, b, c, p)
    sq = _orient(a, b, c, q)
    opposite = sp * sq < 0
    e1 = _orient(p, q, a, b)
    e2 = _orient(p, q, b, c)
    e3 = _orient(p, q, c, a)
    inside = ((e1 > 0) & (e2 > 0) & (e3 > 0)) | ((e1 < 0) & (e2 < 0) & (e3 < 0))
    return opposite & inside


def _edges(tri):
    return [(tri[:, i], tri[:, (i + 1) % 3]) for i in range(3)]


def triangles_intersect(ta: np.ndarray, tb: np.ndarray) -> np.ndarray:
    """True where an edge of one triangle properly pierces the other."""
    hit = np.zeros(len(ta), dtype=bool)
    for p, q in _edges(ta):
        hit |= segment_crosses_triangle(p, q, tb)
    for p, q in _edges(tb):
        hit |= segment_crosses_triangle(p, q, ta)
    return hit


def triangle_distance(ta: np.ndarray, tb: np.ndarray) -> np.ndarray:
    """Minimum distance between paired triangles (N, 3, 3); 0 where they intersect."""
    d = np.full(len(ta), np.inf)
    for i in range(3):
        d = np.minimum(d, point_triangle_distance(ta[:, i], tb))
        d = np.minimum(d, point_triangle_distance(tb[:, i], ta))
    ea, eb = _edges(ta), _edges(tb)
    for p1, q1 in ea:
        for p2, q2 in eb:
            d = np.minimum(d, segment_segment_distance(p1, q1, p2, q2))
    return np.where(triangles_intersect(ta, tb), 0.0, d)


def _pairs(n_a: int, n_b: int):
    ia, ib = np.meshgrid(np.arange(n_a), np.arange(n_b), indexing="ij")
    return ia.ravel(), ib.ravel()


def brute_force_distance(tris_a: np.ndarray, tris_b: np.ndarray) -> float:
    """All-pairs minimum triangle distance; the reference the BVH must match."""
    tris_a = np.ascontiguousarray(tris_a, dtype=np.float64)
    tris_b = np.ascontiguousarray(tris_b, dtype=np.float64)
    if not len(tris_a) or not len(tris_b):
        raise ValueError("empty mesh")
    return float(_kernels.min_distance_all_pairs(tris_a, tris_b, np.inf))


def brute_force_distance_numpy(tris_a: np.ndarray, tris_b: np.ndarray) -> float:
    """Same scan as :func:`brute_force_distance` with the batched numpy primitives."""
    ia, ib = _pairs(len(tris_a), len(tris_b))
    best = np.inf
    for s in range(0, len(ia), _CHUNK):
        d = triangle_distance(tris_a[ia[s : s + _CHUNK]], tris_b[ib[s : s + _CHUNK]])
        best = min(best, float(d.min()))
    return best


@dataclass
class BVH:
    """Axis-aligned bounding-volume hierarchy over a triangle set (array layout)."""

    tris: np.ndarray
    order: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    left: np.ndarray
    right: np.ndarray
    start: np.ndarray
    stop: np.ndarray

    @classmethod
    def build(cls, tris: np.ndarray, leaf_size: int = LEAF_SIZE) -> "BVH":
        tris = np.asarray(tris, dtype=np.float64)
        tmin = tris.min(axis=1)
        tmax = tris.max(axis=1)
        cent = tris.mean(axis=1)
        order = np.arange(len(tris))
        lo, hi, left, right, start, stop = [], [], [], [], [], []

        def node(s: int, e: int) -> int:
            idx = order[s:e]
            k = len(lo)
            lo.append(tmin[idx].min(axis=0))
            hi.append(tmax[idx].max(axis=0))
            left.append(-1)
            right.append(-1)
            start.append(s)
            stop.append(e)
            if e - s > leaf_size:
                ext = cent[idx].max(axis=0) - cent[idx].min(axis=0)
                ax = int(np.argmax(ext))
                sorted_idx = idx[np.argsort(cent[idx, ax], kind="stable")]
                order[s:e] = sorted_idx
                mid = (s + e) // 2
                left[k] = node(s, mid)
                right[k] = node(mid, e)
            return k

        if len(tris):
            node(0, len(tris))
        return cls(
            tris=tris,
            order=order,
            lo=np.array(lo).reshape(-1, 3),
            hi=np.array(hi).reshape(-1, 3),
            left=np.array(left, dtype=np.int64),
            right=np.array(right, dtype=np.int64),
            start=np.array(start, dtype=np.int64),
            stop=np.array(stop, dtype=np.int64),
        )

    def __post_init__(self):
        self.leaves = {
            k: np.ascontiguousarray(self.tris[self.order[self.start[k] : self.stop[k]]])
            for k in range(len(self.left))
            if self.left[k] < 0
        }

    def is_leaf(self, k: int) -> bool:
        return self.left[k] < 0

    def leaf_triangles(self, k: int) -> np.ndarray:
        return self.leaves[k]

    def size(self, k: int) -> int:
        return int(self.stop[k] - self.start[k])


def _box_distance(lo1, hi1, lo2, hi2) -> float:
    gap = np.maximum(0.0, np.maximum(lo1 - hi2, lo2 - hi1))
    return float(np.sqrt(gap @ gap))


def _children(bvh: BVH, k: int):
    return (int(bvh.left[k]), int(bvh.right[k]))


def _split_pair(a: BVH, b: BVH, i: int, j: int):
    """Node pairs obtained by descending the larger non-leaf side."""
    if a.is_leaf(i) or (not b.is_leaf(j) and b.size(j) > a.size(i)):
        return [(i, c) for c in _children(b, j)]
    return [(c, j) for c in _children(a, i)]


def bvh_distance(a: BVH, b: BVH) -> float:
    """Best-first dual-tree search for the minimum triangle-pair distance."""
    if not len(a.tris) or not len(b.tris):
        raise ValueError("empty mesh")
    best = np.inf
    heap = [(_box_distance(a.lo[0], a.hi[0], b.lo[0], b.hi[0]), 0, 0)]
    while heap:
        lb, i, j = heapq.heappop(heap)
        if lb > best:
            break
        if a.is_leaf(i) and b.is_leaf(j):
            best = float(_kernels.min_distance_all_pairs(a.leaf_triangles(i), b.leaf_triangles(j), best))
            if best == 0.0:
                break
            continue
        for ci, cj in _split_pair(a, b, i, j):
            d = _box_distance(a.lo[ci], a.hi[ci], b.lo[cj], b.hi[cj])
            if d <= best:
                heapq.heappush(heap, (d, ci, cj))
    return best


def mesh_distance(tris_a: np.ndarray, tris_b: np.ndarray) -> float:
    return bvh_distance(BVH.build(tris_a), BVH.build(tris_b))


def count_intersections(a: BVH, b: BVH, limit: int | None = None) -> int:
    """Number of properly intersecting triangle pairs (stops early at ``limit``)."""
    if not len(a.tris) or not len(b.tris):
        return 0
    count = 0
    stack = [(0, 0)]
    while stack:
        i, j = stack.pop()
        if np.any(a.lo[i] > b.hi[j]) or np.any(b.lo[j] > a.hi[i]):
            continue
        if a.is_leaf(i) and b.is_leaf(j):
            remaining = 0 if limit is None else limit - count
            count += int(_kernels.count_crossings_all_pairs(a.leaf_triangles(i), b.leaf_triangles(j), remaining))
            if limit is not None and count >= limit:
                return count
            continue
        stack.extend(_split_pair(a, b, i, j))
    return count


def winding_numbers(points: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Generalized winding number of each point w.r.t. an oriented triangle set."""
    points = np.asarray(points, dtype=np.float64)
    out = np.zeros(len(points))
    if not len(tris) or not len(points):
        return out
    for s in range(0, len(points), 256):
        p = points[s : s + 256, None, :]
        a = tris[None, :, 0] - p
        b = tris[None, :, 1] - p
        c = tris[None, :, 2] - p
        la, lb, lc = _norm(a), _norm(b), _norm(c)
        num = _dot(a, _cross(b, c))
        den = la * lb * lc + _dot(a, b) * lc + _dot(b, c) * la + _dot(c, a) * lb
        out[s : s + 256] = np.arctan2(num, den).sum(axis=1) / (2 * np.pi)
    return out
