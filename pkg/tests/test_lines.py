import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mateforge.config import ToleranceConfig
from mateforge.lines import (
    AxisLine,
    canonical_direction,
    canonicalize_line,
    dedup_lines,
    direction_angle,
    direction_angles,
    directions_parallel,
    line_separation,
    lines_coincident,
    separations,
    sort_lines,
)

coord = st.floats(-100, 100, allow_nan=False)
vec = st.tuples(coord, coord, coord)
nonzero = vec.filter(lambda v: math.sqrt(sum(c * c for c in v)) > 1e-3)


@given(vec, nonzero)
def test_canonicalize_is_bitwise_idempotent(p, d):
    a = canonicalize_line(p, d)
    b = canonicalize_line(a.point, a.direction)
    assert a.point.tobytes() == b.point.tobytes()
    assert a.direction.tobytes() == b.direction.tobytes()


@given(vec, nonzero, st.floats(-50, 50), st.sampled_from([1.0, -1.0]))
def test_same_line_any_representation(p, d, s, sign):
    a = canonicalize_line(p, d)
    dd = np.asarray(d) / np.linalg.norm(d)
    b = canonicalize_line(np.asarray(p) + s * dd, sign * 3.0 * dd)
    assert lines_coincident(a, b, ToleranceConfig(dist_tol=1e-6, angle_tol=1e-9))
    # canonical point is the foot from the origin
    assert abs(float(a.point @ a.direction)) < 1e-9 * (1 + np.linalg.norm(p))


def test_canonical_direction_sign_convention():
    np.testing.assert_array_equal(canonical_direction([0, 0, -2]), [0, 0, 1])
    np.testing.assert_array_equal(canonical_direction([0, -1, 0]), [0, 1, 0])
    np.testing.assert_array_equal(canonical_direction([-1, 5, 0]) > 0, [True, False, False])


def test_zero_direction_rejected():
    with pytest.raises(ValueError):
        canonicalize_line([0, 0, 0], [0, 0, 0])


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        canonicalize_line([math.nan, 0, 0], [0, 0, 1])


def test_equality_and_hash_are_representation_free():
    a = canonicalize_line([1, 2, 3], [0, 0, 1])
    b = canonicalize_line([1, 2, -7], [0, 0, -5])
    assert a == b and hash(a) == hash(b)
    assert len({a, b}) == 1


def test_parallel_and_offset():
    tol = ToleranceConfig()
    a = canonicalize_line([0, 0, 0], [1, 0, 0])
    b = canonicalize_line([0, 1, 0], [1, 0, 0])
    assert directions_parallel(a, b, tol)
    assert not lines_coincident(a, b, tol)
    assert line_separation(a, b) == pytest.approx(1.0)
    tilted = canonicalize_line([0, 0, 0], [1, 2e-3, 0])
    assert not directions_parallel(a, tilted, tol)
    slightly = canonicalize_line([0, 0, 0], [1, 5e-4, 0])
    assert directions_parallel(a, slightly, tol)


@given(nonzero, nonzero)
def test_direction_angle_symmetric_and_bounded(u, v):
    u = np.asarray(u) / np.linalg.norm(u)
    v = np.asarray(v) / np.linalg.norm(v)
    ang = direction_angle(u, v)
    assert 0 <= ang <= math.pi / 2 + 1e-12
    assert ang == pytest.approx(direction_angle(v, u), abs=1e-12)
    assert ang == pytest.approx(direction_angle(u, -v), abs=1e-12)


def test_vectorized_helpers_match_scalar():
    rng = np.random.default_rng(5)
    ref = canonicalize_line(rng.normal(size=3), rng.normal(size=3))
    lines = [canonicalize_line(rng.normal(size=3), rng.normal(size=3)) for _ in range(20)]
    pts = np.array([l.point for l in lines])
    dirs = np.array([l.direction for l in lines])
    np.testing.assert_allclose(
        direction_angles(dirs, ref.direction), [direction_angle(d, ref.direction) for d in dirs], atol=1e-12
    )
    np.testing.assert_allclose(separations(pts, dirs, ref), [line_separation(l, ref) for l in lines], atol=1e-12)


def test_dedup_is_order_independent():
    rng = np.random.default_rng(1)
    base = [canonicalize_line(rng.normal(size=3), rng.normal(size=3)) for _ in range(5)]
    noisy = base + [canonicalize_line(l.point + 1e-6, l.direction) for l in base]
    out1 = dedup_lines(noisy)
    out2 = dedup_lines(list(reversed(noisy)))
    assert len(out1) == 5
    assert [l.key for l in out1] == [l.key for l in out2]
    assert sort_lines(out1) == out1


def test_project_and_distance():
    l = AxisLine(np.array([0.0, 0, 0]), np.array([0.0, 0, 1]))
    assert l.project([3, 4, 5]) == 5
    assert l.distance_to_point([3, 4, 5]) == 5
