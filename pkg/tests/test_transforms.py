import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from mateforge.lines import canonicalize_line, lines_coincident
from mateforge.transforms import RigidTransform, compose_transforms, screw_decompose

seeds = st.integers(0, 2**32 - 1)


def rand_t(rng):
    q = rng.normal(size=4)
    return RigidTransform(q / np.linalg.norm(q), rng.uniform(-10, 10, 3))


@given(seeds)
def test_matrix_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    t = rand_t(rng)
    w, x, y, z = t.rotation
    np.testing.assert_allclose(t.rotation_matrix, Rotation.from_quat([x, y, z, w]).as_matrix(), atol=1e-12)


@given(seeds)
def test_compose_associative_and_inverse(seed):
    rng = np.random.default_rng(seed)
    a, b, c = rand_t(rng), rand_t(rng), rand_t(rng)
    assert a.compose(b).compose(c).allclose(a.compose(b.compose(c)), atol=1e-9)
    assert a.compose(a.inverse()).allclose(RigidTransform.identity(), atol=1e-12)
    p = rng.normal(size=(5, 3))
    np.testing.assert_allclose(compose_transforms(a, b).apply(p), a.apply(b.apply(p)), atol=1e-9)
    np.testing.assert_allclose(a.compose(b).matrix, a.matrix @ b.matrix, atol=1e-9)


@given(seeds)
def test_screw_decomposition_reconstructs(seed):
    rng = np.random.default_rng(seed)
    t = rand_t(rng)
    s = screw_decompose(t)
    if s.axis is None:
        return
    rebuilt = RigidTransform.from_translation(s.pitch_translation).compose(
        RigidTransform.from_axis_angle(s.axis.direction, s.angle, s.axis.point)
    )
    assert rebuilt.allclose(t, atol=1e-7) or rebuilt.allclose(
        RigidTransform(-rebuilt.rotation, rebuilt.translation), atol=1e-7
    )


def test_screw_of_pure_rotation_about_offset_axis():
    t = RigidTransform.from_axis_angle([0, 0, 1], 0.7, point=[2, 3, 5])
    s = screw_decompose(t)
    assert s.angle == pytest.approx(0.7)
    assert lines_coincident(s.axis, canonicalize_line([2, 3, 0], [0, 0, 1]))
    assert np.linalg.norm(s.pitch_translation) < 1e-12


def test_small_angle_is_translation():
    t = RigidTransform(np.array([1, 1e-6, 0, 0]), [1, 0, 0])
    assert screw_decompose(t).axis is None


def test_from_matrix_roundtrip():
    t = RigidTransform.from_axis_angle([1, 2, 3], 1.1, point=[0, 1, 0])
    assert RigidTransform.from_matrix(t.matrix).allclose(t)


def test_transform_line_moves_axis():
    line = canonicalize_line([0, 0, 0], [0, 0, 1])
    t = RigidTransform.from_axis_angle([1, 0, 0], math.pi / 2).compose(RigidTransform.from_translation([1, 0, 0]))
    moved = t.transform_line(line)
    assert lines_coincident(moved, canonicalize_line([1, 0, 0], [0, 1, 0]))


def test_rejects_bad_components():
    with pytest.raises(ValueError):
        RigidTransform([0, 0, 0, 0], [0, 0, 0])
    with pytest.raises(ValueError):
        RigidTransform([1, 0, 0, 0], [math.inf, 0, 0])
