import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from numpy.testing import assert_allclose
from scipy.linalg import expm, logm

from morphlib.errors import AngleNearPi
from morphlib.se3 import adjoint, compose, exp6, exp_twist, hat, \
    interpolate, log_pose, log_vec, make_pose, mirror_pose, pose_inv, \
    quat_from_rotation, rotation_about, rotation_angle, rotation_from_quat, \
    screw_axis, translation, vee

coords = st.floats(-1.0, 1.0, allow_nan=False)
vectors = st.tuples(coords, coords, coords).map(np.array)


@st.composite
def unit_vectors(draw):
    v = draw(vectors)
    assume(np.linalg.norm(v) > 0.1)
    return v / np.linalg.norm(v)


@st.composite
def poses(draw):
    axis = draw(unit_vectors())
    angle = draw(st.floats(0.0, np.pi - 0.1))
    return make_pose(rotation_about(axis, angle), draw(vectors))


@given(unit_vectors(), vectors, st.floats(0.01, np.pi - 0.1))
def test_log_inverts_exp(axis, point, theta):
    xi = screw_axis(axis, point)
    T = exp_twist(xi, theta)

    xi2, theta2 = log_pose(T)

    assert abs(abs(theta2) - theta) <= 1e-9
    assert xi2[:3][np.abs(xi2[:3]) > 1e-12][0] > 0
    assert_allclose(xi2 * theta2, xi * theta, atol=1e-9)
    assert_allclose(exp_twist(xi2, theta2), T, atol=1e-9)


def test_log_flips_axes_with_a_negative_lead():
    xi = screw_axis((0.0, 0.0, -1.0), (0.1, 0.0, 0.0))
    T = exp_twist(xi, 0.7)

    xi2, theta = log_pose(T)

    assert_allclose(xi2[:3], [0, 0, 1], atol=1e-10)
    assert theta == pytest.approx(-0.7)
    assert_allclose(xi2, -xi, atol=1e-10)
    assert_allclose(exp_twist(xi2, theta), T, atol=1e-10)

    xi2, theta = log_pose(exp_twist(screw_axis((0.0, -0.6, 0.8),
                                               (0.0, 0.0, 0.0)), 0.3))
    assert_allclose(xi2[:3], [0, 0.6, -0.8], atol=1e-10)
    assert theta == pytest.approx(-0.3)


@given(unit_vectors(), vectors, st.floats(-3.0, 3.0))
def test_exp_matches_matrix_exponential(axis, point, theta):
    xi = screw_axis(axis, point)
    assert_allclose(exp_twist(xi, theta), expm(hat(xi) * theta), atol=1e-10)


@given(poses())
def test_log_matches_matrix_logarithm(T):
    assume(rotation_angle(T[:3, :3]) > 1e-3)
    assert_allclose(hat(log_vec(T)), np.real(logm(T)), atol=1e-7)


def test_identity_and_pure_translation():
    xi, theta = log_pose(np.eye(4))
    assert theta == 0.0
    assert not xi.any()

    xi, theta = log_pose(translation((0.0, 0.0, 2.0)))
    assert theta == pytest.approx(2.0)
    assert_allclose(xi, [0, 0, 0, 0, 0, 1])
    assert_allclose(exp_twist(xi, theta), translation((0.0, 0.0, 2.0)))


def test_small_angles_use_series():
    xi = screw_axis((0.0, 0.0, 1.0), (1.0, 0.0, 0.0))
    T = exp_twist(xi, 1e-10)
    assert_allclose(log_vec(T), xi * 1e-10, atol=1e-18)


def test_near_pi():
    z = (0.0, 0.0, 1.0)
    with pytest.raises(AngleNearPi):
        log_vec(make_pose(rotation_about(z, np.pi)))
    with pytest.raises(AngleNearPi):
        log_vec(make_pose(rotation_about(z, np.pi - 1e-7)))

    # Close to pi but outside the refused band the axis is still exact.
    axis = np.array([1.0, 2.0, 2.0]) / 3.0
    T = make_pose(rotation_about(axis, np.pi - 1e-4), (0.1, 0.2, 0.3))
    assert_allclose(exp6(log_vec(T)), T, atol=1e-9)
    assert_allclose(log_vec(T)[:3], axis * (np.pi - 1e-4), atol=1e-9)


@given(poses(), poses())
def test_adjoint_is_a_homomorphism(T1, T2):
    assert_allclose(adjoint(T1 @ T2), adjoint(T1) @ adjoint(T2), atol=1e-10)


@given(poses(), vectors, vectors)
def test_adjoint_transforms_twists(T, w, v):
    V = np.r_[w, v]
    assert_allclose(adjoint(T) @ V, vee(T @ hat(V) @ pose_inv(T)),
                    atol=1e-12)


def test_long_products_stay_orthonormal(rng):
    steps = [make_pose(rotation_about(a / np.linalg.norm(a), 0.3))
             for a in rng.normal(size=(1000, 3))]
    R = compose(*steps)[:3, :3]
    assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0)


def test_interpolate():
    T0 = make_pose(np.eye(3), (0.0, 0.0, 0.0))
    T1 = make_pose(rotation_about((0.0, 0.0, 1.0), 1.0), (0.2, 0.0, 0.1))

    assert_allclose(interpolate(T0, T1, 0.0), T0, atol=1e-12)
    assert_allclose(interpolate(T0, T1, 1.0), T1, atol=1e-12)

    mid = interpolate(T0, T1, 0.5)
    assert rotation_angle(mid[:3, :3]) == pytest.approx(0.5)
    assert_allclose(mid[:3, 3], [0.1, 0.0, 0.05])


def test_quaternions_are_scalar_first_with_positive_w():
    q = quat_from_rotation(rotation_about((0.0, 0.0, 1.0), np.pi / 2))
    assert_allclose(q, [np.cos(np.pi / 4), 0, 0, np.sin(np.pi / 4)])

    q = quat_from_rotation(rotation_about((1.0, 0.0, 0.0), 3.0))
    assert q[0] >= 0
    assert_allclose(rotation_from_quat(q), rotation_about((1, 0, 0), 3.0),
                    atol=1e-12)


@given(poses())
def test_mirror_pose_is_a_proper_involution(T):
    n = (0.0, 1.0, 0.0)
    M = mirror_pose(T, n)
    assert np.linalg.det(M[:3, :3]) == pytest.approx(1.0)
    assert M[1, 3] == pytest.approx(-T[1, 3])
    assert_allclose(mirror_pose(M, n), T, atol=1e-12)
