"""
Rigid-body math on SO(3) and SE(3).

Poses are 4x4 homogeneous matrices, rotations 3x3 matrices and twists
6-vectors ordered (angular, linear). Every function is pure and returns new
arrays, so values can be shared freely between threads and processes.
"""

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import AngleNearPi

# Below this angle exp/log switch to their Taylor expansions.
SMALL_ANGLE = 1e-8
# Logarithms closer than this to pi are refused.
NEAR_PI = 1e-6
# Between NEAR_PI and this, the axis comes from the symmetric part of R.
SYMMETRIC_BRANCH = 1e-3
# Products longer than this are re-projected onto SO(3).
REORTHONORMALIZE_EVERY = 100

_I3 = np.eye(3)


def skew(w) -> np.ndarray:
    wx, wy, wz = w
    return np.array([[0.0, -wz, wy],
                     [wz, 0.0, -wx],
                     [-wy, wx, 0.0]])


def unskew(W) -> np.ndarray:
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def make_pose(R=None, p=None) -> np.ndarray:
    T = np.eye(4)
    if R is not None:
        T[:3, :3] = R
    if p is not None:
        T[:3, 3] = p
    return T


def translation(p) -> np.ndarray:
    return make_pose(p=np.asarray(p, dtype=float))


def pose_inv(T) -> np.ndarray:
    R = T[:3, :3]
    Ti = np.eye(4)
    Ti[:3, :3] = R.T
    Ti[:3, 3] = -R.T @ T[:3, 3]
    return Ti


def hat(xi) -> np.ndarray:
    X = np.zeros((4, 4))
    X[:3, :3] = skew(xi[:3])
    X[:3, 3] = xi[3:]
    return X


def vee(X) -> np.ndarray:
    return np.r_[unskew(X[:3, :3]), X[:3, 3]]


def screw_axis(omega, point) -> np.ndarray:
    """Unit revolute screw about `omega` through `point`."""
    omega = np.asarray(omega, dtype=float)
    return np.r_[omega, -np.cross(omega, point)]


def orthonormalize(R) -> np.ndarray:
    """Nearest rotation matrix in the Frobenius sense."""
    U, _, Vt = np.linalg.svd(R)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


def rotation_about(axis, angle: float) -> np.ndarray:
    W = skew(axis)
    return _I3 + np.sin(angle) * W + (1.0 - np.cos(angle)) * (W @ W)


def rotation_angle(R) -> float:
    s = np.linalg.norm(unskew(R - R.T)) / 2.0
    c = (np.trace(R) - 1.0) / 2.0
    return float(np.arctan2(s, c))


def exp_twist(xi, theta: float) -> np.ndarray:
    """
    e^{[xi] theta} for a unit screw xi.

    Revolute screws (|omega| = 1) use Rodrigues' formula and its closed-form
    translation; prismatic screws (omega = 0) translate along v.
    """
    w = xi[:3]
    v = xi[3:]
    T = np.eye(4)

    if w[0] == 0.0 and w[1] == 0.0 and w[2] == 0.0:
        T[:3, 3] = np.multiply(v, theta)
        return T

    W = skew(w)
    W2 = W @ W
    if abs(theta) < SMALL_ANGLE:
        t2 = theta * theta
        T[:3, :3] = _I3 + theta * W + (t2 / 2.0) * W2
        T[:3, 3] = (theta * _I3 + (t2 / 2.0) * W + (t2 * theta / 6.0) * W2) @ v
        return T

    s = np.sin(theta)
    c1 = 1.0 - np.cos(theta)
    T[:3, :3] = _I3 + s * W + c1 * W2
    T[:3, 3] = (theta * _I3 + c1 * W + (theta - s) * W2) @ v
    return T


def exp6(vec) -> np.ndarray:
    """Exponential of an unnormalized twist (xi * theta)."""
    vec = np.asarray(vec, dtype=float)
    theta = np.linalg.norm(vec[:3])
    if theta < 1e-12:
        T = np.eye(4)
        T[:3, :3] = _I3 + skew(vec[:3])
        T[:3, 3] = vec[3:]
        return T
    return exp_twist(vec / theta, theta)


def _log_rotation(R) -> tuple[np.ndarray, float]:
    d = unskew(R - R.T)
    s = np.linalg.norm(d) / 2.0
    c = (np.trace(R) - 1.0) / 2.0
    theta = float(np.arctan2(s, c))

    if np.pi - theta < NEAR_PI:
        raise AngleNearPi(f"rotation angle {theta!r} is within {NEAR_PI} "
                          "of pi")

    if theta < SMALL_ANGLE:
        return d / 2.0, theta

    if np.pi - theta < SYMMETRIC_BRANCH:
        B = ((R + R.T) / 2.0 - c * _I3) / (1.0 - c)
        k = int(np.argmax(np.diag(B)))
        w = B[:, k] / np.sqrt(B[k, k])
        if w @ d < 0:
            w = -w
        return w * theta, theta

    return (theta / (2.0 * s)) * d, theta


def log_vec(T) -> np.ndarray:
    """Matrix logarithm of T as an unnormalized twist (xi * theta)."""
    phi, theta = _log_rotation(T[:3, :3])
    p = T[:3, 3]

    if theta < SMALL_ANGLE:
        P = skew(phi)
        return np.r_[phi, p - 0.5 * (P @ p) + (P @ P @ p) / 12.0]

    w = phi / theta
    W = skew(w)
    half = theta / 2.0
    Vinv = _I3 - half * W + (1.0 - half / np.tan(half)) * (W @ W)
    return np.r_[phi, Vinv @ p]


def log_pose(T) -> tuple[np.ndarray, float]:
    """
    Logarithm of T as a unit screw and an angle.

    The screw is signed so that the first nonzero component of omega is
    positive, which puts the angle in (-pi, pi). Pure translations come back
    as prismatic screws with theta equal to the distance travelled. Raises
    AngleNearPi when the rotation angle is within NEAR_PI of pi.
    """
    vec = log_vec(T)
    theta = float(np.linalg.norm(vec[:3]))

    if theta >= 1e-12:
        xi = vec / theta
        lead = xi[:3][np.abs(xi[:3]) > 1e-12][0]
        if lead < 0:
            return -xi, -theta
        return xi, theta

    d = float(np.linalg.norm(T[:3, 3]))
    if d < 1e-15:
        return np.zeros(6), 0.0
    return np.r_[np.zeros(3), T[:3, 3] / d], d


def adjoint(T) -> np.ndarray:
    R = T[:3, :3]
    Ad = np.zeros((6, 6))
    Ad[:3, :3] = R
    Ad[3:, 3:] = R
    Ad[3:, :3] = skew(T[:3, 3]) @ R
    return Ad


def compose(*poses) -> np.ndarray:
    T = np.eye(4)
    for i, P in enumerate(poses, 1):
        T = T @ P
        if i % REORTHONORMALIZE_EVERY == 0:
            T[:3, :3] = orthonormalize(T[:3, :3])
    if len(poses) > REORTHONORMALIZE_EVERY:
        T[:3, :3] = orthonormalize(T[:3, :3])
    return T


def interpolate(T0, T1, s: float) -> np.ndarray:
    """Straight-line translation with geodesic rotation, s in [0, 1]."""
    R0 = T0[:3, :3]
    phi, _ = _log_rotation(R0.T @ T1[:3, :3])
    return make_pose(R0 @ exp6(np.r_[s * phi, np.zeros(3)])[:3, :3],
                     (1.0 - s) * T0[:3, 3] + s * T1[:3, 3])


def reflection(normal) -> np.ndarray:
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    return _I3 - 2.0 * np.outer(n, n)


def mirror_pose(T, normal) -> np.ndarray:
    """Reflect a pose across the plane through the origin with `normal`."""
    S = reflection(normal)
    return make_pose(S @ T[:3, :3] @ S, S @ T[:3, 3])


def rotation_from_quat(q) -> np.ndarray:
    w, x, y, z = q
    return Rotation.from_quat([x, y, z, w]).as_matrix()


def quat_from_rotation(R) -> np.ndarray:
    """Unit quaternion (w, x, y, z) with w >= 0."""
    x, y, z, w = Rotation.from_matrix(R).as_quat()
    q = np.array([w, x, y, z])
    if w < 0:
        q = -q
    return q
