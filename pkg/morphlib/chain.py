"""
Serial chains in product-of-exponentials form and the bilateral tree.

Joint screws are defined in the chain's base frame at the zero
configuration; a chain's end-effector pose is
e^{[xi_1] q_1} ... e^{[xi_n] q_n} M.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DimensionMismatch
from .se3 import adjoint, exp_twist, make_pose, mirror_pose, reflection, \
    screw_axis, translation

SAGITTAL_NORMAL = np.array([0.0, 1.0, 0.0])

_X = np.array([1.0, 0.0, 0.0])
_Y = np.array([0.0, 1.0, 0.0])
_Z = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True, eq=False)
class JointSpec:
    axis: np.ndarray
    point: np.ndarray
    limits: tuple[float, float] = (-np.pi, np.pi)

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        norm = np.linalg.norm(axis)
        if not abs(norm - 1.0) <= 1e-9:
            raise ValueError(f"joint axis {axis} is not a unit vector")
        lower, upper = map(float, self.limits)
        if not lower < upper:
            raise ValueError(f"joint limits {self.limits} are not ordered")

        object.__setattr__(self, "axis", axis / norm)
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))
        object.__setattr__(self, "limits", (lower, upper))

    @property
    def screw(self) -> np.ndarray:
        return screw_axis(self.axis, self.point)


@dataclass(frozen=True, eq=False)
class ChainDesign:
    joints: tuple[JointSpec, ...]
    home: np.ndarray
    # 0-based index of the first wrist joint; the joints from here on
    # must meet in one point with linearly independent axes.
    wrist_index: int | None = 4
    screws: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))
        object.__setattr__(self, "home", np.asarray(self.home, dtype=float))
        object.__setattr__(self, "screws",
                           np.array([j.screw for j in self.joints]))

        if self.wrist_index is not None:
            wrist = self.joints[self.wrist_index:]
            points = np.array([j.point for j in wrist])
            if not np.allclose(points, points[0], rtol=0.0, atol=1e-12):
                raise ValueError("wrist axes do not intersect")
            axes = np.array([j.axis for j in wrist])
            if np.linalg.matrix_rank(axes, tol=1e-9) < min(3, len(wrist)):
                raise ValueError("wrist axes are not independent")

    @property
    def dof(self) -> int:
        return len(self.joints)

    @property
    def limits(self) -> np.ndarray:
        return np.array([j.limits for j in self.joints])

    @property
    def wrist_point(self) -> np.ndarray:
        return self.joints[self.wrist_index].point


def _check_q(chain: ChainDesign, q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (chain.dof,):
        raise DimensionMismatch(f"expected {chain.dof} joint values, got "
                                f"shape {q.shape}")
    return q


def forward(chain: ChainDesign, q) -> tuple[np.ndarray, np.ndarray]:
    """End-effector pose and spatial Jacobian in one sweep."""
    q = _check_q(chain, q)
    J = np.empty((6, chain.dof))
    P = np.eye(4)

    for i, (xi, theta) in enumerate(zip(chain.screws, q)):
        R = P[:3, :3]
        w = R @ xi[:3]
        J[:3, i] = w
        J[3:, i] = np.cross(P[:3, 3], w) + R @ xi[3:]
        P = P @ exp_twist(xi, theta)

    return P @ chain.home, J


def fk(chain: ChainDesign, q) -> np.ndarray:
    return forward(chain, q)[0]


def spatial_jacobian(chain: ChainDesign, q) -> np.ndarray:
    return forward(chain, q)[1]


def shifted(chain: ChainDesign, offset) -> ChainDesign:
    """The same chain mounted at `offset` in a parent frame."""
    offset = np.asarray(offset, dtype=float)
    return ChainDesign(
        joints=[JointSpec(j.axis, j.point + offset, j.limits)
                for j in chain.joints],
        home=translation(offset) @ chain.home,
        wrist_index=chain.wrist_index)


def mirror(chain: ChainDesign, plane_normal=SAGITTAL_NORMAL) -> ChainDesign:
    """
    Reflect a chain across the plane through the origin with `plane_normal`.

    Axis directions are reflected and negated, so a reflection is a proper
    motion of the joint: fk(mirror(c), q) == mirror_pose(fk(c, q)).
    """
    S = reflection(plane_normal)
    return ChainDesign(
        joints=[JointSpec(-(S @ j.axis), S @ j.point, j.limits)
                for j in chain.joints],
        home=mirror_pose(chain.home, plane_normal),
        wrist_index=chain.wrist_index)


def anthropomorphic_arm(tool_offset=(0.0, 0.0, 0.0),
                        limit: float = np.pi) -> ChainDesign:
    """Spherical shoulder, elbow and spherical wrist, elbow bent at home."""
    elbow = np.array([0.0, 0.0, 0.25])
    wrist = np.array([0.2, 0.0, 0.3])
    forearm = (wrist - elbow) / np.linalg.norm(wrist - elbow)
    origin = np.zeros(3)

    axes = [_Z, _Y, _X, _Y, forearm, _Y, _Z]
    points = [origin, origin, origin, elbow, wrist, wrist, wrist]
    return ChainDesign(
        joints=[JointSpec(a, p, (-limit, limit)) for a, p in zip(axes, points)],
        home=translation(wrist + np.asarray(tool_offset, dtype=float)),
        wrist_index=4)


def articulated_base(shoulder_height: float = 0.3, upper: float = 0.4,
                     fore: float = 0.4, limit: float = np.pi) -> ChainDesign:
    """Conventional 6-DOF positioner with a spherical wrist."""
    shoulder = np.array([0.0, 0.0, shoulder_height])
    elbow = shoulder + np.array([0.0, 0.0, upper])
    wrist = elbow + np.array([fore, 0.0, 0.0])

    axes = [_Z, _Y, _Y, _X, _Y, _Z]
    points = [np.zeros(3), shoulder, elbow, wrist, wrist, wrist]
    return ChainDesign(
        joints=[JointSpec(a, p, (-limit, limit)) for a, p in zip(axes, points)],
        home=translation(wrist),
        wrist_index=3)


@dataclass(frozen=True, eq=False)
class BilateralDesign:
    """
    Two mirrored arms on the flange of a global positioner.

    `arm` is the left arm in its own mount frame. The left mount sits at
    base_offset + (0, center_distance / 2, 0) in the flange frame and the
    right arm is its reflection across the flange's sagittal (x-z) plane.
    """
    arm: ChainDesign
    base_chain: ChainDesign = field(default_factory=articulated_base)
    base_offset: np.ndarray = field(
        default_factory=lambda: np.array([0.1, 0.0, -0.1]))
    center_distance: float = 0.3
    tool_offset: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "base_offset",
                           np.asarray(self.base_offset, dtype=float))
        object.__setattr__(self, "tool_offset",
                           np.asarray(self.tool_offset, dtype=float))

    @property
    def dof(self) -> int:
        return self.base_chain.dof + 2 * self.arm.dof

    @property
    def mounts(self) -> tuple[np.ndarray, np.ndarray]:
        left = self.base_offset + np.array([0.0, self.center_distance / 2, 0.0])
        S = reflection(SAGITTAL_NORMAL)
        return left, S @ left

    @cached_property
    def left_chain(self) -> ChainDesign:
        return shifted(self.arm, self.mounts[0])

    @cached_property
    def right_chain(self) -> ChainDesign:
        return mirror(self.left_chain, SAGITTAL_NORMAL)

    @cached_property
    def right_arm(self) -> ChainDesign:
        """Right arm in its own mount frame."""
        return mirror(self.arm, SAGITTAL_NORMAL)

    @property
    def dexterous_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Home end-effector points of both arms in the flange frame."""
        return self.left_chain.home[:3, 3], self.right_chain.home[:3, 3]

    def split(self, q) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dof,):
            raise DimensionMismatch(f"expected {self.dof} joint values, got "
                                    f"shape {q.shape}")
        k = self.base_chain.dof
        n = self.arm.dof
        return q[:k], q[k:k + n], q[k + n:]


def tree_forward(sys: BilateralDesign, q_base, q_left, q_right):
    """
    World poses of the flange and both end-effectors, and the 12 x n tree
    Jacobian

        [[J_K, Ad_{T_sk} J_L, 0],
         [J_K, 0, Ad_{T_sk} J_R]]

    whose block rows give the spatial twists of the left and right tools.
    """
    T_sk, J_K = forward(sys.base_chain, q_base)
    T_l, J_L = forward(sys.left_chain, q_left)
    T_r, J_R = forward(sys.right_chain, q_right)
    Ad = adjoint(T_sk)

    k = sys.base_chain.dof
    n = sys.arm.dof
    J = np.zeros((12, k + 2 * n))
    J[:6, :k] = J_K
    J[6:, :k] = J_K
    J[:6, k:k + n] = Ad @ J_L
    J[6:, k + n:] = Ad @ J_R
    return T_sk, T_sk @ T_l, T_sk @ T_r, J


def tree_fk(sys: BilateralDesign, q_base, q_left, q_right):
    T_sk = fk(sys.base_chain, q_base)
    return (T_sk,
            T_sk @ fk(sys.left_chain, q_left),
            T_sk @ fk(sys.right_chain, q_right))


def tree_jacobian(sys: BilateralDesign, q_base, q_left, q_right) -> np.ndarray:
    return tree_forward(sys, q_base, q_left, q_right)[3]


def chain_from_points(axes, points, limits, home_point,
                      wrist_index: int | None = 4) -> ChainDesign:
    return ChainDesign(
        joints=[JointSpec(a, p, lim) for a, p, lim in zip(axes, points, limits)],
        home=make_pose(p=home_point),
        wrist_index=wrist_index)
