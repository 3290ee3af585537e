"""
Design-informed differential motion of the positioner + two-arm tree.

Joint rates solve

    min 1/2 qd^T M qd + grad(H)^T qd   s.t.   J qd = V_d

with M a block-diagonal surrogate mass whose base block is scaled by a
switching law, and H a quadratic potential pulling each arm's dexterous
location onto its task point. Transitions also charge turning the flange
away from the orientation that holds both tools at their home pose.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .chain import SAGITTAL_NORMAL, BilateralDesign, forward, tree_forward
from .dexterity import evaluate_points, trace_points
from .errors import DimensionMismatch
from .ik import error_twist, weighted_pinv
from .se3 import interpolate, pose_inv, reflection, skew, unskew

log = logging.getLogger(__name__)

SEGMENTS = ("K", "L", "R")


@dataclass
class MotionState:
    q_base: np.ndarray
    q_left: np.ndarray
    q_right: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.q_base = np.asarray(self.q_base, dtype=float)
        self.q_left = np.asarray(self.q_left, dtype=float)
        self.q_right = np.asarray(self.q_right, dtype=float)

    @property
    def q(self) -> np.ndarray:
        return np.concatenate([self.q_base, self.q_left, self.q_right])

    @classmethod
    def from_vector(cls, sys: BilateralDesign, q, time: float = 0.0):
        return cls(*sys.split(q), time=time)

    @classmethod
    def home(cls, sys: BilateralDesign, q_base=None):
        return cls(np.zeros(sys.base_chain.dof) if q_base is None else q_base,
                   np.zeros(sys.arm.dof), np.zeros(sys.arm.dof))


@dataclass(frozen=True, eq=False)
class NullSpaceGoal:
    """
    Targets w (world positions of the task points), weights Q, extra tool
    offsets t, and the flange-frame anchors whose world positions are r.

    With `orientations` set, H also charges rotation_weight * |R_sk - R|^2
    for each arm, R being the flange rotation that holds that arm's tool at
    its home pose.
    """
    targets: tuple[np.ndarray, np.ndarray]
    anchors: tuple[np.ndarray, np.ndarray]
    weights: tuple[np.ndarray, np.ndarray] = (np.eye(3), np.eye(3))
    tool_offsets: tuple[np.ndarray, np.ndarray] = (np.zeros(3), np.zeros(3))
    orientations: tuple[np.ndarray, np.ndarray] | None = None
    rotation_weight: float = 0.0

    def __post_init__(self):
        names = ["targets", "anchors", "weights", "tool_offsets"]
        if self.orientations is not None:
            names.append("orientations")
        for name in names:
            value = tuple(np.asarray(v, dtype=float)
                          for v in getattr(self, name))
            object.__setattr__(self, name, value)
        if self.rotation_weight < 0:
            raise ValueError("rotation weight must be non-negative")
        for Q in self.weights:
            if np.any(np.linalg.eigvalsh((Q + Q.T) / 2) < 0):
                raise ValueError("null-space weights must be positive "
                                 "semi-definite")

    @classmethod
    def for_design(cls, sys: BilateralDesign, targets, weight: float = 1.0,
                   dexterous_point=None, tool_offsets=None,
                   rotation_weight: float = 0.0):
        """
        Anchors at the design's dexterous points, or at `dexterous_point`
        (arm frame) mirrored onto both mounts.

        Targets may be positions or full tool poses. Poses also fix the
        flange orientations that keep both tools at their home pose.
        """
        orientations = None
        if all(np.ndim(t) == 2 for t in targets):
            homes = (sys.left_chain.home, sys.right_chain.home)
            orientations = tuple(np.asarray(t, dtype=float)[:3, :3]
                                 @ D[:3, :3].T
                                 for t, D in zip(targets, homes))
        if dexterous_point is None:
            anchors = sys.dexterous_points
        else:
            left, right = sys.mounts
            S = reflection(SAGITTAL_NORMAL)
            p = np.asarray(dexterous_point, dtype=float)
            anchors = (left + p, right + S @ p)
        targets = tuple(np.asarray(t, dtype=float)[:3, 3]
                        if np.ndim(t) == 2 else t for t in targets)
        return cls(targets=targets, anchors=anchors,
                   weights=(weight * np.eye(3), weight * np.eye(3)),
                   tool_offsets=tool_offsets or (np.zeros(3), np.zeros(3)),
                   orientations=orientations,
                   rotation_weight=rotation_weight)


@dataclass(frozen=True)
class MassSettings:
    base_mass: float = 10.0
    arm_mass: float = 1.0
    # Activation thresholds for segments K, L, R (m).
    betas: tuple[float, float, float] = (0.0, 0.0, 0.0)
    # Segments whose mass follows the switching law; others keep scale 1.
    activate: tuple[str, ...] = ("K",)
    switching: str = "tanh"

    def __post_init__(self):
        if self.base_mass <= 0 or self.arm_mass <= 0:
            raise ValueError("segment masses must be positive")
        if min(self.betas) < 0:
            raise ValueError("activation thresholds must be non-negative")
        if not set(self.activate) <= set(SEGMENTS):
            raise ValueError(f"unknown segment in {self.activate}")
        if self.switching not in ("tanh", "binary"):
            raise ValueError(f"unknown switching law {self.switching!r}")


def switching_scale(distance: float, beta: float,
                    law: str = "tanh") -> float:
    """tanh(|w - r| - beta) + 1.5, or its binary counterpart."""
    x = distance - beta
    if law == "binary":
        return 2.5 if x > 0 else 0.5
    return float(np.tanh(x) + 1.5)


def anchor_positions(T_sk, goal: NullSpaceGoal) -> list[np.ndarray]:
    return [T_sk[:3, :3] @ a + T_sk[:3, 3] for a in goal.anchors]


def _errors(T_sk, goal: NullSpaceGoal):
    return [w - (r + t) for w, r, t in
            zip(goal.targets, anchor_positions(T_sk, goal), goal.tool_offsets)]


def _turns_charged(goal: NullSpaceGoal) -> bool:
    return goal.orientations is not None and goal.rotation_weight > 0


def potential(state: MotionState, goal: NullSpaceGoal,
              sys: BilateralDesign) -> float:
    T_sk, _ = forward(sys.base_chain, state.q_base)
    H = sum(e @ Q @ e for e, Q in zip(_errors(T_sk, goal), goal.weights))
    if _turns_charged(goal):
        R_sk = T_sk[:3, :3]
        H += goal.rotation_weight * sum(np.sum((R_sk - R) ** 2)
                                        for R in goal.orientations)
    return float(H)


def nullspace_gradient(state: MotionState, goal: NullSpaceGoal,
                       sys: BilateralDesign) -> np.ndarray:
    """
    Gradient of H over all tree joints. Only the positioner moves the
    anchors, so the arm entries are zero.
    """
    T_sk, J_K = forward(sys.base_chain, state.q_base)
    grad = np.zeros(sys.dof)
    k = sys.base_chain.dof

    for r, e, Q in zip(anchor_positions(T_sk, goal), _errors(T_sk, goal),
                       goal.weights):
        # Velocity of a point at r: v - r x omega.
        Jp = J_K[3:] - skew(r) @ J_K[:3]
        grad[:k] -= Jp.T @ ((Q + Q.T) @ e)

    if _turns_charged(goal):
        # d|R_sk - R|^2 = 2 omega . vee(A - A^T), A = R_sk R^T.
        R_sk = T_sk[:3, :3]
        for R in goal.orientations:
            A = R_sk @ R.T
            grad[:k] += (2.0 * goal.rotation_weight
                         * J_K[:3].T @ unskew(A - A.T))
    return grad


def segment_distances(state: MotionState, goal: NullSpaceGoal,
                      sys: BilateralDesign) -> tuple[float, float, float]:
    T_sk, _ = forward(sys.base_chain, state.q_base)
    d_l, d_r = (np.linalg.norm(w - r) for w, r in
                zip(goal.targets, anchor_positions(T_sk, goal)))
    return (d_l + d_r) / 2, d_l, d_r


def mass_diagonal(state: MotionState, goal: NullSpaceGoal,
                  settings: MassSettings, sys: BilateralDesign):
    """Diagonal of M and the per-segment scales (K, L, R)."""
    distances = segment_distances(state, goal, sys)
    scales = tuple(
        switching_scale(d, beta, settings.switching) if s in settings.activate
        else 1.0
        for s, d, beta in zip(SEGMENTS, distances, settings.betas))
    k, n = sys.base_chain.dof, sys.arm.dof
    diag = np.concatenate([
        np.full(k, settings.base_mass * scales[0]),
        np.full(n, settings.arm_mass * scales[1]),
        np.full(n, settings.arm_mass * scales[2]),
    ])
    return diag, scales


def scaled_mass(state: MotionState, goal: NullSpaceGoal,
                settings: MassSettings, sys: BilateralDesign) -> np.ndarray:
    return np.diag(mass_diagonal(state, goal, settings, sys)[0])


@dataclass
class RateSolution:
    qdot: np.ndarray
    jacobian: np.ndarray
    gain: np.ndarray        # G = M^-1 J^T (J M^-1 J^T)^-1
    scales: tuple
    damped: bool


def resolve_rates(state: MotionState, V_d, goal: NullSpaceGoal,
                  sys: BilateralDesign, settings: MassSettings = MassSettings(),
                  informed: bool = True, damping: float = 1e-3,
                  rcond_threshold: float = 1e-9) -> RateSolution:
    """
    qd = G V_d - (I - G J) M^-1 grad(H).

    The null-space term is subtracted so that it descends H; it never
    changes the tool twists. When J M^-1 J^T is close to singular the
    damped inverse is used and the solution is flagged.
    """
    V_d = np.asarray(V_d, dtype=float)
    if V_d.shape != (12,):
        raise DimensionMismatch("commanded twist must have 12 entries")

    J = tree_forward(sys, state.q_base, state.q_left, state.q_right)[3]
    m, scales = mass_diagonal(state, goal, settings, sys)
    G, damped = weighted_pinv(J, m, damping, rcond_threshold)
    if damped:
        log.debug(f"t={state.time:.3f}: damped tree inverse")

    qdot = G @ V_d
    if informed:
        grad = nullspace_gradient(state, goal, sys)
        if np.any(grad):
            x = grad / m
            qdot -= x - G @ (J @ x)

    return RateSolution(qdot=qdot, jacobian=J, gain=G, scales=scales,
                        damped=damped)


@dataclass
class MotionTrace:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    commanded: list = field(default_factory=list)
    achieved: list = field(default_factory=list)
    potential: list = field(default_factory=list)
    base_scale: list = field(default_factory=list)
    damped: list = field(default_factory=list)
    # World positions of the left and right tools.
    tool_positions: list = field(default_factory=list)
    # Per-step normalized composite dexterity, filled after the run.
    dexterity: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self):
        return len(self.times)

    def record(self, state, V_d, achieved, H, scale_k, damped, tools):
        self.times.append(state.time)
        self.states.append(state.q)
        self.commanded.append(np.asarray(V_d, dtype=float))
        self.achieved.append(np.asarray(achieved, dtype=float))
        self.potential.append(H)
        self.base_scale.append(scale_k)
        self.damped.append(damped)
        self.tool_positions.append(tools)


@dataclass(frozen=True)
class TransitionSettings:
    duration: float = 2.0
    dt: float = 0.01
    # Q = weight * I for both arms.
    weight: float = 200.0
    # Charge on turning the flange away from the arms' home orientation.
    rotation_weight: float = 20.0
    damping: float = 1e-3
    rcond_threshold: float = 1e-9


def workspace_transition(sys: BilateralDesign, shift, q_base=None):
    """
    Start state and the workspace frames w1, w2 of a transition.

    w1 sits midway between both tools at the start state, axis-aligned with
    the world; w2 is w1 translated by `shift`.
    """
    start = MotionState.home(sys, q_base)
    _, T_l, T_r, _ = tree_forward(sys, start.q_base, start.q_left,
                                  start.q_right)
    w1 = np.eye(4)
    w1[:3, 3] = (T_l[:3, 3] + T_r[:3, 3]) / 2
    w2 = w1.copy()
    w2[:3, 3] += np.asarray(shift, dtype=float)
    return start, w1, w2


def simulate_transition(sys: BilateralDesign, dexterous_point, w1, w2,
                        duration: float, dt: float, informed: bool,
                        mass: MassSettings = MassSettings(),
                        settings: TransitionSettings = TransitionSettings(),
                        start: MotionState | None = None) -> MotionTrace:
    """
    Carry both tools along the straight line from workspace pose w1 to w2.

    Each tool keeps its start pose relative to the workspace frame. Every
    step commands the tool twists that reach the next interpolated poses in
    one step and integrates the joint rates by explicit Euler, clamping at
    the joint limits. With `informed` the positioner is pulled along so each
    arm's dexterous point follows its tool target.
    """
    if not dt > 0:
        raise ValueError("time step must be positive")

    state = start or MotionState.home(sys)
    lower = np.concatenate([sys.base_chain.limits[:, 0],
                            sys.arm.limits[:, 0], sys.arm.limits[:, 0]])
    upper = np.concatenate([sys.base_chain.limits[:, 1],
                            sys.arm.limits[:, 1], sys.arm.limits[:, 1]])

    _, T_l, T_r, _ = tree_forward(sys, state.q_base, state.q_left,
                                  state.q_right)
    w1_inv = pose_inv(w1)
    offsets = (w1_inv @ T_l, w1_inv @ T_r)
    steps = max(int(round(duration / dt)), 0)
    trace = MotionTrace()

    rw = settings.rotation_weight
    for k in range(steps + 1):
        _, T_l, T_r, J = tree_forward(sys, state.q_base, state.q_left,
                                      state.q_right)
        s = 1.0 if steps == 0 else min((k + 1) / steps, 1.0)
        w = interpolate(w1, w2, s)
        targets = (w @ offsets[0], w @ offsets[1])
        goal = NullSpaceGoal.for_design(sys, targets, settings.weight,
                                        dexterous_point,
                                        rotation_weight=rw)
        H = potential(state, goal, sys)
        tools = np.array([T_l[:3, 3], T_r[:3, 3]])

        if k == steps:
            _, scales = mass_diagonal(state, goal, mass, sys)
            trace.record(state, np.zeros(12), np.zeros(12), H, scales[0],
                         False, tools)
            break

        V_d = np.r_[error_twist(T_l, targets[0]),
                    error_twist(T_r, targets[1])] / dt
        sol = resolve_rates(state, V_d, goal, sys, mass, informed,
                            settings.damping, settings.rcond_threshold)
        trace.record(state, V_d, sol.jacobian @ sol.qdot, H, sol.scales[0],
                     sol.damped, tools)

        q = np.clip(state.q + dt * sol.qdot, lower, upper)
        state = MotionState.from_vector(sys, q, state.time + dt)

    trace.dexterity = evaluate_points(trace_points(trace, sys)).composite
    log.debug(f"transition ({'informed' if informed else 'uninformed'}): "
              f"{len(trace)} steps, final H={trace.potential[-1]:.3g}")
    return trace
