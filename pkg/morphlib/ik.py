"""
First-order differential inverse kinematics with a singularity-damped,
joint-weighted pseudoinverse.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .chain import ChainDesign, forward
from .errors import AngleNearPi, NumericallySingular
from .se3 import adjoint, log_vec, pose_inv

log = logging.getLogger(__name__)

# Joint nudge applied when the pose error sits on the log's cut at pi.
NEAR_PI_NUDGE = 1e-2
# Gram matrices worse than this are treated as not invertible.
MAX_CONDITION = 1e15


@dataclass(frozen=True)
class IkSettings:
    step_size: float = 0.5
    tolerance: float = 1e-6
    max_iters: int = 500
    damping: float = 1e-3
    rcond_threshold: float = 1e-3
    # Diagonal of W; None means identity.
    joint_weights: tuple[float, ...] | None = None
    # Per-component weights of the error twist in the convergence test.
    twist_weights: tuple[float, ...] = (1.0,) * 6

    def __post_init__(self):
        if not 0.0 < self.step_size <= 1.0:
            raise ValueError(f"step size {self.step_size} not in (0, 1]")
        if not self.tolerance > 0.0:
            raise ValueError("tolerance must be positive")
        if self.damping < 0.0:
            raise ValueError("damping must be non-negative")
        if self.joint_weights is not None and min(self.joint_weights) <= 0:
            raise ValueError("joint weights must be positive")

    def with_max_iters(self, max_iters: int) -> "IkSettings":
        return replace(self, max_iters=max_iters)


@dataclass
class IkResult:
    q: np.ndarray
    residual_twist_norm: float
    iterations: int
    converged: bool
    # Spatial error twist at the returned configuration.
    twist: np.ndarray = field(default_factory=lambda: np.zeros(6))
    # Joints that ended the solve clamped at a limit.
    saturated: np.ndarray = field(default_factory=lambda: np.zeros(0, bool))


def rcond(A) -> float:
    """Reciprocal 1-norm condition number, 0 for singular matrices."""
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.linalg.cond(A, 1)
    if not np.isfinite(c) or c == 0.0:
        return 0.0
    return 1.0 / c


def weighted_pinv(J, weights, damping: float,
                  rcond_threshold: float) -> tuple[np.ndarray, bool]:
    """
    W^-1 J^T (J W^-1 J^T + lambda I)^-1 and whether damping was applied.

    Damping is applied only when rcond(J J^T) falls below `rcond_threshold`.
    """
    J = np.asarray(J, dtype=float)
    m, n = J.shape
    if n < m:
        raise ValueError(f"need at least {m} columns, got {n}")

    winv = np.ones(n) if weights is None else 1.0 / np.asarray(weights, float)
    JWinv = J * winv
    A = JWinv @ J.T

    damped = rcond(J @ J.T) < rcond_threshold
    if damped:
        A = A + damping * np.eye(m)

    if not np.all(np.isfinite(A)) or rcond(A) < 1.0 / MAX_CONDITION:
        raise NumericallySingular(
            f"weighted Gram matrix is singular (damping={damped})")

    return JWinv.T @ np.linalg.inv(A), damped


def damped_pinv(J, weights=None, damping: float = 1e-3,
                rcond_threshold: float = 1e-3) -> np.ndarray:
    return weighted_pinv(J, weights, damping, rcond_threshold)[0]


def wrap_angles(q) -> np.ndarray:
    """Map angles into (-pi, pi]."""
    return np.pi - np.mod(np.pi - q, 2.0 * np.pi)


def error_twist(T_sb, target) -> np.ndarray:
    """Spatial error twist [Ad_{T_sb}] log(T_sb^-1 T)^v."""
    return adjoint(T_sb) @ log_vec(pose_inv(T_sb) @ target)


def _residual(chain, q, target, tw) -> tuple[np.ndarray, float]:
    try:
        V = error_twist(forward(chain, q)[0], target)
    except AngleNearPi:
        return np.full(6, np.inf), np.inf
    return V, float(np.linalg.norm(tw * V))


def solve_ik(chain: ChainDesign, target, seed,
             settings: IkSettings = IkSettings()) -> IkResult:
    """
    Iterate q <- q + alpha J^+ V until the weighted error twist norm drops
    to the tolerance or max_iters updates have been made.

    Not converging is a normal outcome reported through the result.
    """
    q = np.array(seed, dtype=float)
    lower, upper = chain.limits.T
    tw = np.asarray(settings.twist_weights, dtype=float)

    V = np.zeros(6)
    err = np.inf
    k = 0
    while True:
        T_sb, J = forward(chain, q)
        try:
            V = error_twist(T_sb, target)
        except AngleNearPi:
            log.debug("pose error on the log cut, nudging joint 1")
            q[0] = np.clip(wrap_angles(q[0] + NEAR_PI_NUDGE),
                           lower[0], upper[0])
            if k >= settings.max_iters:
                V, err = _residual(chain, q, target, tw)
                break
            k += 1
            continue

        err = float(np.linalg.norm(tw * V))
        if err <= settings.tolerance or k >= settings.max_iters:
            break

        Jp, _ = weighted_pinv(J, settings.joint_weights, settings.damping,
                              settings.rcond_threshold)
        q = np.clip(wrap_angles(q + settings.step_size * (Jp @ V)),
                    lower, upper)
        k += 1

    converged = err <= settings.tolerance
    if not converged:
        log.debug(f"IK stopped after {k} iterations, residual {err:.3g}")

    return IkResult(q=q, residual_twist_norm=err, iterations=k,
                    converged=converged, twist=V,
                    saturated=(q <= lower) | (q >= upper))
