import numpy as np
import pytest
from numpy.testing import assert_allclose

from morphlib.chain import ChainDesign, JointSpec, fk
from morphlib.errors import NumericallySingular
from morphlib.ik import IkSettings, error_twist, solve_ik, weighted_pinv, \
    wrap_angles
from morphlib.se3 import exp6, translation


def test_reachable_targets_converge(arm, rng):
    converged = 0
    for _ in range(40):
        q_true = rng.uniform(-1.0, 1.0, 7)
        seed = q_true + rng.normal(0.0, 0.1, 7)
        res = solve_ik(arm, fk(arm, q_true), seed)
        converged += res.converged
        if res.converged:
            assert res.residual_twist_norm <= 1e-6
            assert res.iterations <= 500
    assert converged >= 38


def test_seed_on_target_needs_no_iterations(arm):
    q = np.array([0.1, -0.2, 0.3, 0.4, -0.5, 0.6, -0.7])
    res = solve_ik(arm, fk(arm, q), q)
    assert res.converged
    assert res.iterations == 0
    assert_allclose(res.q, q)


def test_unreachable_target_terminates(arm):
    res = solve_ik(arm, translation((5.0, 0.0, 0.0)), np.zeros(7),
                   IkSettings(max_iters=60))
    assert not res.converged
    assert res.iterations == 60
    assert np.isfinite(res.residual_twist_norm)


def test_limits_are_respected(arm):
    tight = ChainDesign([JointSpec(j.axis, j.point, (-0.3, 0.3))
                         for j in arm.joints], arm.home)
    target = fk(arm, np.full(7, 1.0))
    res = solve_ik(tight, target, np.zeros(7), IkSettings(max_iters=100))

    assert np.all(np.abs(res.q) <= 0.3)
    assert res.saturated.shape == (7,)


def test_target_across_the_log_cut(arm):
    # The error at the seed is a half turn, where the log is refused.
    q = np.zeros(7)
    q[0] = np.pi
    res = solve_ik(arm, fk(arm, q), np.zeros(7))
    assert res.converged


def test_residual_describes_the_returned_joints(arm):
    # Out of iterations right on the log cut: the nudged joints come back.
    q = np.zeros(7)
    q[0] = np.pi
    target = fk(arm, q)
    res = solve_ik(arm, target, np.zeros(7), IkSettings(max_iters=0))

    assert res.iterations == 0
    assert not res.converged
    assert res.q[0] == pytest.approx(1e-2)
    V = error_twist(fk(arm, res.q), target)
    assert_allclose(res.twist, V, atol=1e-12)
    assert res.residual_twist_norm == pytest.approx(np.linalg.norm(V))


def test_twist_weights_change_convergence(arm):
    target = fk(arm, np.zeros(7)) @ exp6([0.0, 0.0, 0.0, 0.0, 0.0, 1e-3])
    # Only rotation counts, and the target differs only in position.
    res = solve_ik(arm, target, np.zeros(7),
                   IkSettings(twist_weights=(1, 1, 1, 0, 0, 0)))
    assert res.converged
    assert res.iterations == 0


def test_weighted_pinv_inverts(rng):
    J = rng.normal(size=(6, 7))
    G, damped = weighted_pinv(J, rng.uniform(0.5, 2.0, 7), 1e-3, 0.0)
    assert not damped
    assert_allclose(J @ G, np.eye(6), atol=1e-10)


def test_weighted_pinv_damps_singular_jacobians(rng):
    J = rng.normal(size=(6, 7))
    J[5] = 0.0

    G, damped = weighted_pinv(J, None, 1e-3, 1e-3)
    assert damped
    assert np.all(np.isfinite(G))

    with pytest.raises(NumericallySingular):
        weighted_pinv(J, None, 0.0, 1e-3)


def test_wrap_angles():
    assert_allclose(wrap_angles(np.array([3 * np.pi / 2, np.pi, -np.pi, 0.5])),
                    [-np.pi / 2, np.pi, np.pi, 0.5])


def test_error_twist_moves_onto_target(arm):
    T = fk(arm, np.zeros(7))
    target = fk(arm, np.full(7, 0.05))
    V = error_twist(T, target)
    assert_allclose(exp6(V) @ T, target, atol=1e-12)


def test_invalid_settings():
    with pytest.raises(ValueError):
        IkSettings(step_size=0.0)
    with pytest.raises(ValueError):
        IkSettings(joint_weights=(1.0, 0.0))
