import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from morphlib.errors import EmptyWindow, UnknownLabel
from morphlib.pipeline import TASK_LABELS, GeneratorSettings, PoseCloud, \
    RawTrajectory, cluster_resample, extract_local_variation, merge, \
    occupancy_ratio, synthesize_task
from morphlib.se3 import make_pose, mirror_pose, rotation_about, \
    rotation_angle

SHORT = GeneratorSettings(duration=4.0, rate=25.0)


def straight_line(times, positions, label="pick_place"):
    left = np.array([make_pose(p=p) for p in positions])
    right = np.array([mirror_pose(T, (0, 1, 0)) for T in left])
    return RawTrajectory(times, left, right, label)


@pytest.mark.parametrize("label", TASK_LABELS)
def test_synthesis_is_deterministic(label):
    a = synthesize_task(label, SHORT, 5)
    b = synthesize_task(label, SHORT, 5)
    assert_array_equal(a.left, b.left)
    assert_array_equal(a.right, b.right)
    assert len(a.times) == 100
    assert a.task_label == label

    c = synthesize_task(label, SHORT, 6)
    assert not np.array_equal(a.left, c.left)


def test_unknown_label():
    with pytest.raises(UnknownLabel):
        synthesize_task("juggling")
    with pytest.raises(UnknownLabel):
        RawTrajectory([0.0], np.eye(4)[None], np.eye(4)[None], "juggling")


def test_timestamps_must_increase():
    with pytest.raises(ValueError):
        straight_line([0.0, 0.0], np.zeros((2, 3)))


def test_suturing_sweeps_the_needle():
    traj = synthesize_task("suturing", GeneratorSettings(duration=4.0), 0)
    R = traj.left[::5, :3, :3]
    widest = max(rotation_angle(a.T @ b) for a in R for b in R)
    assert widest >= np.radians(100)


def extent(traj):
    return np.ptp(traj.left[:, :3, 3], axis=0).max()


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_task_extents(seed):
    suturing = extent(synthesize_task("suturing", rng_seed=seed))
    pick_place = extent(synthesize_task("pick_place", rng_seed=seed))
    assert suturing <= 0.02
    assert pick_place >= 4 * suturing


def test_hands_are_mirrored():
    traj = synthesize_task("cutting", SHORT, 0)
    assert np.all(traj.left[:, 1, 3] > 0)
    assert np.all(traj.right[:, 1, 3] < 0)


def test_local_variation_removes_drift():
    dt = 0.02
    t = np.arange(500) * dt
    x = 0.05 * t + 0.002 * np.sin(2 * np.pi * t)
    p = np.column_stack([x, np.full_like(t, 0.1), np.zeros_like(t)])

    cloud = extract_local_variation(straight_line(t, p), window=2.0)

    # Both arms, minus half a window at each end.
    assert len(cloud) == 2 * (500 - 2 * 50)
    assert np.abs(cloud.translations).max() <= 0.0025
    assert_allclose(cloud.translations.mean(axis=0), 0.0, atol=1e-12)
    assert_allclose(cloud.weights.sum(), 1.0)
    assert cloud.tasks == {"pick_place"}


def test_constant_recordings_have_no_variation():
    t = np.arange(200) * 0.02
    T = make_pose(rotation_about((0.0, 0.0, 1.0), 0.3), (0.2, 0.1, 0.3))
    left = np.repeat(T[None], len(t), axis=0)
    right = np.array([mirror_pose(P, (0, 1, 0)) for P in left])

    cloud = extract_local_variation(RawTrajectory(t, left, right, "cutting"))

    assert len(cloud) > 0
    identity = np.broadcast_to(np.eye(4), cloud.poses.shape)
    assert_allclose(cloud.poses, identity, atol=1e-12)


def test_short_recordings_are_one_window():
    t = np.arange(20) * 0.1
    p = np.column_stack([t, np.zeros_like(t), np.zeros_like(t)])
    cloud = extract_local_variation(straight_line(t, p), window=5.0)
    assert len(cloud) == 40
    assert_allclose(cloud.translations[:20, 0], t - t.mean())


def test_single_arm():
    t = np.arange(20) * 0.1
    cloud = extract_local_variation(straight_line(t, np.zeros((20, 3))),
                                    window=5.0, arms="left")
    assert len(cloud) == 20


def test_window_shorter_than_sampling():
    t = np.arange(20) * 0.1
    with pytest.raises(EmptyWindow):
        extract_local_variation(straight_line(t, np.zeros((20, 3))), 0.05)


def test_resampling_evens_out_clusters(rng):
    dense = rng.uniform(0.0005, 0.0095, size=(900, 3))
    sparse = rng.uniform(0.1005, 0.1095, size=(100, 3))
    poses = np.array([make_pose(p=p) for p in np.vstack([dense, sparse])])
    cloud = PoseCloud.uniform(poses)
    assert occupancy_ratio(cloud.translations, 0.005) > 3

    out = cluster_resample(cloud, grid_cell=0.005, target_count=160,
                           rng_seed=0)

    assert len(out) == 160
    assert occupancy_ratio(out.translations, 0.005) == 1.0
    assert np.sum(out.translations[:, 0] > 0.05) == 80


def test_resampling_is_seeded(small_cloud):
    a = cluster_resample(small_cloud, 0.002, 40, rng_seed=9)
    b = cluster_resample(small_cloud, 0.002, 40, rng_seed=9)
    assert_array_equal(a.poses, b.poses)
    assert len(a) == 40


def test_resampling_picks_input_poses(small_cloud):
    out = cluster_resample(small_cloud, 0.002, 40, rng_seed=3)
    for T in out.poses:
        gap = np.abs(small_cloud.poses - T).max(axis=(1, 2))
        assert gap.min() == 0.0


def test_resampling_rejects_empty_clouds():
    with pytest.raises(ValueError):
        cluster_resample(PoseCloud(np.zeros((0, 4, 4)), np.zeros(0)))


def test_merge_keeps_tasks():
    a = extract_local_variation(synthesize_task("cutting", SHORT), 1.0)
    b = extract_local_variation(synthesize_task("suturing", SHORT), 1.0)
    m = merge(a, b)
    assert len(m) == len(a) + len(b)
    assert m.tasks == {"cutting", "suturing"}
    assert_allclose(m.weights.sum(), 1.0)
