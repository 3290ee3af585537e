"""
Task data: synthetic task generators, local-variation extraction and
uniform resampling of pose clouds.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .chain import SAGITTAL_NORMAL
from .errors import EmptyWindow, UnknownLabel
from .se3 import make_pose, mirror_pose, orthonormalize, rotation_about

log = logging.getLogger(__name__)

TASK_LABELS = ("pick_place", "suturing", "cutting", "path_tracking")


@dataclass(eq=False)
class RawTrajectory:
    times: np.ndarray   # (N,)
    left: np.ndarray    # (N, 4, 4)
    right: np.ndarray   # (N, 4, 4)
    task_label: str

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.left = np.asarray(self.left, dtype=float)
        self.right = np.asarray(self.right, dtype=float)
        if self.task_label not in TASK_LABELS:
            raise UnknownLabel(f"unknown task label {self.task_label!r}")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("timestamps must be strictly increasing")


@dataclass(eq=False)
class PoseCloud:
    poses: np.ndarray    # (N, 4, 4), relative to the local anchor frame
    weights: np.ndarray  # (N,), sums to one
    tasks: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        self.poses = np.asarray(self.poses, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        self.tasks = frozenset(self.tasks)

    def __len__(self):
        return len(self.poses)

    @property
    def translations(self) -> np.ndarray:
        return self.poses[:, :3, 3]

    @classmethod
    def uniform(cls, poses, tasks=()) -> "PoseCloud":
        n = len(poses)
        return cls(poses, np.full(n, 1.0 / n), frozenset(tasks))


@dataclass(frozen=True)
class GeneratorSettings:
    duration: float = 20.0      # s
    rate: float = 50.0          # Hz
    jitter: float = 2e-4        # m, per-sample position noise
    # Lateral distance of each hand from the sagittal plane.
    hand_spacing: float = 0.08  # m


def chordal_mean(rotations) -> np.ndarray:
    return orthonormalize(np.mean(rotations, axis=0))


def _mean_pose(poses) -> np.ndarray:
    return make_pose(chordal_mean(poses[:, :3, :3]),
                     poses[:, :3, 3].mean(axis=0))


def _relative(anchor, poses) -> np.ndarray:
    Ra = anchor[:3, :3]
    out = np.empty_like(poses)
    out[:] = np.eye(4)
    out[:, :3, :3] = np.einsum("ji,njk->nik", Ra, poses[:, :3, :3])
    out[:, :3, 3] = (poses[:, :3, 3] - anchor[:3, 3]) @ Ra
    return out


def _center(poses) -> np.ndarray:
    poses = poses.copy()
    poses[:, :3, 3] -= poses[:, :3, 3].mean(axis=0)
    return poses


def _local_stream(times, poses, window: float) -> np.ndarray:
    dt = float(np.median(np.diff(times)))
    if window < dt:
        raise EmptyWindow(f"window {window} s is shorter than the sampling "
                          f"interval {dt} s")

    half = int(round(window / dt / 2.0))
    n = len(poses)
    if 2 * half + 1 >= n:
        return _relative(_mean_pose(poses), poses)

    out = []
    for i in range(half, n - half):
        out.append(_relative(_mean_pose(poses[i - half:i + half + 1]),
                             poses[i:i + 1])[0])
    return np.array(out)


def extract_local_variation(traj: RawTrajectory, window: float = 2.0,
                            arms: str = "both") -> PoseCloud:
    """
    Re-express every pose relative to the mean pose of the window centred on
    it, pool both arms and mean-centre the result.

    Right-arm poses are mirrored into the left arm's frame first. Samples too
    close to either end for a full window are dropped; when no sample has a
    full window the whole stream is one window.
    """
    if len(traj.times) < 2:
        raise ValueError("a trajectory needs at least two samples")
    if not window > 0:
        raise ValueError("window must be positive")

    streams = []
    if arms in ("both", "left"):
        streams.append(traj.left)
    if arms in ("both", "right"):
        streams.append(np.array([mirror_pose(T, SAGITTAL_NORMAL)
                                 for T in traj.right]))

    local = np.concatenate([_local_stream(traj.times, s, window)
                            for s in streams])
    log.debug(f"{traj.task_label}: {len(local)} local samples")
    return PoseCloud.uniform(_center(local), {traj.task_label})


def merge(*clouds: PoseCloud) -> PoseCloud:
    poses = np.concatenate([c.poses for c in clouds])
    tasks = frozenset().union(*(c.tasks for c in clouds))
    return PoseCloud.uniform(poses, tasks)


def voxel_occupancy(points, grid_cell: float) -> np.ndarray:
    keys = np.floor(np.asarray(points) / grid_cell).astype(np.int64)
    _, counts = np.unique(keys, axis=0, return_counts=True)
    return counts


def occupancy_ratio(points, grid_cell: float) -> float:
    counts = voxel_occupancy(points, grid_cell)
    return float(counts.max() / counts.min())


def cluster_resample(cloud: PoseCloud, grid_cell: float = 0.005,
                     target_count: int = 500, rng_seed: int = 0) -> PoseCloud:
    """
    Voxelize translations and draw the same number of samples from every
    occupied voxel (with replacement only where a voxel runs short).

    Output samples are grouped voxel by voxel in lexicographic voxel order,
    so neighbouring samples are spatially close.
    """
    if len(cloud) == 0:
        raise ValueError("cannot resample an empty cloud")
    if not grid_cell > 0:
        raise ValueError("grid cell must be positive")

    rng = np.random.default_rng(rng_seed)
    keys = np.floor(cloud.translations / grid_cell).astype(np.int64)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    n_vox = int(inverse.max()) + 1

    quota = np.full(n_vox, target_count // n_vox)
    quota[rng.permutation(n_vox)[:target_count % n_vox]] += 1

    picks = []
    for v in range(n_vox):
        if quota[v] == 0:
            continue
        members = np.flatnonzero(inverse == v)
        picks.append(rng.choice(members, size=quota[v],
                                replace=quota[v] > len(members)))

    idx = np.concatenate(picks)
    log.debug(f"resampled {len(cloud)} samples over {n_vox} voxels "
              f"into {len(idx)}")
    return PoseCloud.uniform(cloud.poses[idx], cloud.tasks)


def _tangent_frame(tangent, up=(0.0, 0.0, 1.0)) -> np.ndarray:
    z = tangent / np.linalg.norm(tangent)
    x = np.cross(up, z)
    if np.linalg.norm(x) < 1e-9:
        x = np.cross((1.0, 0.0, 0.0), z)
    x /= np.linalg.norm(x)
    return np.column_stack([x, np.cross(z, x), z])


def _smoothstep(s):
    return 0.5 - 0.5 * np.cos(np.pi * s)


def _pick_place(t, rng):
    hops = max(2, int(t[-1] / 2.0) + 1)
    waypoints = rng.uniform(-0.05, 0.05, size=(hops + 1, 3))
    tilts = rng.uniform(-np.radians(10), np.radians(10), size=(hops + 1, 3))
    seg = np.minimum((t / t[-1] * hops).astype(int), hops - 1)
    s = _smoothstep(t / t[-1] * hops - seg)[:, None]
    p = (1 - s) * waypoints[seg] + s * waypoints[seg + 1]
    r = (1 - s) * tilts[seg] + s * tilts[seg + 1]
    R = [rotation_about(v / np.linalg.norm(v), np.linalg.norm(v))
         if np.linalg.norm(v) > 0 else np.eye(3) for v in r]
    return p, np.array(R)


def _suturing(t, rng):
    phase = rng.uniform(0, 2 * np.pi)
    f_loop, f_sweep = 0.1, 0.5
    p = 0.007 * np.column_stack([np.cos(2 * np.pi * f_loop * t + phase),
                                 np.sin(2 * np.pi * f_loop * t + phase),
                                 0.5 * np.sin(2 * np.pi * 0.05 * t)])
    sweep = np.radians(60) * np.sin(2 * np.pi * f_sweep * t)
    R = []
    for ti, a in zip(t, sweep):
        tilt = np.radians(15) * np.sin(2 * np.pi * 0.03 * ti + phase)
        Rt = rotation_about((1.0, 0.0, 0.0), tilt)
        R.append(Rt @ rotation_about((0.0, 0.0, 1.0), a))
    return p, np.array(R)


def _cutting(t, rng):
    phase = rng.uniform(0, 2 * np.pi)
    stroke = 0.03 * np.sin(2 * np.pi * 0.25 * t + phase)
    advance = 0.03 * (2 * t / t[-1] - 1)
    p = np.column_stack([stroke, advance, np.zeros_like(t)])
    pitch = rotation_about((0.0, 1.0, 0.0), np.radians(30))
    return p, np.repeat(pitch[None], len(t), axis=0)


def _path_tracking(t, rng):
    phase = rng.uniform(0, 2 * np.pi, size=3)
    w = 2 * np.pi * np.array([0.1, 0.15, 0.25])
    p = 0.015 * np.sin(np.outer(t, w) + phase)
    v = 0.015 * w * np.cos(np.outer(t, w) + phase)
    return p, np.array([_tangent_frame(vi) for vi in v])


_GENERATORS = {
    "pick_place": _pick_place,
    "suturing": _suturing,
    "cutting": _cutting,
    "path_tracking": _path_tracking,
}


def synthesize_task(label: str, params: GeneratorSettings = GeneratorSettings(),
                    rng_seed: int = 0) -> RawTrajectory:
    """
    Deterministic synthetic stand-in for recorded task motion.

    The right hand repeats the left hand's motion mirrored across the
    sagittal plane, with independent jitter.
    """
    try:
        gen = _GENERATORS[label]
    except KeyError:
        raise UnknownLabel(f"unknown task label {label!r}") from None

    rng = np.random.default_rng(rng_seed)
    t = np.arange(int(round(params.duration * params.rate))) / params.rate
    p, R = gen(t, rng)

    def stream(side):
        q = p + rng.normal(0.0, params.jitter, size=p.shape)
        q = q + np.array([0.0, side * params.hand_spacing, 0.0])
        return np.array([make_pose(Ri, qi) for Ri, qi in zip(R, q)])

    left = stream(1.0)
    right = np.array([mirror_pose(T, SAGITTAL_NORMAL) for T in stream(1.0)])
    return RawTrajectory(t, left, right, label)
