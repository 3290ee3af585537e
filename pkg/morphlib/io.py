"""
File formats: trajectory and cloud CSVs, design JSON, anneal/motion traces,
dexterity reports and two-column plot series.

All writers emit UTF-8 with LF line endings and fixed-precision numbers, so
identical inputs give byte-identical files.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .design import DesignVector
from .errors import FormatError
from .pipeline import TASK_LABELS, PoseCloud, RawTrajectory
from .se3 import make_pose, quat_from_rotation, rotation_from_quat

TRAJECTORY_HEADER = ["t", "arm", "x", "y", "z", "qw", "qx", "qy", "qz"]
CLOUD_HEADER = ["arm", "x", "y", "z", "qw", "qx", "qy", "qz", "weight"]
ANNEAL_HEADER = ["iter", "cost", "accepted", "temperature", "best_cost"]
# Stem of a cloud that holds every task; other unions join their labels
# with "+".
UNION_STEM = "all"


def _num(x) -> str:
    x = float(x)
    if not np.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    s = f"{x:.9f}"
    return "0.000000000" if s == "-0.000000000" else s


def _pose_fields(T) -> list[str]:
    return [_num(v) for v in T[:3, 3]] + \
        [_num(v) for v in quat_from_rotation(T[:3, :3])]


def _writer(f):
    return csv.writer(f, lineterminator="\n")


def _open(path, mode="r"):
    return open(path, mode, encoding="utf-8", newline="")


def _rows(path, header):
    try:
        with _open(path) as f:
            reader = csv.reader(f)
            first = next(reader, None)
            if first != header:
                raise FormatError(f"{path}: expected header {','.join(header)}")
            return [row for row in reader if row]
    except UnicodeDecodeError as e:
        raise FormatError(f"{path}: {e}") from None


def _floats(path, row, lineno) -> list[float]:
    try:
        return [float(v) for v in row]
    except ValueError:
        raise FormatError(f"{path}:{lineno}: not a number in {row}") from None


def _pose(path, values, lineno) -> np.ndarray:
    x, y, z, qw, qx, qy, qz = values
    q = np.array([qw, qx, qy, qz])
    if not np.isclose(np.linalg.norm(q), 1.0, atol=1e-6):
        raise FormatError(f"{path}:{lineno}: quaternion is not normalized")
    return make_pose(rotation_from_quat(q), (x, y, z))


def write_trajectory(path, traj: RawTrajectory):
    with _open(path, "w") as f:
        w = _writer(f)
        w.writerow(TRAJECTORY_HEADER)
        for t, L, R in zip(traj.times, traj.left, traj.right):
            w.writerow([_num(t), "L"] + _pose_fields(L))
            w.writerow([_num(t), "R"] + _pose_fields(R))


def read_trajectory(path, label: str | None = None) -> RawTrajectory:
    """Read a trajectory CSV; the task label defaults to the file stem."""
    path = Path(path)
    label = label or path.stem
    if label not in TASK_LABELS:
        raise FormatError(f"{path}: cannot tell the task from {label!r}")

    times, streams = [], {"L": [], "R": []}
    for i, row in enumerate(_rows(path, TRAJECTORY_HEADER), start=2):
        if len(row) != len(TRAJECTORY_HEADER) or row[1] not in streams:
            raise FormatError(f"{path}:{i}: malformed row")
        t, *values = _floats(path, [row[0]] + row[2:], i)
        streams[row[1]].append(_pose(path, values, i))
        if row[1] == "L":
            times.append(t)

    if len(streams["L"]) != len(streams["R"]) or not times:
        raise FormatError(f"{path}: left and right samples do not pair up")
    try:
        return RawTrajectory(np.array(times), np.array(streams["L"]),
                             np.array(streams["R"]), label)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from None


def cloud_name(tasks) -> str:
    """File stem under which read_cloud recovers `tasks`."""
    if set(tasks) == set(TASK_LABELS):
        return UNION_STEM
    return "+".join(sorted(tasks))


def write_cloud(path, cloud: PoseCloud):
    with _open(path, "w") as f:
        w = _writer(f)
        w.writerow(CLOUD_HEADER)
        for T, weight in zip(cloud.poses, cloud.weights):
            w.writerow(["L"] + _pose_fields(T) + [_num(weight)])


def read_cloud(path, tasks=()) -> PoseCloud:
    poses, weights = [], []
    for i, row in enumerate(_rows(path, CLOUD_HEADER), start=2):
        if len(row) != len(CLOUD_HEADER):
            raise FormatError(f"{path}:{i}: malformed row")
        *values, weight = _floats(path, row[1:], i)
        poses.append(_pose(path, values, i))
        weights.append(weight)
    if not poses:
        raise FormatError(f"{path}: empty cloud")
    if not tasks:
        stem = Path(path).stem
        labels = TASK_LABELS if stem == UNION_STEM else stem.split("+")
        tasks = set(labels) & set(TASK_LABELS)
    return PoseCloud(np.array(poses), np.array(weights), frozenset(tasks))


def write_design(path, design: DesignVector, **extra):
    doc = {
        "angles": design.angles.round(12).tolist(),
        "points": design.points.round(12).tolist(),
        "base_offset": design.base_offset.round(12).tolist(),
        "axes": design.axes.round(12).tolist(),
        **extra,
    }
    with _open(path, "w") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def read_design(path) -> DesignVector:
    try:
        with _open(path) as f:
            doc = json.load(f)
        return DesignVector(np.array(doc["angles"]), np.array(doc["points"]),
                            np.array(doc["base_offset"]))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise FormatError(f"{path}: not a design file ({e})") from None


def read_design_tasks(path) -> frozenset:
    """Task labels a design was optimized for; empty when not recorded."""
    try:
        with _open(path) as f:
            return frozenset(json.load(f).get("tasks", ()))
    except (json.JSONDecodeError, AttributeError, TypeError) as e:
        raise FormatError(f"{path}: not a design file ({e})") from None


def write_anneal_trace(path, trace):
    with _open(path, "w") as f:
        w = _writer(f)
        w.writerow(ANNEAL_HEADER)
        for i, cost, accepted, temp, best in trace.rows():
            w.writerow([i, _num(cost), int(accepted), _num(temp), _num(best)])


def write_design_evolution(path, trace):
    """Design parameters per iteration, one column per scalar."""
    with _open(path, "w") as f:
        w = _writer(f)
        w.writerow(["iter"] + [f"x_{k + 1}"
                               for k in range(DesignVector.SIZE)])
        for i, x in enumerate(trace.designs):
            w.writerow([i] + [_num(v) for v in x])


def write_motion_trace(path, trace, sys, dexterity=None):
    """
    One row per step and segment: `t,seg,q_1..q_n,dext,H,scaleK`, with the
    shorter base segment padded by empty fields.
    """
    dexterity = trace.dexterity if dexterity is None else dexterity
    n = max(sys.base_chain.dof, sys.arm.dof)
    with _open(path, "w") as f:
        w = _writer(f)
        w.writerow(["t", "seg"] + [f"q_{k + 1}" for k in range(n)]
                   + ["dext", "H", "scaleK"])
        for t, q, d, H, s in zip(trace.times, trace.states, dexterity,
                                 trace.potential, trace.base_scale):
            for seg, qs in zip("KLR", sys.split(q)):
                cells = [_num(v) for v in qs] + [""] * (n - len(qs))
                w.writerow([_num(t), seg] + cells + [_num(d), _num(H),
                                                     _num(s)])


def write_report(path, report, labels=None):
    """Per-point dexterity terms as CSV and the summary as `<path>.json`."""
    path = Path(path)
    with _open(path, "w") as f:
        w = _writer(f)
        w.writerow(["point", "condition", "manipulability", "joint_limit",
                    "raw_metric", "composite"])
        for i, row in enumerate(zip(report.condition, report.manipulability,
                                    report.joint_limit, report.raw_metric,
                                    report.composite)):
            name = labels[i] if labels is not None else i
            w.writerow([name] + [_num(v) for v in row])

    with _open(path.with_suffix(".json"), "w") as f:
        json.dump(report.summary(), f, indent=2, sort_keys=True)
        f.write("\n")


def write_series(path, x, y):
    """Whitespace-separated two-column series for generic plotting tools."""
    with _open(path, "w") as f:
        for a, b in zip(x, y):
            f.write(f"{_num(a)} {_num(b)}\n")
