#!/usr/bin/env python3

"""
    Copyright © 2024 Mia Herkt
    Licensed under the EUPL, Version 1.2 or - as soon as approved
    by the European Commission - subsequent versions of the EUPL
    (the "License");
    You may not use this work except in compliance with the License.
    You may obtain a copy of the license at:

        https://joinup.ec.europa.eu/software/page/eupl

    Unless required by applicable law or agreed to in writing,
    software distributed under the License is distributed on an
    "AS IS" basis, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND,
    either express or implied.
    See the License for the specific language governing permissions
    and limitations under the License.
"""

from flask import Flask, render_template
from flask.cli import FlaskGroup
from jinja2 import ChoiceLoader, FileSystemLoader
from multiprocessing import Pool
from pathlib import Path
import click
import datetime
import functools
import json
import math
import sys
import tomllib

import numpy as np

from morphlib.chain import BilateralDesign, articulated_base
from morphlib.design import AnnealSettings, DesignVector, anneal, \
    design_cost, random_baseline
from morphlib.dexterity import cloud_points, normalize_jointly, \
    trace_points, versatility
from morphlib.errors import ConfigError, DataError, NumericalError
from morphlib.ik import IkSettings
from morphlib.io import cloud_name, read_cloud, read_design, \
    read_design_tasks, read_trajectory, write_anneal_trace, write_cloud, \
    write_design, write_design_evolution, write_motion_trace, write_report, \
    write_series, write_trajectory
from morphlib.motion import MassSettings, TransitionSettings, \
    simulate_transition, workspace_transition
from morphlib.pipeline import TASK_LABELS, GeneratorSettings, \
    cluster_resample, extract_local_variation, merge, occupancy_ratio, \
    synthesize_task

DEFAULTS = dict(
    SEED=0,
    JOBS=1,                         # worker processes for fan-out
    OUTPUT_PATH="runs",             # run directories are created here
    TASKS=list(TASK_LABELS),

    GEN_DURATION=20.0,              # s
    GEN_RATE=50.0,                  # Hz
    GEN_JITTER=2e-4,                # m
    GEN_HAND_SPACING=0.08,          # m

    PIPELINE_WINDOW=2.0,            # s
    PIPELINE_GRID_CELL=0.005,       # m
    PIPELINE_TARGET_COUNT=500,

    IK_STEP_SIZE=0.5,
    IK_TOLERANCE=1e-6,
    IK_MAX_ITERS=500,
    IK_DAMPING=1e-3,
    IK_RCOND_THRESHOLD=1e-3,
    IK_JOINT_WEIGHTS=[],            # empty means identity
    IK_TWIST_WEIGHTS=[1.0] * 6,

    DESIGN_IK_MAX_ITERS=50,
    DESIGN_WARM_START=True,
    DESIGN_W1=[1.0, 1.0, 1.0, 0.1, 0.1, 0.1],
    DESIGN_W2=0.01,
    BASELINE_SAMPLES=50,

    ANNEAL_INITIAL_TEMP=0.05,
    ANNEAL_DECAY_RATE=0.995,
    ANNEAL_MAX_ITERS=2000,
    ANNEAL_STALL_ITERS=200,
    ANNEAL_STALL_TOLERANCE=1e-9,
    ANNEAL_SCALE_ANGLES=0.2,        # rad
    ANNEAL_SCALE_POINTS=0.03,       # m
    ANNEAL_SCALE_OFFSET=0.02,       # m
    ANNEAL_RESTART_PROBABILITY=0.0,
    ANNEAL_OPTIMIZE_BASE_OFFSET=False,

    SYSTEM_BASE_OFFSET=[0.1, 0.0, -0.1],
    SYSTEM_CENTER_DISTANCE=0.3,
    SYSTEM_TOOL_OFFSET=[0.0, 0.0, 0.0],
    ARM_JOINT_LIMIT=math.pi,
    BASE_START=[0.0] * 6,

    MASS_BASE=10.0,
    MASS_ARM=1.0,
    MASS_BETA=[0.0, 0.0, 0.0],      # K, L, R
    MASS_ACTIVATE=["K"],
    MASS_SWITCHING="tanh",

    MOTION_Q=200.0,
    MOTION_Q_ROTATION=20.0,
    MOTION_DURATION=2.0,            # s
    MOTION_DT=0.01,                 # s
    MOTION_SHIFT=[0.12, 0.0, 0.05], # m, w2 relative to w1
    MOTION_DAMPING=1e-3,
    MOTION_RCOND_THRESHOLD=1e-9,

    DEXTERITY_RAW_METRIC=False,
    # An all-task design passes when its worst task mean is at most this
    # multiple of every single-task design's mean on its own task.
    VERSATILITY_MARGIN=1.1,
)

# Lists whose length is not fixed by their default.
VARIABLE_LENGTH = {"TASKS", "IK_JOINT_WEIGHTS", "MASS_ACTIVATE"}


def validate_config(doc: dict) -> dict:
    """
    Check a configuration document against the defaults: unknown keys and
    values of the wrong type are rejected.
    """
    out = {}
    for key, value in doc.items():
        if key not in DEFAULTS:
            raise ConfigError(f"unknown configuration key {key!r}")

        default = DEFAULTS[key]
        match default:
            case bool():
                ok = isinstance(value, bool)
            case int():
                ok = isinstance(value, int) and not isinstance(value, bool)
            case float():
                ok = isinstance(value, (int, float)) \
                    and not isinstance(value, bool)
                if ok:
                    value = float(value)
            case str():
                ok = isinstance(value, str)
            case list():
                ok = isinstance(value, list) and (
                    key in VARIABLE_LENGTH or len(value) == len(default))
            case _:
                ok = True

        if not ok:
            raise ConfigError(f"{key}: expected a value like {default!r}, "
                              f"got {value!r}")
        out[key] = value

    for label in out.get("TASKS", []):
        if label not in TASK_LABELS:
            raise ConfigError(f"TASKS: unknown task label {label!r}")
    return out


def _load_toml(f) -> dict:
    try:
        return validate_config(tomllib.load(f))
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid configuration file: {e}") from None


app = Flask(__name__, instance_relative_config=True)
app.config.update(DEFAULTS)

try:
    app.config.from_file("config.toml", load=_load_toml, text=False,
                         silent=True)
except ConfigError as e:
    print(f"Error: instance configuration: {e}")
    sys.exit(2)

app.jinja_loader = ChoiceLoader([
    FileSystemLoader(str(Path(app.instance_path) / "templates")),
    app.jinja_loader
])


def configure(path=None, **overrides):
    """Load a configuration document, then apply command-line overrides."""
    if path:
        app.config.from_file(str(Path(path).resolve()), load=_load_toml,
                             text=False)
    keys = {"seed": "SEED", "out": "OUTPUT_PATH", "jobs": "JOBS"}
    app.config.update({keys[k]: v for k, v in overrides.items()
                       if v is not None})


def _settings(cls, **kwargs):
    try:
        return cls(**kwargs)
    except ValueError as e:
        raise ConfigError(f"{cls.__name__}: {e}") from None


def ik_settings(max_iters: int | None = None) -> IkSettings:
    c = app.config
    return _settings(
        IkSettings,
        step_size=c["IK_STEP_SIZE"],
        tolerance=c["IK_TOLERANCE"],
        max_iters=c["IK_MAX_ITERS"] if max_iters is None else max_iters,
        damping=c["IK_DAMPING"],
        rcond_threshold=c["IK_RCOND_THRESHOLD"],
        joint_weights=tuple(c["IK_JOINT_WEIGHTS"]) or None,
        twist_weights=tuple(c["IK_TWIST_WEIGHTS"]))


def design_ik_settings() -> IkSettings:
    return ik_settings(app.config["DESIGN_IK_MAX_ITERS"])


def anneal_settings() -> AnnealSettings:
    c = app.config
    return _settings(
        AnnealSettings,
        initial_temp=c["ANNEAL_INITIAL_TEMP"],
        decay_rate=c["ANNEAL_DECAY_RATE"],
        max_iters=c["ANNEAL_MAX_ITERS"],
        scale_angles=c["ANNEAL_SCALE_ANGLES"],
        scale_points=c["ANNEAL_SCALE_POINTS"],
        scale_offset=c["ANNEAL_SCALE_OFFSET"],
        rng_seed=c["SEED"],
        w1=tuple(c["DESIGN_W1"]),
        w2=c["DESIGN_W2"],
        stall_iters=c["ANNEAL_STALL_ITERS"],
        stall_tolerance=c["ANNEAL_STALL_TOLERANCE"],
        restart_probability=c["ANNEAL_RESTART_PROBABILITY"],
        optimize_base_offset=c["ANNEAL_OPTIMIZE_BASE_OFFSET"])


def mass_settings() -> MassSettings:
    c = app.config
    return _settings(MassSettings, base_mass=c["MASS_BASE"],
                     arm_mass=c["MASS_ARM"], betas=tuple(c["MASS_BETA"]),
                     activate=tuple(c["MASS_ACTIVATE"]),
                     switching=c["MASS_SWITCHING"])


def generator_settings() -> GeneratorSettings:
    c = app.config
    return _settings(GeneratorSettings, duration=c["GEN_DURATION"],
                     rate=c["GEN_RATE"], jitter=c["GEN_JITTER"],
                     hand_spacing=c["GEN_HAND_SPACING"])


def transition_settings() -> TransitionSettings:
    c = app.config
    return _settings(TransitionSettings, duration=c["MOTION_DURATION"],
                     dt=c["MOTION_DT"], weight=c["MOTION_Q"],
                     rotation_weight=c["MOTION_Q_ROTATION"],
                     damping=c["MOTION_DAMPING"],
                     rcond_threshold=c["MOTION_RCOND_THRESHOLD"])


def initial_design() -> DesignVector:
    return DesignVector.initial(app.config["SYSTEM_BASE_OFFSET"])


def arm_chain(design: DesignVector):
    return design.to_chain(app.config["ARM_JOINT_LIMIT"],
                           app.config["SYSTEM_TOOL_OFFSET"])


def bilateral(design: DesignVector) -> BilateralDesign:
    c = app.config
    return BilateralDesign(
        arm=arm_chain(design),
        base_chain=articulated_base(),
        base_offset=design.base_offset,
        center_distance=c["SYSTEM_CENTER_DISTANCE"],
        tool_offset=c["SYSTEM_TOOL_OFFSET"])


def run_dir(command: str) -> Path:
    """
    Fresh `<OUTPUT_PATH>/<command>-<timestamp>` directory holding the
    resolved configuration.
    """
    base = Path(app.config["OUTPUT_PATH"])
    stamp = datetime.datetime.now().strftime("%Y%m%d-%H%M%S")
    path = base / f"{command}-{stamp}"
    n = 1
    while path.exists():
        path = base / f"{command}-{stamp}-{n}"
        n += 1
    path.mkdir(parents=True)

    with open(path / "config.json", "w", encoding="utf-8") as f:
        json.dump({k: app.config[k] for k in DEFAULTS}, f, indent=2,
                  sort_keys=True)
        f.write("\n")

    app.logger.debug(f"run directory: {path}")
    return path


def _name(path, taken: set) -> str:
    name = Path(path).name.split(".")[0]
    while name in taken:
        name += "_"
    taken.add(name)
    return name


def run_options(f):
    """
    Shared --config/--seed/--out/--jobs flags, and the mapping from
    failures to exit codes.
    """
    @click.option("--jobs", type=click.IntRange(1),
                  help="Worker processes (overrides JOBS).")
    @click.option("--out", type=click.Path(file_okay=False),
                  help="Output directory (overrides OUTPUT_PATH).")
    @click.option("--seed", type=click.IntRange(0),
                  help="Random seed (overrides SEED).")
    @click.option("--config", "config_path",
                  type=click.Path(exists=True, dir_okay=False),
                  help="TOML configuration file.")
    @functools.wraps(f)
    def wrapper(config_path, seed, out, jobs, **kwargs):
        try:
            configure(config_path, seed=seed, out=out, jobs=jobs)
            return f(**kwargs)
        except ConfigError as e:
            print(f"Error: {e}", file=sys.stderr)
            sys.exit(2)
        except NumericalError as e:
            print(f"Error: numerical failure: {e}", file=sys.stderr)
            sys.exit(3)
        except (OSError, DataError) as e:
            print(f"Error: {e}", file=sys.stderr)
            sys.exit(4)
    return wrapper


def _selected_tasks(task: str | None) -> list[str]:
    if task is None or task == "all":
        return list(app.config["TASKS"])
    return [task]


task_option = click.option(
    "--task", type=click.Choice(TASK_LABELS + ("all",)),
    help="Restrict to one task label.")


@app.cli.command("generate")
@task_option
@run_options
def generate(task):
    """
    Synthesize task trajectories

    Writes one trajectory CSV per task label. Each task draws from its own
    seed derived from SEED, so files do not depend on which tasks are
    selected.
    """
    out = run_dir("generate")
    params = generator_settings()
    for label in _selected_tasks(task):
        seed = app.config["SEED"] + TASK_LABELS.index(label)
        traj = synthesize_task(label, params, seed)
        write_trajectory(out / f"{label}.csv", traj)
        print(f"{label}: {len(traj.times)} samples -> {out / label}.csv")


@app.cli.command("preprocess")
@click.argument("trajectories", nargs=-1,
                type=click.Path(exists=True, dir_okay=False))
@run_options
def preprocess(trajectories):
    """
    Extract and resample local-variation clouds

    Reads trajectory CSVs (or synthesizes TASKS when none are given) and
    writes one resampled cloud per task plus the resampled union of them:
    `all.csv` when every task is present, `cutting+suturing.csv` and the
    like otherwise.
    """
    c = app.config
    if trajectories:
        trajs = [read_trajectory(p) for p in trajectories]
    else:
        trajs = [synthesize_task(label, generator_settings(),
                                 c["SEED"] + TASK_LABELS.index(label))
                 for label in c["TASKS"]]

    out = run_dir("preprocess")
    cell = c["PIPELINE_GRID_CELL"]
    local = []
    for traj in trajs:
        cloud = extract_local_variation(traj, c["PIPELINE_WINDOW"])
        local.append(cloud)
        resampled = cluster_resample(cloud, cell, c["PIPELINE_TARGET_COUNT"],
                                     c["SEED"])
        write_cloud(out / f"{traj.task_label}.csv", resampled)
        before = occupancy_ratio(cloud.translations, cell)
        after = occupancy_ratio(resampled.translations, cell)
        print(f"{traj.task_label}: {len(cloud)} local samples, voxel "
              f"occupancy ratio {before:.1f} -> {after:.1f}")

    if len(local) > 1:
        union = cluster_resample(merge(*local), cell,
                                 c["PIPELINE_TARGET_COUNT"], c["SEED"])
        path = out / f"{cloud_name(union.tasks)}.csv"
        write_cloud(path, union)
        print(f"{path.stem}: {len(union)} samples -> {path}")


def do_optimize(job):
    """Anneal one cloud; module level so it can run in a worker process."""
    name, cloud, initial, settings, ik, limit, tool, warm, jobs = job
    best, trace = anneal(initial, cloud, settings, ik, joint_limit=limit,
                         tool_offset=tool, warm_start=warm, jobs=jobs)
    return name, best, trace


@app.cli.command("optimize")
@click.argument("clouds", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@task_option
@click.option("--initial", "initial_path",
              type=click.Path(exists=True, dir_okay=False),
              help="Start from this design instead of the default arm.")
@run_options
def optimize(clouds, task, initial_path):
    """
    Optimize the arm morphology on task clouds

    Runs simulated annealing once per cloud file and writes the best design,
    the annealing trace, the design evolution and a text report for each.
    With --task only clouds of that task are used. Clouds are optimized in
    parallel when JOBS > 1; a single cloud solved without warm starts fans
    its IK solves out over JOBS processes instead.
    """
    c = app.config
    taken = set()
    named = [(_name(p, taken), read_cloud(p)) for p in clouds]
    if task and task != "all":
        named = [(n, cl) for n, cl in named if task in cl.tasks]
        if not named:
            raise DataError(f"no cloud holds task {task!r}")

    initial = read_design(initial_path) if initial_path else initial_design()
    settings = anneal_settings()
    ik = design_ik_settings()
    limit, tool = c["ARM_JOINT_LIMIT"], tuple(c["SYSTEM_TOOL_OFFSET"])
    warm = c["DESIGN_WARM_START"]
    fan_out = c["JOBS"] > 1 and len(named) > 1
    # Pool workers are daemonic and cannot start pools of their own.
    inner = 1 if fan_out else c["JOBS"]
    work = [(n, cl, initial, settings, ik, limit, tool, warm, inner)
            for n, cl in named]

    if fan_out:
        with Pool(min(c["JOBS"], len(work))) as p:
            results = list(p.imap(do_optimize, work))
    else:
        results = [do_optimize(w) for w in work]

    out = run_dir("optimize")
    clouds_by_name = dict(named)
    for name, best, trace in results:
        cloud = clouds_by_name[name]
        score = functools.partial(design_cost, cloud=cloud, ik_settings=ik,
                                  w1=settings.w1, w2=settings.w2,
                                  joint_limit=limit, tool_offset=tool,
                                  warm_start=warm, jobs=c["JOBS"])
        initial_cost, best_cost = score(initial), score(best)

        baseline = None
        if c["BASELINE_SAMPLES"] > 0:
            baseline = random_baseline(
                cloud, c["BASELINE_SAMPLES"], c["SEED"], ik, settings.w1,
                settings.w2, joint_limit=limit, tool_offset=tool,
                jobs=c["JOBS"])

        write_design(out / f"{name}.design.json", best, cost=best_cost,
                     tasks=sorted(cloud.tasks))
        write_anneal_trace(out / f"{name}.anneal.csv", trace)
        write_design_evolution(out / f"{name}.evolution.csv", trace)
        write_series(out / f"{name}.best_cost.dat", range(len(trace)),
                     trace.best_costs)

        report = render_template(
            "optimize.txt", name=name, tasks=sorted(cloud.tasks),
            samples=len(cloud), iterations=len(trace),
            accepted=sum(trace.accepted), initial_cost=initial_cost,
            best_cost=best_cost,
            baseline=None if baseline is None else {
                "n": len(baseline),
                "median": float(np.median(baseline)),
                "ratio": best_cost / float(np.median(baseline))},
            joints=list(zip(best.axes.tolist(), best.axis_points.tolist())))
        (out / f"{name}.report.txt").write_text(report, encoding="utf-8")
        print(report)


def _transition(design: DesignVector, informed: bool):
    system = bilateral(design)
    start, w1, w2 = workspace_transition(system, app.config["MOTION_SHIFT"],
                                         app.config["BASE_START"])
    ts = transition_settings()
    app.logger.debug(f"transition {w1[:3, 3]} -> {w2[:3, 3]}, "
                     f"informed={informed}")
    trace = simulate_transition(system, None, w1, w2, ts.duration, ts.dt,
                                informed, mass_settings(), ts, start)
    return system, trace


def _modes(informed: bool | None) -> list[bool]:
    return [True, False] if informed is None else [informed]


def _transitions(design: DesignVector, informed: bool | None):
    """
    Traces per mode with their dexterity normalized on shared bounds, and
    the informed / uninformed std ratio when both modes ran.
    """
    runs = {mode: _transition(design, mode) for mode in _modes(informed)}
    reports = normalize_jointly(*(trace_points(trace, s)
                                  for s, trace in runs.values()))
    out = {}
    for (mode, (s, trace)), report in zip(runs.items(), reports):
        out[mode] = (s, trace, report)
    ratio = None
    if len(out) == 2:
        std_off = out[False][2].std
        ratio = out[True][2].std / std_off if std_off > 0 else math.nan
    return out, ratio


def _write_transition(out: Path, prefix: str, s, trace, report):
    write_motion_trace(out / f"{prefix}.motion.csv", trace, s,
                       report.composite)
    write_series(out / f"{prefix}.dexterity.dat", trace.times,
                 report.composite)
    write_series(out / f"{prefix}.potential.dat", trace.times,
                 trace.potential)
    write_series(out / f"{prefix}.scale.dat", trace.times, trace.base_scale)
    write_report(out / f"{prefix}.dexterity.csv", report)


MODE_NAMES = {True: "informed", False: "uninformed"}

informed_option = click.option(
    "--informed", type=bool, default=None,
    help="Run only the design-informed (true) or plain (false) motion.")


@app.cli.command("simulate")
@click.argument("design", required=False,
                type=click.Path(exists=True, dir_okay=False))
@informed_option
@run_options
def simulate(design, informed):
    """
    Simulate a workspace transition

    Moves both tools from w1 to w2 (MOTION_SHIFT apart) with and without
    design-informed null-space motion and writes the motion traces and
    per-step dexterity series.
    """
    d = read_design(design) if design else initial_design()
    runs, ratio = _transitions(d, informed)
    out = run_dir("simulate")

    for mode, (s, trace, report) in runs.items():
        name = MODE_NAMES[mode]
        _write_transition(out, name, s, trace, report)
        print(f"{name}: {len(trace)} steps, dexterity std "
              f"{report.std:.4f}, final H {trace.potential[-1]:.3g}, "
              f"{sum(trace.damped)} damped steps")

    if ratio is not None:
        print(f"dexterity std ratio (informed / uninformed): {ratio:.3f}")


def _cloud_reports(designs, clouds):
    """Dexterity of every design on every cloud, on shared bounds."""
    ik = design_ik_settings()
    pairs = [(dn, cn) for dn, _ in designs for cn, _ in clouds]
    groups = [cloud_points(arm_chain(d), cl, ik)
              for _, d in designs for _, cl in clouds]
    return dict(zip(pairs, normalize_jointly(*groups)))


def _headline(report) -> float:
    if app.config["DEXTERITY_RAW_METRIC"]:
        return report.aggregates(report.raw_metric)["mean"]
    return report.mean


def _load_designs(paths):
    taken = set()
    if not paths:
        return [(_name("initial", taken), initial_design())]
    return [(_name(p, taken), read_design(p)) for p in paths]


def _versatility(designs, paths, clouds, means):
    """
    Ratios of every all-task design against the single-task designs whose
    task has a cloud of its own. Designs carry their tasks from optimize.
    """
    own_cloud = {next(iter(cl.tasks)): cn for cn, cl in clouds
                 if len(cl.tasks) == 1}
    tasks = {dn: read_design_tasks(p) for (dn, _), p in zip(designs, paths)}
    specialists = {dn: own_cloud[next(iter(ts))] for dn, ts in tasks.items()
                   if len(ts) == 1 and next(iter(ts)) in own_cloud}
    task_means = {k: m for k, m in means.items()
                  if k[1] in own_cloud.values()}

    out = []
    for dn, ts in tasks.items():
        if len(ts) < 2 or not specialists:
            continue
        for s, ratio in versatility(task_means, dn, specialists).items():
            app.logger.debug(f"versatility {dn} / {s}: {ratio:.4g}")
            out.append({"generalist": dn, "specialist": s, "ratio": ratio})
    return out


@app.cli.command("evaluate")
@click.argument("clouds", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--design", "designs", multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Design file; may be repeated. Defaults to the initial "
                   "arm.")
@run_options
def evaluate(clouds, designs):
    """
    Evaluate design dexterity over task clouds

    Solves IK for every anchored cloud sample and reports condition,
    manipulability, joint-limit and composite terms per sample.
    """
    taken = set()
    named_clouds = [(_name(p, taken), read_cloud(p)) for p in clouds]
    named_designs = _load_designs(designs)
    reports = _cloud_reports(named_designs, named_clouds)

    out = run_dir("evaluate")
    for (dn, cn), report in reports.items():
        write_report(out / f"{dn}__{cn}.csv", report)
        print(f"{dn} on {cn}: mean {_headline(report):.4f} "
              f"std {report.std:.4f}")


@app.cli.command("compare")
@click.argument("clouds", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--design", "designs", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Design file; repeat for every design to compare.")
@informed_option
@run_options
def compare(clouds, designs, informed):
    """
    Compare designs across tasks and transitions

    For every design: dexterity on every cloud (with the worst case over
    clouds as the versatility score) and the informed / uninformed
    transition traces. Designs written by optimize remember their tasks;
    each all-task design is checked against the single-task ones.
    """
    taken = set()
    named_clouds = [(_name(p, taken), read_cloud(p)) for p in clouds]
    named_designs = _load_designs(designs)
    reports = _cloud_reports(named_designs, named_clouds)

    out = run_dir("compare")
    means_of = {k: _headline(r) for k, r in reports.items()}
    rows = []
    for dn, d in named_designs:
        means = [means_of[dn, cn] for cn, _ in named_clouds]
        for cn, _ in named_clouds:
            write_report(out / f"{dn}__{cn}.csv", reports[dn, cn])
        write_series(out / f"{dn}.tasks.dat", range(len(means)), means)

        runs, ratio = _transitions(d, informed)
        stds = {}
        for mode, (s, trace, report) in runs.items():
            _write_transition(out, f"{dn}.{MODE_NAMES[mode]}", s, trace,
                              report)
            stds[MODE_NAMES[mode]] = report.std

        rows.append({"name": dn, "means": means, "worst": max(means),
                     "stds": stds, "ratio": ratio})

    report = render_template("compare.txt",
                             clouds=[cn for cn, _ in named_clouds],
                             rows=rows,
                             raw_metric=app.config["DEXTERITY_RAW_METRIC"],
                             versatility=_versatility(named_designs, designs,
                                                      named_clouds, means_of),
                             margin=app.config["VERSATILITY_MARGIN"])
    (out / "report.txt").write_text(report, encoding="utf-8")
    print(report)


cli = FlaskGroup(create_app=lambda: app, add_default_commands=False,
                 load_dotenv=False)


def main():
    cli.main(prog_name="morphdex")


if __name__ == "__main__":
    main()
