"""
Simulated-annealing morphology optimization of one (mirrored) 7-DOF arm.

A candidate is scored by anchoring the normalized task cloud at the arm's
home pose and solving warm-started IK for every sample in order: residual
error twists and joint-space jumps between consecutive solutions both add
to the cost.
"""

import logging
from dataclasses import dataclass, field
from multiprocessing import Pool

import numpy as np

from .chain import ChainDesign, JointSpec, anthropomorphic_arm
from .errors import ConstraintUnsatisfiable, NumericallySingular
from .ik import IkResult, IkSettings, solve_ik, wrap_angles
from .pipeline import PoseCloud
from .se3 import translation

log = logging.getLogger(__name__)

N_JOINTS = 7
# Joints 1-4 own an axis point each; joints 5-7 share the wrist point.
POINT_OF_JOINT = (0, 1, 2, 3, 4, 4, 4)
WRIST = (4, 5, 6)
# Half side of the bounding box every axis point must stay in.
BOX = 0.5
MAX_PARALLEL = 0.999
MAX_REDRAWS = 100

DESIGN_IK = IkSettings(max_iters=50)


def _spherical(angles) -> np.ndarray:
    polar, azimuth = angles[:, 0], angles[:, 1]
    return np.column_stack([np.sin(polar) * np.cos(azimuth),
                            np.sin(polar) * np.sin(azimuth),
                            np.cos(polar)])


def _normalize_angles(angles) -> np.ndarray:
    polar = np.mod(angles[:, 0], 2 * np.pi)
    azimuth = angles[:, 1].copy()
    flip = polar > np.pi
    polar[flip] = 2 * np.pi - polar[flip]
    azimuth[flip] += np.pi
    return np.column_stack([polar, wrap_angles(azimuth)])


@dataclass(frozen=True, eq=False)
class DesignVector:
    """
    Arm morphology as 32 scalars: two spherical angles per joint axis,
    five axis points (the wrist point stored once) and the base offset.
    """
    angles: np.ndarray       # (7, 2) polar, azimuth
    points: np.ndarray       # (5, 3)
    base_offset: np.ndarray  # (3,)

    SIZE = 2 * N_JOINTS + 3 * 5 + 3

    def __post_init__(self):
        for name, shape in (("angles", (N_JOINTS, 2)), ("points", (5, 3)),
                            ("base_offset", (3,))):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != shape:
                raise ValueError(f"{name} must have shape {shape}")
            object.__setattr__(self, name, value)

    @property
    def axes(self) -> np.ndarray:
        return _spherical(self.angles)

    @property
    def axis_points(self) -> np.ndarray:
        return self.points[list(POINT_OF_JOINT)]

    @property
    def wrist_point(self) -> np.ndarray:
        return self.points[4]

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.angles.ravel(), self.points.ravel(),
                               self.base_offset])

    @classmethod
    def from_array(cls, x) -> "DesignVector":
        x = np.asarray(x, dtype=float)
        if x.shape != (cls.SIZE,):
            raise ValueError(f"design vector must have {cls.SIZE} entries")
        return cls(x[:14].reshape(7, 2), x[14:29].reshape(5, 3), x[29:])

    @classmethod
    def from_chain(cls, chain: ChainDesign, base_offset=(0.0, 0.0, 0.0)):
        axes = np.array([j.axis for j in chain.joints])
        angles = np.column_stack([np.arccos(np.clip(axes[:, 2], -1, 1)),
                                  np.arctan2(axes[:, 1], axes[:, 0])])
        points = np.array([j.point for j in chain.joints[:5]])
        return cls(angles, points, np.asarray(base_offset, dtype=float))

    @classmethod
    def initial(cls, base_offset=(0.1, 0.0, -0.1)) -> "DesignVector":
        return cls.from_chain(anthropomorphic_arm(), base_offset)

    def violations(self) -> list[str]:
        out = []
        axes = self.axes
        for a, b in ((4, 5), (4, 6), (5, 6)):
            if abs(axes[a] @ axes[b]) > MAX_PARALLEL:
                out.append(f"wrist axes {a + 1} and {b + 1} are parallel")
        if np.any(np.abs(self.points) > BOX):
            out.append("axis point outside the bounding box")
        norms = np.linalg.norm(self.points, axis=1)
        if np.any(np.diff(norms) < -1e-12):
            out.append("axis points are not ordered by distance from base")
        return out

    @property
    def is_feasible(self) -> bool:
        return not self.violations()

    def to_chain(self, joint_limit: float = np.pi,
                 tool_offset=(0.0, 0.0, 0.0)) -> ChainDesign:
        return ChainDesign(
            joints=[JointSpec(a, p, (-joint_limit, joint_limit))
                    for a, p in zip(self.axes, self.axis_points)],
            home=translation(self.wrist_point + np.asarray(tool_offset)),
            wrist_index=WRIST[0])


@dataclass(frozen=True)
class AnnealSettings:
    initial_temp: float = 0.05
    decay_rate: float = 0.995
    max_iters: int = 2000
    scale_angles: float = 0.2       # rad
    scale_points: float = 0.03      # m
    scale_offset: float = 0.02      # m
    rng_seed: int = 0
    w1: tuple[float, ...] = (1.0, 1.0, 1.0, 0.1, 0.1, 0.1)
    w2: float = 0.01
    stall_iters: int = 200
    stall_tolerance: float = 1e-9
    # Chance of replacing a neighbour by a uniformly drawn design.
    restart_probability: float = 0.0
    optimize_base_offset: bool = False

    def __post_init__(self):
        if not self.initial_temp > 0:
            raise ValueError("initial temperature must be positive")
        if not 0.0 < self.decay_rate < 1.0:
            raise ValueError("decay rate must be in (0, 1)")
        if self.w2 < 0 or min(self.w1) <= 0:
            raise ValueError("cost weights must be positive")

    def temperature(self, i: int) -> float:
        return self.initial_temp * self.decay_rate ** i


@dataclass
class AnnealTrace:
    costs: list = field(default_factory=list)
    accepted: list = field(default_factory=list)
    temperatures: list = field(default_factory=list)
    best_costs: list = field(default_factory=list)
    # Candidate design vectors, one per iteration.
    designs: list = field(default_factory=list)

    def __len__(self):
        return len(self.costs)

    def append(self, cost, accepted, temperature, best_cost, design):
        self.costs.append(float(cost))
        self.accepted.append(bool(accepted))
        self.temperatures.append(float(temperature))
        self.best_costs.append(float(best_cost))
        self.designs.append(design.as_array())

    def rows(self):
        return zip(range(len(self)), self.costs, self.accepted,
                   self.temperatures, self.best_costs)


def anchored_targets(chain: ChainDesign, cloud: PoseCloud) -> np.ndarray:
    """Cloud samples placed at the arm's home pose."""
    return chain.home @ cloud.poses


def _solve_job(args) -> IkResult:
    chain, target, settings = args
    return solve_ik(chain, target, np.zeros(chain.dof), settings)


def solve_cloud(chain: ChainDesign, cloud: PoseCloud,
                ik_settings: IkSettings = DESIGN_IK, warm_start: bool = True,
                jobs: int = 1) -> list[IkResult]:
    """
    IK for every anchored sample, in cloud order.

    With warm starting each solve is seeded by the previous solution, which
    forces a sequential sweep; cold solves may fan out over `jobs` processes.
    """
    targets = anchored_targets(chain, cloud)

    if not warm_start and jobs > 1:
        with Pool(jobs) as p:
            return p.map(_solve_job,
                         [(chain, T, ik_settings) for T in targets])

    results = []
    q = np.zeros(chain.dof)
    for T in targets:
        res = solve_ik(chain, T, q, ik_settings)
        results.append(res)
        if warm_start:
            q = res.q
    return results


def cost_of_solutions(results: list[IkResult], w1, w2: float) -> float:
    w1 = np.asarray(w1, dtype=float)
    cost = 0.0
    prev = None
    for res in results:
        if not res.converged:
            cost += float(res.twist @ (w1 * res.twist))
        if prev is not None:
            dq = res.q - prev
            cost += w2 * float(dq @ dq)
        prev = res.q
    return cost


def design_cost(design: DesignVector, cloud: PoseCloud,
                ik_settings: IkSettings = DESIGN_IK,
                w1=AnnealSettings.w1, w2: float = AnnealSettings.w2, *,
                joint_limit: float = np.pi, tool_offset=(0.0, 0.0, 0.0),
                warm_start: bool = True, jobs: int = 1) -> float:
    """Task cost of a candidate; +inf for degenerate candidates."""
    if len(cloud) == 0:
        raise ValueError("cannot score a design on an empty cloud")
    try:
        chain = design.to_chain(joint_limit, tool_offset)
        results = solve_cloud(chain, cloud, ik_settings, warm_start, jobs)
    except (ValueError, NumericallySingular) as e:
        log.debug(f"infeasible candidate: {e}")
        return np.inf
    return cost_of_solutions(results, w1, w2)


def random_design(rng, base_offset=(0.1, 0.0, -0.1)) -> DesignVector:
    """Uniform draw over axis directions and the bounding box."""
    for _ in range(MAX_REDRAWS):
        angles = np.column_stack([np.arccos(rng.uniform(-1, 1, N_JOINTS)),
                                  rng.uniform(-np.pi, np.pi, N_JOINTS)])
        points = rng.uniform(-BOX, BOX, size=(5, 3))
        points = points[np.argsort(np.linalg.norm(points, axis=1))]
        d = DesignVector(angles, points, np.asarray(base_offset, float))
        if d.is_feasible:
            return d
    raise ConstraintUnsatisfiable("no feasible random design")


def perturb(design: DesignVector, temperature: float,
            settings: AnnealSettings, rng) -> DesignVector:
    """
    Gaussian neighbour of `design` with spreads scaled by
    temperature / initial_temp, redrawn until it is feasible.
    """
    if temperature <= 0:
        return design

    f = temperature / settings.initial_temp
    s_off = settings.scale_offset if settings.optimize_base_offset else 0.0

    for attempt in range(MAX_REDRAWS):
        cand = DesignVector(
            _normalize_angles(design.angles + rng.normal(
                0.0, settings.scale_angles * f, size=design.angles.shape)),
            design.points + rng.normal(0.0, settings.scale_points * f,
                                       size=design.points.shape),
            design.base_offset + rng.normal(0.0, s_off * f, size=3))
        if cand.is_feasible:
            if attempt:
                log.debug(f"perturbation accepted after {attempt} redraws")
            return cand

    raise ConstraintUnsatisfiable(
        f"no feasible neighbour after {MAX_REDRAWS} draws")


def acceptance_probability(delta: float, temperature: float) -> float:
    """Metropolis rule: 1 downhill, exp(-delta / T) uphill, 0 for NaN."""
    if np.isnan(delta):
        return 0.0
    if delta < 0:
        return 1.0
    return float(np.exp(-delta / temperature))


def anneal(initial: DesignVector, cloud: PoseCloud,
           settings: AnnealSettings = AnnealSettings(),
           ik_settings: IkSettings = DESIGN_IK, *,
           joint_limit: float = np.pi, tool_offset=(0.0, 0.0, 0.0),
           warm_start: bool = True,
           jobs: int = 1) -> tuple[DesignVector, AnnealTrace]:
    """
    Metropolis simulated annealing with exponential cooling.

    Stops after max_iters iterations or when the best cost has not improved
    by more than stall_tolerance for stall_iters iterations, and returns the
    best design seen. `jobs` only matters for cold solves, see solve_cloud.
    """
    rng = np.random.default_rng(settings.rng_seed)
    trace = AnnealTrace()

    def cost(d):
        return design_cost(d, cloud, ik_settings, settings.w1, settings.w2,
                           joint_limit=joint_limit, tool_offset=tool_offset,
                           warm_start=warm_start, jobs=jobs)

    if settings.max_iters <= 0:
        return initial, trace

    current, current_cost = initial, cost(initial)
    best, best_cost = current, current_cost
    last_improvement = 0

    for i in range(settings.max_iters):
        temp = settings.temperature(i)
        if (settings.restart_probability > 0
                and rng.random() < settings.restart_probability):
            cand = random_design(rng, current.base_offset)
        else:
            cand = perturb(current, temp, settings, rng)
        cand_cost = cost(cand)

        delta = cand_cost - current_cost
        accept = delta < 0 or (not np.isnan(delta) and rng.random()
                               < acceptance_probability(delta, temp))

        if accept:
            current, current_cost = cand, cand_cost

        if cand_cost < best_cost:
            if best_cost - cand_cost > settings.stall_tolerance:
                last_improvement = i
            best, best_cost = cand, cand_cost

        trace.append(cand_cost, accept, temp, best_cost, cand)

        if i % 50 == 0:
            log.debug(f"iteration {i}: T={temp:.4g} cost={cand_cost:.6g} "
                      f"best={best_cost:.6g}")

        if i - last_improvement >= settings.stall_iters:
            log.debug(f"best cost stalled for {settings.stall_iters} "
                      f"iterations, stopping at {i}")
            break

    return best, trace


def _baseline_job(args) -> float:
    design, cloud, ik_settings, w1, w2, joint_limit, tool_offset = args
    return design_cost(design, cloud, ik_settings, w1, w2,
                       joint_limit=joint_limit, tool_offset=tool_offset)


def random_baseline(cloud: PoseCloud, n: int = 50, rng_seed: int = 0,
                    ik_settings: IkSettings = DESIGN_IK,
                    w1=AnnealSettings.w1, w2: float = AnnealSettings.w2, *,
                    joint_limit: float = np.pi, tool_offset=(0.0, 0.0, 0.0),
                    jobs: int = 1) -> np.ndarray:
    """Costs of `n` random feasible designs on the same cloud."""
    rng = np.random.default_rng(rng_seed)
    designs = [random_design(rng) for _ in range(n)]
    work = [(d, cloud, ik_settings, w1, w2, joint_limit, tool_offset)
            for d in designs]

    if jobs > 1:
        with Pool(jobs) as p:
            return np.array(list(p.imap(_baseline_job, work)))
    return np.array([_baseline_job(w) for w in work])
