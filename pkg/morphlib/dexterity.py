"""
Kinematic performance: condition, manipulability and joint-limit terms of
J J^T, and their min-max normalized composite (lower is better).
"""

from dataclasses import astuple, dataclass

import numpy as np

from .chain import spatial_jacobian
from .design import DESIGN_IK, solve_cloud

# Eigenvalues of J J^T below this count as zero.
MIN_EIGENVALUE = 1e-12

TERMS = ("condition", "manipulability", "joint_limit")


@dataclass(frozen=True)
class PointReport:
    condition: float       # lambda_max / lambda_min - 1, inf when singular
    manipulability: float  # det(J J^T)
    joint_limit: float     # sum ((q - q_hi)^2 + (q - q_lo)^2) / range^2
    raw_metric: float    # the three raw terms summed, limits unnormalized


def _mean_point(a: PointReport, b: PointReport) -> PointReport:
    return PointReport(*((x + y) / 2 for x, y in zip(astuple(a), astuple(b))))


def evaluate_point(J, q, limits) -> PointReport:
    J = np.asarray(J, dtype=float)
    if J.shape[1] < J.shape[0]:
        raise ValueError("dexterity needs at least as many joints as rows")
    q = np.asarray(q, dtype=float)
    lower, upper = np.asarray(limits, dtype=float).T

    eig = np.clip(np.linalg.eigvalsh(J @ J.T), 0.0, None)
    lmin, lmax = eig[0], eig[-1]
    condition = np.inf if lmin < MIN_EIGENVALUE else lmax / lmin - 1.0
    manipulability = float(np.prod(eig))

    raw_limit = (q - upper) ** 2 + (q - lower) ** 2
    joint_limit = float(np.sum(raw_limit / (upper - lower) ** 2))

    return PointReport(condition=float(condition),
                       manipulability=manipulability,
                       joint_limit=joint_limit,
                       raw_metric=float(condition + manipulability
                                          + raw_limit.sum()))


@dataclass(frozen=True)
class DexterityReport:
    condition: np.ndarray
    manipulability: np.ndarray
    joint_limit: np.ndarray
    raw_metric: np.ndarray
    composite: np.ndarray

    def __len__(self):
        return len(self.composite)

    def aggregates(self, values=None) -> dict:
        values = self.composite if values is None else values
        finite = values[np.isfinite(values)]
        if len(finite) == 0:
            finite = np.array([np.nan])
        return {"mean": float(finite.mean()), "std": float(finite.std()),
                "min": float(finite.min()), "max": float(finite.max())}

    def summary(self) -> dict:
        return {name: self.aggregates(getattr(self, name))
                for name in TERMS + ("raw_metric", "composite")}

    @property
    def mean(self) -> float:
        return self.aggregates()["mean"]

    @property
    def std(self) -> float:
        return self.aggregates()["std"]


def _term_bounds(values) -> tuple[float, float]:
    finite = values[np.isfinite(values)]
    if len(finite) == 0:
        return 0.0, 0.0
    return float(finite.min()), float(finite.max())


def _minmax(values, bounds) -> np.ndarray:
    lo, hi = bounds
    out = np.ones_like(values)
    ok = np.isfinite(values)
    if hi > lo:
        out[ok] = (values[ok] - lo) / (hi - lo)
    else:
        out[ok] = 0.0
    return np.clip(out, 0.0, 1.0)


def _terms(points: list[PointReport]) -> dict:
    return {name: np.array([getattr(p, name) for p in points])
            for name in TERMS + ("raw_metric",)}


def _report(terms: dict, bounds: dict) -> DexterityReport:
    normalized = [
        _minmax(terms["condition"], bounds["condition"]),
        # Larger manipulability is better, so it enters negated.
        _minmax(-terms["manipulability"], bounds["manipulability"]),
        _minmax(terms["joint_limit"], bounds["joint_limit"]),
    ]
    return DexterityReport(composite=np.mean(normalized, axis=0), **terms)


def _bounds(terms: dict) -> dict:
    return {"condition": _term_bounds(terms["condition"]),
            "manipulability": _term_bounds(-terms["manipulability"]),
            "joint_limit": _term_bounds(terms["joint_limit"])}


def evaluate_points(points: list[PointReport]) -> DexterityReport:
    if not points:
        raise ValueError("nothing to evaluate")
    terms = _terms(points)
    return _report(terms, _bounds(terms))


def normalize_jointly(*groups: list[PointReport]) -> list[DexterityReport]:
    """
    Reports for several point groups normalized on shared term bounds, so
    their composites sit on one axis.
    """
    pooled = _bounds(_terms([p for g in groups for p in g]))
    return [_report(_terms(g), pooled) for g in groups]


def evaluate_trace(trace, sys) -> DexterityReport:
    """Per-step dexterity of a motion trace, averaged over both arms."""
    return evaluate_points(trace_points(trace, sys))


def trace_points(trace, sys) -> list[PointReport]:
    """Arm dexterity per recorded state, each arm in its own mount frame."""
    out = []
    limits = sys.arm.limits
    for q in trace.states:
        _, q_l, q_r = sys.split(q)
        left = evaluate_point(spatial_jacobian(sys.arm, q_l), q_l, limits)
        right = evaluate_point(spatial_jacobian(sys.right_arm, q_r), q_r,
                               limits)
        out.append(_mean_point(left, right))
    return out


def cloud_points(chain, cloud, ik_settings=None) -> list[PointReport]:
    """Dexterity at the IK solutions of an anchored cloud."""
    results = solve_cloud(chain, cloud, ik_settings or DESIGN_IK)
    return [evaluate_point(spatial_jacobian(chain, r.q), r.q, chain.limits)
            for r in results]


def evaluate_cloud(chain, cloud, ik_settings=None) -> DexterityReport:
    return evaluate_points(cloud_points(chain, cloud, ik_settings))


def versatility(means, generalist, specialists) -> dict:
    """
    Worst mean of `generalist` over every cloud, divided by each
    specialist's mean on its own cloud.

    `means` maps (design, cloud) to a mean composite (lower is better) and
    `specialists` maps a design to the cloud it was optimized for.
    """
    clouds = {c for d, c in means if d == generalist}
    if not clouds:
        raise ValueError(f"no cloud scores for {generalist!r}")
    worst = max(means[generalist, c] for c in clouds)
    out = {}
    for d, c in specialists.items():
        own = means[d, c]
        out[d] = worst / own if own > 0 else np.inf
    return out
