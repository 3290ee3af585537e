import numpy as np
import pytest
from numpy.testing import assert_allclose

from morphlib.design import DesignVector
from morphlib.dexterity import PointReport, evaluate_cloud, \
    evaluate_point, evaluate_points, normalize_jointly, versatility
from morphlib.ik import IkSettings

LIMITS = np.array([[-np.pi, np.pi]] * 7)


def point(condition, manipulability, joint_limit):
    return PointReport(condition, manipulability, joint_limit,
                       condition + manipulability + joint_limit)


def test_isotropic_jacobian():
    J = np.hstack([np.eye(6), np.zeros((6, 1))])
    p = evaluate_point(J, np.zeros(7), LIMITS)
    assert p.condition == pytest.approx(0.0, abs=1e-12)
    assert p.manipulability == pytest.approx(1.0)


def test_rank_deficient_jacobian(rng):
    J = rng.normal(size=(6, 7))
    J[3] = J[4]
    p = evaluate_point(J, np.zeros(7), LIMITS)
    assert p.condition == np.inf
    assert p.manipulability == pytest.approx(0.0, abs=1e-9)


def test_terms_match_an_eigendecomposition(rng):
    for _ in range(10):
        J = rng.normal(size=(6, 7))
        eig = np.sort(np.linalg.eig(J @ J.T)[0].real)
        p = evaluate_point(J, np.zeros(7), LIMITS)
        assert p.condition == pytest.approx(eig[-1] / eig[0] - 1, rel=1e-9)
        assert p.manipulability == pytest.approx(np.linalg.det(J @ J.T),
                                                 rel=1e-9)


def test_scaling_the_jacobian(rng):
    J = rng.normal(size=(6, 7))
    a = evaluate_point(J, np.zeros(7), LIMITS)
    b = evaluate_point(2 * J, np.zeros(7), LIMITS)
    assert b.condition == pytest.approx(a.condition, rel=1e-9)
    assert b.manipulability == pytest.approx(a.manipulability * 2.0 ** 12,
                                             rel=1e-9)


def test_joint_limit_term_is_smallest_mid_range():
    J = np.hstack([np.eye(6), np.zeros((6, 1))])
    limits = np.array([[-1.0, 2.0]] * 7)
    mid = evaluate_point(J, np.full(7, 0.5), limits).joint_limit
    for q in np.linspace(-1.0, 2.0, 31):
        assert evaluate_point(J, np.full(7, q), limits).joint_limit \
            >= mid - 1e-12

    # Normalized by the squared range: half a unit per joint at the middle.
    assert mid == pytest.approx(7 * 0.5)


def test_two_points_normalize_to_the_ends():
    report = evaluate_points([point(1.0, 2.0, 0.5), point(3.0, 1.0, 0.9)])
    assert_allclose(report.composite, [0.0, 1.0])

    same = evaluate_points([point(1.0, 2.0, 0.5)] * 2)
    assert_allclose(same.composite, [0.0, 0.0])
    assert same.std == 0.0


def test_singular_points_count_as_worst():
    report = evaluate_points([point(1.0, 1.0, 0.5), point(2.0, 1.0, 0.5),
                              point(np.inf, 0.0, 0.5)])
    assert report.composite[2] == pytest.approx(2 / 3)
    assert report.aggregates(report.condition)["max"] == 2.0


def test_joint_normalization_shares_bounds():
    good = [point(1.0, 2.0, 0.5)]
    bad = [point(3.0, 1.0, 0.9)]

    alone = evaluate_points(good)
    together = normalize_jointly(good, bad)

    assert alone.composite[0] == 0.0
    assert together[0].composite[0] == 0.0
    assert together[1].composite[0] == 1.0


def test_versatility_ratios():
    means = {("wide", "a"): 0.4, ("wide", "b"): 0.5,
             ("sa", "a"): 0.5, ("sa", "b"): 0.9,
             ("sb", "a"): 0.2, ("sb", "b"): 0.25}
    ratios = versatility(means, "wide", {"sa": "a", "sb": "b"})
    assert ratios == pytest.approx({"sa": 1.0, "sb": 2.0})

    means["sb", "b"] = 0.0
    assert versatility(means, "wide", {"sb": "b"})["sb"] == np.inf
    with pytest.raises(ValueError):
        versatility(means, "narrow", {"sa": "a"})


def test_versatility_on_shared_bounds():
    # The all-task design is middling on both clouds, each specialist is
    # good on its own cloud only.
    groups = {
        ("wide", "a"): [point(2.0, 1.5, 0.7)],
        ("wide", "b"): [point(2.0, 1.5, 0.7)],
        ("sa", "a"): [point(1.5, 1.75, 0.6)],
        ("sa", "b"): [point(3.0, 1.0, 0.9)],
        ("sb", "a"): [point(3.0, 1.0, 0.9)],
        ("sb", "b"): [point(1.0, 2.0, 0.5), point(1.4, 1.8, 0.58)],
    }
    reports = dict(zip(groups, normalize_jointly(*groups.values())))
    means = {k: r.mean for k, r in reports.items()}

    assert means["wide", "a"] == pytest.approx(0.5)
    assert versatility(means, "wide", {"sa": "a", "sb": "b"}) == \
        pytest.approx({"sa": 2.0, "sb": 5.0})


def test_summary_has_every_term():
    report = evaluate_points([point(1.0, 2.0, 0.5), point(3.0, 1.0, 0.9)])
    summary = report.summary()
    assert set(summary) == {"condition", "manipulability", "joint_limit",
                            "raw_metric", "composite"}
    assert summary["condition"] == {"mean": 2.0, "std": 1.0, "min": 1.0,
                                    "max": 3.0}


def test_home_cloud_is_uniform(home_cloud):
    report = evaluate_cloud(DesignVector.initial().to_chain(), home_cloud)
    assert len(report) == len(home_cloud)
    assert report.std == 0.0
    assert np.all(np.isfinite(report.condition))


def test_cloud_evaluation(small_cloud):
    report = evaluate_cloud(DesignVector.initial().to_chain(), small_cloud,
                            IkSettings(max_iters=100))
    assert len(report) == len(small_cloud)
    assert np.all((report.composite >= 0) & (report.composite <= 1))
    assert np.all(report.manipulability >= 0)
