import os

import hypothesis
import numpy as np
import pytest

from morphlib.chain import BilateralDesign, anthropomorphic_arm
from morphlib.pipeline import GeneratorSettings, PoseCloud, \
    cluster_resample, extract_local_variation, synthesize_task

np.seterr(all="warn")

hypothesis.settings.register_profile("numeric", max_examples=50,
                                     deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE",
                                                "numeric"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def arm():
    return anthropomorphic_arm()


@pytest.fixture
def system():
    return BilateralDesign(anthropomorphic_arm())


@pytest.fixture(scope="session")
def small_cloud():
    """A short suturing recording reduced to 15 local samples."""
    traj = synthesize_task("suturing", GeneratorSettings(duration=6.0,
                                                         rate=10.0), 3)
    return cluster_resample(extract_local_variation(traj, 2.0), 0.005, 15, 0)


@pytest.fixture
def home_cloud():
    return PoseCloud.uniform(np.repeat(np.eye(4)[None], 8, axis=0))


@pytest.fixture
def config():
    """The application config, restored after the test."""
    from morphdex import app

    saved = dict(app.config)
    yield app.config
    app.config.clear()
    app.config.update(saved)
