import numpy as np
import pytest

from orthoglide.synthesis import SynthesisSpec, synthesize


@pytest.fixture(scope="session")
def synthesized():
    return synthesize(SynthesisSpec(200.0, (0.5, 2.0)))


@pytest.fixture(scope="session")
def params(synthesized):
    return synthesized[1]


@pytest.fixture(scope="session")
def report(synthesized):
    return synthesized[0]


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_cube_points(params, rng, n):
    return rng.uniform(params.cube.lo, params.cube.hi, size=(n, 3))
