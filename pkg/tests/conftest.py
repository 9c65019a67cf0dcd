import numpy as np
import pytest

from neguess.pmf import JointPmf, Pmf, validate_joint, validate_pmf


def make_pmf(*probs) -> Pmf:
    return validate_pmf(None, probs)


def make_joint(rows) -> JointPmf:
    return validate_joint(None, None, rows)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=2024))


def random_pmf(rng, n) -> Pmf:
    return validate_pmf(None, np.maximum(rng.dirichlet(np.ones(n)), 1e-9))


def random_joint(rng, nx, ny) -> JointPmf:
    return validate_joint(None, None, np.maximum(rng.dirichlet(np.ones(nx * ny)), 1e-9)
                          .reshape(ny, nx))
