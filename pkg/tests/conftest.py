import numpy as np
import pytest

from chirpfit import preset_model, synthesize
from chirpfit.noise import make_generator, standard_sas


@pytest.fixture(scope="session")
def model1():
    return preset_model("model1")


@pytest.fixture(scope="session")
def model2():
    return preset_model("model2")


def noisy_series(model, n, alpha, sigma, seed):
    """Series with one SaS noise draw from a dedicated stream."""
    rng = make_generator(seed)
    noise = sigma * standard_sas(alpha, n, rng)
    return synthesize(model, n, noise)


def random_interior_theta(rng):
    return (rng.uniform(0.05, np.pi - 0.05), rng.uniform(0.05, np.pi - 0.05))
