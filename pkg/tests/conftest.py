import numpy as np
import pytest

from qszego.rank_one import RationalState, to_spectrum


def random_spectrum(rng, cutoff, scale=0.5):
    return scale * (
        rng.standard_normal(cutoff + 1) + 1j * rng.standard_normal(cutoff + 1)
    )


def random_two_sided(rng, cutoff, scale=0.5):
    return scale * (
        rng.standard_normal(2 * cutoff + 1) + 1j * rng.standard_normal(2 * cutoff + 1)
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def geo_state():
    """The workhorse rank-one state (b, c, p) = (1, 1, 1/2)."""
    return RationalState(1.0, 1.0, 0.5)


@pytest.fixture
def geo_spectrum_64(geo_state):
    return to_spectrum(geo_state, 64)
