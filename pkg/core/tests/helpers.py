# core/tests/helpers.py: shared fixtures for the service tests
import numpy as np

from core.services.metrics import swap_pair
from core.services.randgen import SeedSpec, derive_trial_rng, random_spd

TEST_SEED = 20240601


def rng_for(index=0, seed=TEST_SEED):
    return derive_trial_rng(SeedSpec(seed, index))


def random_pairs(count, dims=range(2, 11), low=1e-2, high=1e2, seed=TEST_SEED):
    """Yields (C, Chat) pairs with log-uniform spectra on random bases."""
    dims = list(dims)
    for i in range(count):
        rng = rng_for(i, seed)
        dim = dims[i % len(dims)]
        yield random_spd(dim, rng, low, high), random_spd(dim, rng, low, high)


def swap_example(alpha=0.1):
    return swap_pair(alpha)


def rel_fro(a, b):
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / np.linalg.norm(np.asarray(b))
