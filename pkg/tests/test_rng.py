"""Seed-derivation and noise-sampler contracts."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from panshuffle.rng import (
    as_generator,
    derive_seed,
    fnv1a64,
    gaussian,
    laplace,
    make_generator,
    splitmix64,
)

# These pins are load-bearing: archived CSVs encode streams derived from these
# exact constants, so any drift here silently invalidates every recorded run.
FROZEN_DERIVATIONS = {
    (0, ()): 16294208416658607535,
    (0, ("trial", 0)): 7993375472502247583,
    (20260817, ("selection-sweep-pan", "pan", 128, "confirm", 3456)): 6676995095381646557,
}


def test_splitmix64_known_vector():
    # first output of the reference sequence seeded at 0
    assert splitmix64(0) == 16294208416658607535


def test_fnv1a64_known_vector():
    # FNV-1a of the empty string is the offset basis
    assert fnv1a64("") == 0xCBF29CE484222325
    assert fnv1a64("a") == 0xAF63DC4C8601EC8C


@pytest.mark.parametrize("key,expected", sorted(FROZEN_DERIVATIONS.items(), key=str))
def test_derive_seed_frozen(key, expected):
    master, components = key
    assert derive_seed(master, *components) == expected


def test_derive_seed_component_order_matters():
    assert derive_seed(1, "a", "b") != derive_seed(1, "b", "a")
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)


def test_make_generator_reproducible():
    a = make_generator(7, "x", 3).integers(0, 1 << 30, size=5)
    b = make_generator(7, "x", 3).integers(0, 1 << 30, size=5)
    assert np.array_equal(a, b)


def test_as_generator_passthrough_and_seed():
    gen = make_generator(1)
    assert as_generator(gen) is gen
    assert isinstance(as_generator(5), np.random.Generator)
    assert isinstance(as_generator(None), np.random.Generator)


@given(st.integers(min_value=0, max_value=(1 << 64) - 1))
def test_derive_seed_in_range(master):
    s = derive_seed(master, "tag", 9)
    assert 0 <= s < (1 << 64)


def test_laplace_zero_scale():
    gen = make_generator(3)
    assert laplace(gen, 0.0) == 0.0
    assert np.array_equal(laplace(gen, 0.0, size=4), np.zeros(4))


def test_laplace_rejects_negative_scale():
    with pytest.raises(ValueError):
        laplace(make_generator(3), -1.0)


def test_laplace_matches_reference_law():
    draws = laplace(make_generator(11, "lap"), 2.0, size=200_000)
    res = stats.kstest(draws, stats.laplace(scale=2.0).cdf)
    assert res.pvalue > 1e-3
    assert abs(float(np.median(draws))) < 0.02


def test_gaussian_matches_reference_law():
    draws = gaussian(make_generator(11, "gau"), 1.5, size=200_000)
    res = stats.kstest(draws, stats.norm(scale=1.5).cdf)
    assert res.pvalue > 1e-3


def test_gaussian_zero_scale_and_negative():
    gen = make_generator(3)
    assert gaussian(gen, 0.0) == 0.0
    with pytest.raises(ValueError):
        gaussian(gen, -0.5)


def test_noise_is_pure_function_of_stream():
    # one 64-bit word per draw: identical generators give identical draws,
    # and interleaving another consumer shifts them deterministically
    a = laplace(make_generator(5, "s"), 1.0, size=8)
    b = laplace(make_generator(5, "s"), 1.0, size=8)
    assert np.array_equal(a, b)
    g = make_generator(5, "s")
    g.integers(0, 1 << 64, dtype=np.uint64)
    shifted = laplace(g, 1.0, size=7)
    assert np.array_equal(shifted, a[1:])
