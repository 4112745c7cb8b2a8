"""Sign-variation counters and the variation-bounded cones."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coop2.signvar import (BadK, ZeroEntry, in_Pk_minus, in_Pk_plus, s_minus,
                           s_plus, s_plus_enumerated, sigma, sign_var)


def test_sigma_counts_strict_changes():
    assert sigma([1, -1, 1]) == 2
    assert sigma([3.0, 2.0, 0.5]) == 0
    assert sigma([-1, -2, 3, 4, -5]) == 2


def test_sigma_rejects_zero():
    with pytest.raises(ZeroEntry):
        sigma([1.0, 0.0, -1.0])


def test_s_minus_drops_zeros():
    assert s_minus([1, 0, -1]) == 1
    assert s_minus([0, 0, 0]) == 0
    assert s_minus([1, 0, 1]) == 0
    assert s_minus([-2, 0, 0, 3, 0, -1]) == 2


def test_s_plus_adversarial_fill():
    # zeros may be replaced by +-1 to maximize the count
    assert s_plus([1, 0, 1]) == 2
    assert s_plus([0, 0, 0]) == 2
    assert s_plus([1, -1]) == 1
    assert s_plus([0, 1]) == 1
    assert s_plus(np.zeros(5)) == 4


def test_s_plus_matches_enumeration_on_all_ternary_vectors():
    # exhaustive cross-check of the closed form against brute force
    for vals in itertools.product((-1.0, 0.0, 1.0), repeat=8):
        x = np.array(vals)
        assert s_plus(x) == s_plus_enumerated(x), x


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=12))
def test_variation_sandwich(vals):
    x = np.array(vals)
    lo, hi = s_minus(x), s_plus(x)
    assert 0 <= lo <= hi <= x.size - 1


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=10),
       st.sampled_from([0.5, 2.0, 7.5]))
def test_positive_scaling_invariance(vals, c):
    x = np.array(vals)
    assert s_minus(c * x) == s_minus(x)
    assert s_plus(c * x) == s_plus(x)
    assert s_minus(-x) == s_minus(x)
    assert s_plus(-x) == s_plus(x)


def test_semicontinuity_under_perturbation(rng):
    # s_minus can only rise and s_plus only fall when zeros are nudged
    for _ in range(500):
        n = rng.integers(2, 10)
        x = rng.integers(-1, 2, size=n).astype(float)
        y = x + rng.uniform(-1e-9, 1e-9, size=n)
        assert s_minus(y) >= s_minus(x)
        assert s_plus(y) <= s_plus(x)


def test_sign_var_bundle():
    r = sign_var([1.0, 0.0, 1.0])
    assert r.weak == 0 and r.strong == 2 and r.n == 3


def test_cone_membership():
    # P^2_-: weak variation <= 1; P^2_+: strong variation <= 1
    assert in_Pk_minus([1, 2, -1], 2)
    assert in_Pk_minus([1, 0, -1], 2)
    assert not in_Pk_minus([1, -1, 1], 2)
    assert in_Pk_plus([1, 2, -1], 2)
    assert in_Pk_plus([1, 0, -1], 2)  # any fill of the zero keeps one change
    assert not in_Pk_plus([1, 0, 1], 2)  # zero can be filled to 2 changes
    assert in_Pk_plus([1, 2, 3], 2)


def test_interior_relation(rng):
    # strong cone membership implies weak cone membership
    for _ in range(2000):
        x = rng.standard_normal(6) * rng.integers(0, 2, size=6)
        if in_Pk_plus(x, 2):
            assert in_Pk_minus(x, 2)


def test_bad_k():
    with pytest.raises(BadK):
        in_Pk_minus([1.0, 2.0, 3.0], 0)
    with pytest.raises(BadK):
        in_Pk_plus([1.0, 2.0, 3.0], 4)


def test_zero_threshold():
    assert s_minus([1.0, -1e-14, 1.0], tau_zero=1e-12) == 0
    assert sigma([1.0, -1e-14, 1.0], tau_zero=0.0) == 2
