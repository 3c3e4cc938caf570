import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracbvp.special import gamma, rgamma


@pytest.mark.parametrize("x, expected", [
    (1.0, 1.0),
    (0.5, 1.7724538509055160),
    (5.0, 24.0),
    (2.5, 1.329340388179137),
    (10.0, 362880.0),
])
def test_known_values(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-14)


def test_relative_error_against_mpmath():
    mpmath.mp.dps = 30
    xs = np.concatenate([np.linspace(1e-3, 10.0, 4001), [1e-8, 0.1, 1 / 3, 2 / 3, 3.99, 4.0]])
    worst = max(abs(gamma(x) / float(mpmath.gamma(x)) - 1.0) for x in xs)
    assert worst <= 1e-13


def test_recurrence_random():
    rng = np.random.default_rng(7)
    for x in rng.uniform(0.1, 5.0, size=1000):
        assert abs(gamma(x + 1) - x * gamma(x)) <= 1e-12 * gamma(x + 1)


def test_increasing_past_minimum():
    xs = np.linspace(1.462, 10.0, 5000)
    values = np.array([gamma(x) for x in xs])
    assert np.all(np.diff(values) > 0)


@given(st.floats(min_value=1e-3, max_value=10.0))
@settings(max_examples=300)
def test_matches_math_gamma(x):
    assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-13)


@given(st.floats(min_value=0.05, max_value=10.0))
def test_rgamma_is_reciprocal(x):
    assert rgamma(x) * gamma(x) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("bad", [0.0, -1.0, -0.5, float("nan"), float("inf")])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        gamma(bad)
