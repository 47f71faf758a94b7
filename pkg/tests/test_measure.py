from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latlab.measure import EmpiricalMeasure, ks_distance


def test_uniform_and_dirac():
    mu = EmpiricalMeasure.uniform([0.1, 0.2, 0.3])
    assert mu.weights == [Fraction(1, 3)] * 3 and mu.total_mass() == 1
    d = EmpiricalMeasure.dirac(0.5, "scalar")
    assert len(d) == 1 and d.total_mass() == 1


def test_combine_is_exact():
    a = EmpiricalMeasure.uniform([0.0, 1.0])
    b = EmpiricalMeasure.uniform([2.0, 3.0, 4.0])
    c = a.combine(b, Fraction(1, 3), Fraction(2, 3))
    assert c.total_mass() == 1 and len(c) == 5
    assert c.integrate(lambda x: x) == pytest.approx(0.5 / 3 + 2 * 3 / 3)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=200))
@settings(max_examples=60, deadline=None)
def test_cdf_is_a_distribution_function(xs):
    mu = EmpiricalMeasure.uniform(xs)
    ts = np.linspace(-6, 6, 41)
    F = mu.cdf(ts)
    assert np.all(np.diff(F) >= 0) and F[0] == 0 and F[-1] == 1
    assert np.all(F <= 1)


def test_ks_distance():
    assert ks_distance([0, 1, 2], [0, 1, 2]) == 0
    assert ks_distance([0.0], [1.0]) == 1
    rng = np.random.default_rng(1)
    assert ks_distance(rng.normal(size=5000), rng.normal(size=5000)) < 0.05
