import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latlab import exact
from latlab.errors import (
    DegenerateSpan,
    NonIntegralElement,
    NotAUnit,
    NotIrreducible,
    NotTotallyReal,
    RepeatedRoot,
    ZeroElement,
)
from latlab.numfield import (
    build_field,
    embed_element,
    embed_float,
    field_from_json,
    field_norm,
    in_suborder,
    log_embedding,
    multiplication_matrix,
    unit_log_lattice,
)

R_POLY = [19, -15, 1]  # x^2 - 15x + 19
S149 = math.sqrt(149)
ROOTS_R = ((15 - S149) / 2, (15 + S149) / 2)


@pytest.fixture(scope="module")
def fld():
    return build_field(R_POLY)


def test_roots_quadratic_formula(fld):
    assert np.allclose(fld.roots_float(), ROOTS_R, rtol=0, atol=1e-14)
    assert abs(ROOTS_R[0] - 1.39671) < 1e-4 and abs(ROOTS_R[1] - 13.60329) < 1e-4


def mpf_fraction(x):
    return Fraction(int(x.man)) * Fraction(2) ** int(x.exp)


def test_root_certificates(fld):
    # minimal polynomial changes sign across each certified interval
    rad = mpf_fraction(fld.radius)
    for r in fld.roots:
        c = mpf_fraction(r)
        lo = exact.poly_eval(list(fld.min_poly), c - rad)
        hi = exact.poly_eval(list(fld.min_poly), c + rad)
        assert lo * hi < 0
    assert fld.roots[1] - fld.roots[0] > 2 * fld.radius


def test_sqrt2_field():
    f = build_field([-2, 0, 1])
    assert np.allclose(f.roots_float(), [-math.sqrt(2), math.sqrt(2)], atol=1e-15)
    a = embed_float(f, f.alpha())
    assert np.allclose(a, [-math.sqrt(2), math.sqrt(2)], atol=1e-15)


def test_build_errors():
    with pytest.raises(NotTotallyReal):
        build_field([1, 0, 1])
    with pytest.raises(RepeatedRoot):
        build_field([1, -2, 1], assume_irreducible=True)
    with pytest.raises(NotIrreducible):
        build_field([2, -3, 1])


def test_cubic_roots_match_numpy():
    f = build_field([1, -3, 0, 1])  # x^3 - 3x + 1, totally real
    assert np.allclose(f.roots_float(), np.sort(np.roots([1, 0, -3, 1]).real), atol=1e-13)


def test_embed_unit(fld):
    e = fld.element([-7, 5])
    vals = embed_float(fld, e)
    expect = [5 * r - 7 for r in ROOTS_R]
    assert np.allclose(vals, expect, rtol=1e-12)
    # independent values: (-0.01639, 61.01639); the product is the norm
    assert abs(vals[0] + 0.016389) < 1e-5 and abs(vals[1] - 61.016389) < 1e-5
    assert embed_float(fld, fld.one()).tolist() == [1.0, 1.0]


def test_embed_error_bounds(fld):
    e = fld.element([3, -2])
    vals, errs = embed_element(fld, e, with_error=True)
    with mpmath.workprec(400):
        true = [3 - 2 * (mpmath.mpf(15) + s * mpmath.sqrt(149)) / 2 for s in (-1, 1)]
        assert all(abs(v - t) <= e_ for v, t, e_ in zip(vals, true, errs))


def test_norms(fld):
    assert field_norm(fld, fld.element([-7, 5])) == -1
    assert field_norm(fld, fld.element([7])) == 49
    shap = build_field([49, -15, 1])
    assert field_norm(shap, shap.alpha()) == 49
    with pytest.raises(ZeroElement):
        field_norm(fld, fld.element([0]))


@given(st.lists(st.integers(-1000, 1000), min_size=2, max_size=2))
@settings(max_examples=60, deadline=None)
def test_norm_matches_embedding_product(coeffs):
    f = build_field(R_POLY)
    e = f.element(coeffs)
    if e.is_zero():
        return
    n_exact = float(field_norm(f, e))
    n_float = float(np.prod(embed_float(f, e)))
    assert abs(n_exact - n_float) <= 1e-6 * max(1.0, abs(n_exact)) + 1e-6 * abs(np.prod(np.abs(embed_float(f, e))))


def test_log_embedding(fld):
    u = fld.element([-7, 5]) ** 2
    logs = log_embedding(fld, u)
    expect = [2 * math.log(abs(5 * r - 7)) for r in ROOTS_R]
    assert np.allclose(logs, expect, rtol=1e-12)
    assert abs(logs.sum()) < 1e-12
    assert np.allclose(log_embedding(fld, fld.one()), 0)
    with pytest.raises(NotAUnit):
        log_embedding(fld, fld.element([2]))


def test_in_suborder(fld):
    u = fld.element([-7, 5]) ** 2
    assert in_suborder(fld, u, 5, 1)
    assert not in_suborder(fld, fld.alpha(), 5, 1)
    assert in_suborder(fld, fld.element([3]), 7, 3)
    with pytest.raises(NonIntegralElement):
        in_suborder(fld, fld.element([Fraction(1, 2), 1]), 5, 1)


def test_multiplication_matrix(fld):
    assert multiplication_matrix(fld, fld.one()) == exact.identity(2)
    assert multiplication_matrix(fld, fld.alpha()) == exact.as_matrix([[0, -19], [1, 15]])
    assert exact.det(multiplication_matrix(fld, fld.element([-7, 5]))) == -1


@given(st.lists(st.integers(-20, 20), min_size=3, max_size=3), st.lists(st.integers(-20, 20), min_size=3, max_size=3))
@settings(max_examples=40, deadline=None)
def test_multiplication_matrix_homomorphism(a, b):
    f = build_field([1, -3, 0, 1])
    u, v = f.element(a), f.element(b)
    assert multiplication_matrix(f, u * v) == exact.matmul(multiplication_matrix(f, u), multiplication_matrix(f, v))


def test_unit_log_lattice(fld):
    u = fld.element([-7, 5]) ** 2
    lat = unit_log_lattice(fld, [u])
    v = log_embedding(fld, u)
    assert lat.rank == 1
    assert np.allclose(np.abs(lat.generators[:, 0]), np.abs(v))
    assert abs(lat.regulator - abs(v[0]) * math.sqrt(2)) < 1e-9
    # redundant generators collapse to the same lattice
    lat2 = unit_log_lattice(fld, [u, u * u, fld.element([-7, 5]) ** 6])
    assert abs(lat2.regulator - lat.regulator) < 1e-9
    with pytest.raises(DegenerateSpan):
        unit_log_lattice(fld, [fld.one()])


def test_shapira_unit_logs():
    f = build_field([49, -15, 1])
    u = (5 - f.alpha()) ** 2
    lat = unit_log_lattice(f, [u])
    assert lat.regulator > 0
    roots = [(15 - math.sqrt(29)) / 2, (15 + math.sqrt(29)) / 2]
    assert np.allclose(log_embedding(f, u), [2 * math.log(abs(5 - r)) for r in roots], rtol=1e-12)


def test_json_roundtrip(fld):
    doc = fld.to_json()
    back = field_from_json(doc)
    assert back.min_poly == fld.min_poly
    assert np.allclose(back.roots_float(), fld.roots_float(), rtol=0, atol=1e-30)


def test_element_arithmetic_reduces(fld):
    a = fld.alpha()
    assert (a * a).coeffs == (Fraction(-19), Fraction(15))
    assert (a - a).is_zero()
    assert (3 - a).coeffs == (Fraction(3), Fraction(-1))
