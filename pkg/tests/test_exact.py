import itertools
import math
from fractions import Fraction

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from latlab import exact


def leibniz_det(a):
    n = len(a)
    total = 0
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = (-1) ** inv
        for i in range(n):
            term *= a[i][perm[i]]
        total += term
    return total


def minors_gcd(a, k):
    n = len(a)
    g = 0
    for rows in itertools.combinations(range(n), k):
        for cols in itertools.combinations(range(n), k):
            g = math.gcd(g, abs(leibniz_det([[a[r][c] for c in cols] for r in rows])))
    return g


small_int_matrix = st.integers(2, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=n, max_size=n))


@given(small_int_matrix)
@settings(max_examples=80, deadline=None)
def test_det_matches_leibniz(a):
    assert exact.det(a) == leibniz_det(a)


@given(small_int_matrix)
@settings(max_examples=80, deadline=None)
def test_smith_matches_minor_gcds(a):
    n = len(a)
    if leibniz_det(a) == 0:
        return
    d = exact.smith_diagonal(a)
    assert len(d) == n
    prod = 1
    for k in range(1, n + 1):
        prod *= d[k - 1]
        assert prod == minors_gcd(a, k)
    assert all(d[i + 1] % d[i] == 0 for i in range(n - 1))


def test_smith_small_case():
    assert exact.smith_diagonal([[2, 4], [6, 8]]) == [2, 4]


@given(small_int_matrix)
@settings(max_examples=50, deadline=None)
def test_inverse_roundtrip(a):
    if leibniz_det(a) == 0:
        return
    inv = exact.inverse(a)
    assert exact.matmul(a, inv) == exact.identity(len(a))


def test_rank():
    assert exact.rank([[1, 2], [2, 4]]) == 1
    assert exact.rank([[1, 0, 0], [0, 1, 0]]) == 2


polys = st.lists(st.integers(-9, 9), min_size=1, max_size=5)


@given(polys, polys)
@settings(max_examples=80, deadline=None)
def test_divmod_identity(f, g):
    g = exact.poly_trim([Fraction(c) for c in g])
    if not any(g):
        return
    q, r = exact.poly_divmod(f, g)
    back = exact.poly_add(exact.poly_mul(q, g), r)
    assert exact.poly_trim(back) == exact.poly_trim([Fraction(c) for c in f])
    assert exact.poly_degree(r) < exact.poly_degree(g)


@given(st.lists(st.integers(-5, 5), min_size=2, max_size=4), st.lists(st.integers(-5, 5), min_size=1, max_size=3))
@settings(max_examples=60, deadline=None)
def test_resultant_matches_root_product(f_roots, g):
    # f monic with known integer roots: Res(f, g) = prod g(root)
    f = exact.poly_from_roots(f_roots)
    expect = 1
    for r in f_roots:
        expect *= exact.poly_eval(g, r)
    assert exact.resultant(f, g) == expect


def test_poly_gcd_detects_repeated_factor():
    f = exact.poly_from_roots([2, 2, 5])
    g = exact.poly_gcd(f, exact.poly_deriv(f))
    assert exact.poly_degree(g) == 1
    assert exact.poly_eval(g, 2) == 0


def test_resultant_float_oracle():
    f = [19, -15, 1]
    g = [-7, 5]
    roots = np.roots([1, -15, 19])
    assert abs(float(exact.resultant(f, g)) - np.prod(5 * roots - 7)) < 1e-9
