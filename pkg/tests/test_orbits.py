import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from latlab import exact
from latlab.constructions import shapira_field, special_field
from latlab.errors import ClosingMismatch, DegenerateSpan, SingularModule
from latlab.hecke import hyperplane_type, neighbor_matrices
from latlab.lattice import basis_distance, reduce_basis, w0
from latlab.numfield import unit_log_lattice
from latlab.orbits import (
    BoxedMap,
    SimplexPolytope,
    closing_for_glue,
    closing_search,
    compact_orbit,
    compact_orbit_point,
    escape_fraction,
    from_gaps,
    fundamental_sample,
    gaps,
    glue_boxes,
    lambda_profile,
    min_co_cdf,
    min_co_cdf_exact_n2,
    min_co_quantile,
    min_co_samples,
    orbit_from_shapira,
    orbit_from_special,
    precedes,
    verify_stabilizer_exact,
)


@pytest.fixture(scope="module")
def orb25():
    return orbit_from_special(special_field(5, 2))


@pytest.fixture(scope="module")
def shap100():
    return orbit_from_shapira(shapira_field(100, 2))


def test_stabilizer_on_all_neighbors(orb25):
    mats = neighbor_matrices(hyperplane_type(5, 2)) + [exact.identity(2)]
    for H in mats:
        for u in orb25.units:
            assert verify_stabilizer_exact(orb25, u, H)


def test_non_unit_fails(orb25):
    alpha = orb25.field.alpha()
    for H in neighbor_matrices(hyperplane_type(5, 2)):
        assert not verify_stabilizer_exact(orb25, alpha, H)


def test_stabilizer_cubic():
    orb = orbit_from_special(special_field(7, 3))
    for H in neighbor_matrices(hyperplane_type(7, 3)):
        assert all(verify_stabilizer_exact(orb, u, H) for u in orb.units)


def test_orbit_point_unimodular_and_scale_free(orb25):
    x = orb25.point
    assert x.is_unimodular()
    y = compact_orbit_point(orb25.field, [[3, 0], [0, 3]])
    a, _ = reduce_basis(x.basis())
    b, _ = reduce_basis(y.basis())
    assert basis_distance(a, b)[0] < 1e-9
    with pytest.raises(SingularModule):
        compact_orbit_point(orb25.field, [[1, 2], [2, 4]])
    with pytest.raises(DegenerateSpan):
        compact_orbit(orb25.field, [])


def test_orbit_point_spans_embedding(orb25):
    # the point's basis spans sigma(Z[alpha]) up to scaling: exact transform times ref
    fld = orb25.field
    E = np.array([[1.0, r] for r in fld.roots_float()])
    E /= math.sqrt(abs(np.linalg.det(E)))
    B = orb25.point.basis()
    gam = np.linalg.solve(E, B)
    assert np.allclose(gam, np.rint(gam), atol=1e-9)
    assert abs(abs(np.linalg.det(np.rint(gam))) - 1) < 1e-12


def test_fundamental_sample(orb25):
    stab = orb25.stabilizer
    one = fundamental_sample(stab, 1)
    assert one.shape == (1, 2) and np.allclose(one, -0.5 * stab.generators[:, 0])
    pts = fundamental_sample(stab, 50)
    assert pts.shape == (50, 2) and np.allclose(pts.sum(axis=1), 0, atol=1e-9)
    # centered grid averages to ~0
    assert np.abs(pts.mean(axis=0)).max() < np.abs(stab.generators).max() / 50 + 1e-12
    with pytest.raises(ValueError):
        fundamental_sample(stab, 10 ** 6)


def test_profile_nonpositive_and_offset_invariant(shap100):
    a = lambda_profile(shap100, 200)
    b = lambda_profile(shap100, 200, offset=[0.37])
    assert a.total_mass() == 1 and len(a) == 200
    # lambda_1 <= 1 on X_2 by Minkowski for the sup norm
    assert max(a.values()) <= 1e-12
    ta, tb = np.sort(a.values()), np.sort(b.values())
    assert np.abs(np.searchsorted(ta, 0.5 * ta.min()) - np.searchsorted(tb, 0.5 * ta.min())) <= 8


def test_escape_fraction(shap100):
    prof = lambda_profile(shap100, 100, normalizer=math.log(100))
    vals = prof.values()
    assert escape_fraction(prof, 0.0) == 1
    assert escape_fraction(prof, min(vals) - 1) == 0
    ts = np.linspace(-0.5, 0, 11)
    fr = [escape_fraction(prof, t) for t in ts]
    assert all(x <= y for x, y in zip(fr, fr[1:]))
    assert all(isinstance(x, Fraction) for x in fr)


def test_min_co_n2_exact():
    cdf = min_co_cdf((0, 1), 2, 50000, seed=1)
    ts = np.linspace(-0.6, 0.1, 30)
    assert np.abs(cdf(ts) - min_co_cdf_exact_n2(ts)).max() < 0.02
    assert min_co_quantile(2, 0.5) == 0.25


def test_min_co_support_and_permutation():
    for n in (3, 4):
        s = min_co_samples(tuple(range(n)), n, 20000, seed=2)
        assert s.min() >= -(n - 1) / 2 - 1e-12 and s.max() <= 0
    a = np.sort(min_co_samples((0, 1, 2), 3, 40000, seed=3))
    b = np.sort(min_co_samples((2, 1, 0), 3, 40000, seed=4))
    ts = np.linspace(-1, 0, 21)
    ks = np.abs(np.searchsorted(a, ts) / len(a) - np.searchsorted(b, ts) / len(b)).max()
    assert ks < 0.02


def test_polytope_membership():
    P = SimplexPolytope((0, 1))
    assert P.contains([0.0, 0.0])[0]
    assert P.contains([0.5, -0.5])[0] and not P.contains([0.6, -0.6])[0]
    assert P.bounding_box() == (-1, 1)
    q = min_co_quantile(3, 0.5, samples=40000)
    assert 0 < q < 1


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=4))
@settings(max_examples=50, deadline=None)
def test_gaps_roundtrip(g):
    v = from_gaps(g)
    assert abs(v.sum()) < 1e-9 and np.allclose(gaps(v), g)
    assert precedes(v, v)


def test_w0_is_positive():
    for n in (2, 3, 4):
        assert precedes(np.zeros(n), w0(n)) and not precedes(w0(n), np.zeros(n))


def _box_pair(R):
    B = np.array([[1.0, 0.3], [0.2, 1.06]])
    B /= math.sqrt(np.linalg.det(B))
    ku = np.array([[1, 0.2], [0, 1]])
    kl = np.array([[1, 0], [-0.15, 1]])
    v0 = np.array([0.1, -0.1])
    W = w0(2)
    f1 = BoxedMap((R + 2) * W, B)
    f2 = BoxedMap((R + 2) * W, kl @ np.diag(np.exp(v0)) @ ku @ f1(f1.v0))
    return f1, f2, (ku, v0, kl)


def test_glue_trivial():
    B = np.eye(2)
    W = w0(2)
    f1 = BoxedMap(6 * W, B)
    f2 = BoxedMap(6 * W, f1(f1.v0))
    f, rep = glue_boxes(f1, f2, (np.eye(2), np.zeros(2), np.eye(2)), 4)
    assert rep.max_error_box1 == 0 and rep.max_error_box2 == 0
    assert np.allclose(f.v0, 12 * W)


def test_glue_error_shrinks_with_R():
    errs = []
    for R in (4, 8, 16):
        f1, f2, closing = _box_pair(R)
        f, rep = glue_boxes(f1, f2, closing, R)
        assert np.allclose(f.v0, f1.v0 + f2.v0 + closing[1])
        errs.append(max(rep.max_error_box1, rep.max_error_box2))
    assert errs[0] > errs[1] > errs[2]


def test_glue_mismatch():
    f1, f2, (ku, v0, kl) = _box_pair(4)
    with pytest.raises(ClosingMismatch):
        glue_boxes(f1, f2, (ku, v0 + 0.3, kl), 4)


def test_closing_for_glue_recovers():
    f1, f2, _ = _box_pair(4)
    closing = closing_for_glue(f1, f2)
    f, rep = glue_boxes(f1, f2, closing, 4)
    assert rep.closing_error < 1e-6


def test_closing_search_identity_and_unipotent():
    B = np.array([[1.0, 0.25], [0.1, 1.0]])
    u, v, l = closing_search(B, B)
    assert np.allclose(u, np.eye(2)) and np.allclose(v, 0) and np.allclose(l, np.eye(2))
    ku = np.array([[1.0, 0.3], [0.0, 1.0]])
    u, v, l = closing_search(B, ku @ B)
    assert np.allclose(u @ np.diag(np.exp(v)) @ l, ku, atol=1e-9)


def test_closing_search_random():
    rng = np.random.default_rng(7)
    for _ in range(10):
        B = np.eye(2) + 0.2 * rng.standard_normal((2, 2))
        B /= math.sqrt(abs(np.linalg.det(B)))
        g = np.eye(2) + 0.1 * rng.standard_normal((2, 2))
        g /= math.sqrt(abs(np.linalg.det(g)))
        u, v, l = closing_search(B, g @ B)
        target = reduce_basis(g @ B)[0]
        got = reduce_basis(u @ np.diag(np.exp(v)) @ l @ B)[0]
        assert basis_distance(got, target)[0] < 1e-6


def test_unit_log_lattice_of_orbit(orb25):
    lat = unit_log_lattice(orb25.field, orb25.units)
    assert abs(lat.regulator - orb25.stabilizer.regulator) < 1e-12
