"""Compact diagonal orbits, their statistics, and boxed maps.

The orbit of x_Lambda = sigma(Lambda) / cov^(1/n) under positive diagonal
matrices is periodic with period lattice the log embedding of the stabilizing
units.  Orbit measures are approximated by uniform grids on a fundamental
parallelepiped of that lattice.

Boxes use the order v < v' iff v_i - v_{i+1} <= v'_i - v'_{i+1} for all i, so
that w0 = ((n-1)/2, ..., -(n-1)/2) is positive and exp(v) contracts lower
unipotents (and exp(-v) upper ones) for v > 0.
"""
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import exact
from .errors import (
    ClosingMismatch,
    DegenerateSpan,
    EmptyMeasure,
    NotFound,
    RejectionStall,
    SingularMinor,
    SingularModule,
)
from .lattice import (
    DEFAULT_ENUM_BUDGET,
    LatticePoint,
    apply_diagonal,
    basis_distance,
    reduce_basis,
    shortest_sup,
    ual_factorize,
    w0,
)
from .measure import EmpiricalMeasure
from .numfield import (
    FieldElement,
    NumberField,
    UnitLogLattice,
    multiplication_matrix,
    unit_log_lattice,
)

MAX_GRID_POINTS = 10 ** 5
REJECTION_FLOOR = 1e-4


@dataclass
class CompactOrbit:
    point: LatticePoint
    field: NumberField
    stabilizer: UnitLogLattice
    units: list
    module_basis: tuple  # exact, columns in power-basis coordinates
    provenance: str = "custom"

    @property
    def n(self):
        return self.field.degree


def _power_embeddings(fld: NumberField):
    """sigma_i(alpha^j) at working precision, as an mpmath matrix."""
    n = fld.degree
    with mpmath.workprec(fld.precision_bits + 32):
        return mpmath.matrix([[r ** j for j in range(n)] for r in fld.roots])


def compact_orbit_point(fld: NumberField, module_basis=None) -> LatticePoint:
    """x_Lambda for the module with the given rational basis (default Z[alpha]).

    The float reference basis is pre-reduced: an LLL transform U is found in
    floating point, E @ Q @ U is evaluated at working precision, and the
    stored exact transform is U^-1 so that ref @ transform spans sigma(Lambda).
    """
    n = fld.degree
    Q = exact.identity(n) if module_basis is None else exact.as_matrix(module_basis)
    if len(Q) != n or exact.det(Q) == 0:
        raise SingularModule("module basis is singular")
    E = _power_embeddings(fld)
    with mpmath.workprec(fld.precision_bits + 32):
        Qm = mpmath.matrix([[mpmath.mpf(c.numerator) / c.denominator for c in row] for row in Q])
        EQ = E * Qm
        cov = abs(mpmath.det(EQ))
        _, U = reduce_basis(np.array(EQ.tolist(), dtype=float))
        Um = mpmath.matrix(U.astype(int).tolist())
        ref = EQ * Um / cov ** (mpmath.mpf(1) / n)
        ref = np.array([[float(v) for v in ref[i, :]] for i in range(n)])
    Uinv = exact.inverse(exact.as_matrix(U.astype(int).tolist()))
    return LatticePoint(ref, Uinv, Fraction(1))


def compact_orbit(fld: NumberField, units, module_basis=None, provenance="custom") -> CompactOrbit:
    units = list(units)
    if not units:
        raise DegenerateSpan("no units given")
    Q = exact.identity(fld.degree) if module_basis is None else exact.as_matrix(module_basis)
    stab = unit_log_lattice(fld, units)
    return CompactOrbit(compact_orbit_point(fld, Q), fld, stab, units, Q, provenance)


def orbit_from_special(data) -> CompactOrbit:
    return compact_orbit(data.field, data.units, provenance="special-field")


def orbit_from_shapira(data) -> CompactOrbit:
    return compact_orbit(data.field, data.units, provenance="shapira")


def verify_stabilizer_exact(orbit: CompactOrbit, u: FieldElement, neighbor_H, p=None, k=None) -> bool:
    """Does multiplication by u map the neighbour with matrix H (module coordinates) onto itself?"""
    Q = orbit.module_basis
    M = exact.matmul(exact.matmul(exact.inverse(Q), multiplication_matrix(orbit.field, u)), Q)
    H = exact.as_matrix(neighbor_H)
    X = exact.matmul(exact.matmul(exact.inverse(H), M), H)
    return exact.is_integral(X) and abs(exact.det(X)) == 1


# -- sampling the orbit --------------------------------------------------------

def fundamental_sample(stab: UnitLogLattice, density: int, offset=None, centered=True):
    """density^(n-1) grid vectors in a fundamental parallelepiped of the stabilizer lattice."""
    G = stab.generators
    m = G.shape[1]
    if m == 0 or np.linalg.matrix_rank(G) < m:
        raise DegenerateSpan("stabilizer lattice is not full rank")
    density = int(density)
    if density < 1:
        raise ValueError("density must be positive")
    if density ** m > MAX_GRID_POINTS:
        raise ValueError(f"grid of {density ** m} points exceeds {MAX_GRID_POINTS}")
    off = np.zeros(m) if offset is None else np.asarray(offset, dtype=float) % 1.0
    ticks = np.arange(density) / density
    coords = np.array(list(itertools.product(ticks, repeat=m))) + off
    coords = coords % 1.0
    if centered:
        coords = coords - 0.5
    return coords @ G.T


def lambda_profile(orbit: CompactOrbit, density: int, normalizer: float = 1.0, offset=None,
                   budget=DEFAULT_ENUM_BUDGET) -> EmpiricalMeasure:
    """Distribution of log(lambda_1(exp(v) x)) / normalizer over the orbit grid."""
    vs = fundamental_sample(orbit.stabilizer, density, offset)
    vals = []
    for v in vs:
        lam = shortest_sup(apply_diagonal(v, orbit.point).basis(), budget)
        vals.append(np.log(lam) / normalizer)
    mu = EmpiricalMeasure.uniform(vals, "scalar")
    mu.meta["lambda1"] = [float(np.exp(t * normalizer)) for t in vals]
    return mu


def escape_fraction(profile: EmpiricalMeasure, threshold) -> Fraction:
    if len(profile) == 0:
        raise EmptyMeasure("empty profile")
    mass = sum((w for x, w in zip(profile.payloads, profile.weights) if float(x) <= threshold), Fraction(0))
    return mass / profile.total_mass()


# -- the min-coordinate oracle -------------------------------------------------

@dataclass(frozen=True)
class SimplexPolytope:
    """F_pi = {v in R^n, sum v = 0 : v_pi(i) >= v_pi(i+1) - 1 cyclically}."""
    perm: tuple

    @property
    def n(self):
        return len(self.perm)

    def inequalities(self):
        """Rows (a, b) meaning a . v <= b."""
        out = []
        for i in range(self.n):
            a = np.zeros(self.n)
            a[self.perm[(i + 1) % self.n]] += 1
            a[self.perm[i]] -= 1
            out.append((a, 1.0))
        return out

    def contains(self, v, tol=0.0):
        v = np.atleast_2d(v)
        ok = np.ones(len(v), dtype=bool)
        for a, b in self.inequalities():
            ok &= v @ a <= b + tol
        return ok

    def bounding_box(self):
        # any two coordinates differ by at most n - 1 along the cycle, and they sum to zero
        h = (self.n - 1)
        return -h, h


def min_co_samples(perm, n, samples, seed, batch=None):
    perm = tuple(perm)
    if sorted(perm) != list(range(n)):
        raise ValueError("perm must be a permutation of range(n)")
    if n > 5:
        raise ValueError("min_co_cdf is limited to n <= 5")
    poly = SimplexPolytope(perm)
    lo, hi = poly.bounding_box()
    rng = np.random.default_rng(seed)
    batch = batch or max(1000, 4 * samples)
    out, drawn = [], 0
    while sum(len(o) for o in out) < samples:
        free = rng.uniform(lo, hi, size=(batch, n - 1))
        v = np.column_stack([free, -free.sum(axis=1)])
        keep = v[poly.contains(v)]
        drawn += batch
        out.append(keep.min(axis=1))
        got = sum(len(o) for o in out)
        if drawn >= 10 * batch and got / drawn < REJECTION_FLOOR:
            raise RejectionStall(f"acceptance rate {got / drawn:.2e}")
    vals = np.concatenate(out)[:samples]
    if vals.min() < -(n - 1) / 2 - 1e-12 or vals.max() > 1e-12:
        raise AssertionError("min-co sample outside [-(n-1)/2, 0]")
    return vals


def min_co_cdf(perm, n, samples, seed):
    """Monte-Carlo CDF of the minimal coordinate on F_pi, as a callable with its samples attached."""
    vals = np.sort(min_co_samples(perm, n, samples, seed))

    def cdf(t):
        return np.searchsorted(vals, np.asarray(t, dtype=float), side="right") / len(vals)

    cdf.samples = vals
    return cdf


def min_co_cdf_exact_n2(t):
    t = np.asarray(t, dtype=float)
    return np.clip(1 + 2 * t, 0.0, 1.0)


def min_co_quantile(n, c, samples=200000, seed=0):
    """eta with m_F(min-co in [-eta, 0]) = c."""
    if n == 2:
        return c / 2
    vals = min_co_samples(tuple(range(n)), n, samples, seed)
    return float(-np.quantile(vals, 1 - c))


# -- boxed maps and gluing -------------------------------------------------------

def gaps(v):
    v = np.asarray(v, dtype=float)
    return v[:-1] - v[1:]


def from_gaps(g):
    """The trace-zero vector with the given consecutive gaps."""
    g = np.asarray(g, dtype=float)
    v = np.concatenate([[0.0], -np.cumsum(g)])
    return v - v.mean()


def precedes(v, vp, tol=1e-12):
    return bool(np.all(gaps(v) <= gaps(vp) + tol))


@dataclass
class BoxedMap:
    v0: np.ndarray
    base: np.ndarray  # basis matrix of f(0)

    def __post_init__(self):
        self.v0 = np.asarray(self.v0, dtype=float)
        self.base = np.asarray(self.base, dtype=float)
        if not precedes(np.zeros_like(self.v0), self.v0):
            raise ValueError("box corner must satisfy 0 < v0")

    def __call__(self, v):
        return np.exp(np.asarray(v, dtype=float))[:, None] * self.base

    def grid(self, corner, per_axis):
        """Grid of the box {0 < v < corner}."""
        g = gaps(corner)
        if np.any(g < -1e-12):
            return []
        axes = [np.linspace(0, max(gi, 0.0), per_axis) for gi in g]
        return [from_gaps(t) for t in itertools.product(*axes)]


@dataclass
class GlueReport:
    R: float
    rho: float
    max_error_box1: float
    max_error_box2: float
    closing_error: float
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return {"R": self.R, "rho": self.rho, "max_error_box1": self.max_error_box1,
                "max_error_box2": self.max_error_box2, "closing_error": self.closing_error}


def glue_boxes(f1: BoxedMap, f2: BoxedMap, closing, R, per_axis=5, tol=1e-6):
    """Concatenate f1 and f2 through k_l exp(v0) k_u f1(v1) = f2(0)."""
    k_u, v0, k_l = (np.asarray(c, dtype=float) for c in closing)
    v1, v2 = f1.v0, f2.v0
    n = len(v1)
    rho = float(np.sqrt(R))
    W = w0(n)
    if not (precedes(R * W, v1) and precedes(R * W, v2)):
        raise ValueError("boxes must dominate R w0")
    end = k_l @ np.diag(np.exp(v0)) @ k_u @ f1(v1)
    closing_error, _ = basis_distance(reduce_basis(end)[0], reduce_basis(f2(np.zeros(n)))[0])
    if closing_error > tol:
        raise ClosingMismatch(f"closing misses f2(0) by {closing_error:.3g}")
    base = np.diag(np.exp(-v1)) @ k_u @ np.diag(np.exp(v1)) @ f1(np.zeros(n))
    v3 = v1 + v2 + v0
    f = BoxedMap(v3, base)
    w1 = rho * W
    w2 = v1 + rho * W + v0
    errs = []
    for fi, vi, wi in ((f1, v1, w1), (f2, v2, w2)):
        worst = 0.0
        for v in fi.grid(vi - 2 * rho * W, per_axis):
            a = reduce_basis(f(wi + v))[0]
            b = reduce_basis(fi(rho * W + v))[0]
            worst = max(worst, basis_distance(a, b)[0])
        errs.append(worst)
    return f, GlueReport(float(R), rho, errs[0], errs[1], float(closing_error), {"v3": v3.tolist()})


def closing_search(B0, B1, search_bound=1, minor_tol=1e-6):
    """(k_u, v0, k_l) with k_u exp(v0) k_l B0 spanning the lattice of B1.

    Searches gamma near round(B1^-1 B0) and sign flips so that B1 gamma B0^-1
    has a U A L factorization with positive diagonal; the factorization with
    the smallest max(||k_u - I||, ||v0||, ||k_l - I||) is returned.
    """
    B0 = _as_basis(B0)
    B1 = _as_basis(B1)
    n = B0.shape[0]
    R0, _ = reduce_basis(B0)
    R1, _ = reduce_basis(B1)
    B0inv = np.linalg.inv(R0)
    g0 = np.rint(np.linalg.solve(R1, R0))
    eye = np.eye(n)
    best, best_score, obstruction = None, np.inf, None
    rng = range(-search_bound, search_bound + 1)
    for delta in itertools.product(rng, repeat=n * n):
        gam = g0 + np.array(delta, dtype=float).reshape(n, n)
        d = np.linalg.det(gam)
        if abs(abs(d) - 1) > 1e-9:
            continue
        for signs in itertools.product((1.0, -1.0), repeat=n):
            gs = gam * np.array(signs)
            g = R1 @ gs @ B0inv
            if np.linalg.det(g) <= 0:
                continue
            try:
                u, a, l = ual_factorize(g, minor_tol)
            except SingularMinor as exc:
                obstruction = str(exc)
                continue
            diag = np.diag(a)
            if np.any(diag <= 0):
                obstruction = "negative diagonal"
                continue
            v0 = np.log(diag)
            score = max(np.abs(u - eye).sum(axis=1).max(), np.abs(v0).max(), np.abs(l - eye).sum(axis=1).max())
            if score < best_score - 1e-12:
                best, best_score = (u, v0, l), score
    if best is None:
        raise NotFound(f"no U A L closing within bound {search_bound}: {obstruction}", best=obstruction)
    return best


def _as_basis(x):
    if isinstance(x, LatticePoint):
        return x.basis()
    return np.asarray(x, dtype=float)


def closing_for_glue(f1: BoxedMap, f2: BoxedMap, search_bound=1):
    """Closing data in the orientation glue_boxes expects."""
    n = len(f1.v0)
    u, v, l = closing_search(f2(np.zeros(n)), f1(f1.v0), search_bound)
    return np.linalg.inv(u), -v, np.linalg.inv(l)
