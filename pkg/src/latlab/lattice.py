"""Points of X_n (unimodular lattices) with exact sublattice bookkeeping.

A point stores a floating reference basis with |det| = 1, an exact rational
transform Q and an exact scale r so that the lattice is spanned by the columns
of ``ref_basis @ Q * r**(1/n)``.  Hecke sublattices only touch Q and r.
Norms are sup norms throughout; balls are cubes.
"""
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact
from .errors import EnumerationBudgetExceeded, SingularBasis, SingularMinor

DEFAULT_ENUM_BUDGET = 10 ** 7
UNIMODULAR_TOL = 1e-8
_REL_EPS = 1e-12


@dataclass(frozen=True, eq=False)
class LatticePoint:
    ref_basis: np.ndarray
    transform: tuple
    scale: Fraction  # the lattice is scaled by scale ** (1/n)

    @property
    def n(self):
        return self.ref_basis.shape[0]

    def scale_factor(self):
        return float(self.scale) ** (1.0 / self.n)

    def basis(self):
        Q = np.array([[float(v) for v in row] for row in self.transform])
        return self.ref_basis @ Q * self.scale_factor()

    def covolume(self):
        return abs(np.linalg.det(self.basis()))

    def is_unimodular(self, tol=UNIMODULAR_TOL):
        return abs(self.covolume() - 1.0) < tol

    def sublattice(self, H):
        """The rescaled sublattice spanned by (current basis) @ H, H an integer matrix."""
        H = exact.as_matrix(H)
        d = exact.det(H)
        if d == 0:
            raise SingularBasis("sublattice matrix is singular")
        return LatticePoint(self.ref_basis, exact.matmul(self.transform, H), self.scale / abs(d))

    def to_json(self):
        den = exact.common_denominator(self.transform)
        return {
            "ref_basis": [[repr(float(v)) for v in row] for row in self.ref_basis],
            "transform_num": [[int(v * den) for v in row] for row in self.transform],
            "transform_den": den,
            "scale_num": self.scale.numerator,
            "scale_den": self.scale.denominator,
            "scale_root": self.n,
        }

    def dumps(self):
        return json.dumps(self.to_json())


def point_from_json(doc):
    ref = np.array([[float(v) for v in row] for row in doc["ref_basis"]])
    den = int(doc.get("transform_den", 1))
    Q = tuple(tuple(Fraction(int(v), den) for v in row) for row in doc["transform_num"])
    if int(doc.get("scale_root", ref.shape[0])) != ref.shape[0]:
        raise ValueError("scale_root must equal the dimension")
    return LatticePoint(ref, Q, Fraction(int(doc["scale_num"]), int(doc["scale_den"])))


def make_point(basis, transform=None) -> LatticePoint:
    """Normalize an invertible real basis (columns) to covolume one.

    With ``transform`` the lattice is basis @ transform and the exact part of
    the covolume is carried by the scale.
    """
    B = np.array(basis, dtype=float)
    n = B.shape[0]
    if B.shape != (n, n):
        raise SingularBasis("basis must be square")
    d = np.linalg.det(B)
    if not np.isfinite(d) or abs(d) < 1e-300:
        raise SingularBasis("basis is singular")
    ref = B / abs(d) ** (1.0 / n)
    if transform is None:
        return LatticePoint(ref, exact.identity(n), Fraction(1))
    Q = exact.as_matrix(transform)
    dq = exact.det(Q)
    if dq == 0:
        raise SingularBasis("transform is singular")
    return LatticePoint(ref, Q, 1 / abs(dq))


def integer_lattice(n):
    return make_point(np.eye(n))


def as_diagonal(v, tol=1e-9):
    v = np.asarray(v, dtype=float)
    if abs(v.sum()) > tol * max(1.0, np.abs(v).max()):
        raise ValueError("diagonal vector must sum to zero")
    return v


def apply_diagonal(v, x: LatticePoint) -> LatticePoint:
    v = as_diagonal(v)
    return LatticePoint(np.exp(v)[:, None] * x.ref_basis, x.transform, x.scale)


def apply_matrix(g, x: LatticePoint) -> LatticePoint:
    """g . x for a real matrix with |det g| = 1."""
    return LatticePoint(np.asarray(g, dtype=float) @ x.ref_basis, x.transform, x.scale)


def w0(n):
    return np.array([(n + 1 - 2 * i) / 2 for i in range(1, n + 1)])


# -- reduction and enumeration ----------------------------------------------

def reduce_basis(B, delta=0.99):
    """LLL-reduce the columns of B. Returns (B @ U, U) with U unimodular integer."""
    B = np.array(B, dtype=float)
    n = B.shape[1]
    U = np.eye(n, dtype=np.int64)
    if n == 2:
        return _gauss_reduce(B, U)
    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            break
        Q, R = np.linalg.qr(B)
        for j in range(k - 1, -1, -1):
            mu = R[j, k] / R[j, j]
            q = round(mu)
            if q:
                B[:, k] -= q * B[:, j]
                U[:, k] -= q * U[:, j]
                R[:, k] -= q * R[:, j]
        if R[k, k] ** 2 + R[k - 1, k] ** 2 >= delta * R[k - 1, k - 1] ** 2:
            k += 1
        else:
            B[:, [k - 1, k]] = B[:, [k, k - 1]]
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            k = max(k - 1, 1)
    return B, U


def _gauss_reduce(B, U):
    b1, b2 = B[:, 0].copy(), B[:, 1].copy()
    u1, u2 = U[:, 0].copy(), U[:, 1].copy()
    if b1 @ b1 > b2 @ b2:
        b1, b2, u1, u2 = b2, b1, u2, u1
    for _ in range(10000):
        q = round((b1 @ b2) / (b1 @ b1))
        b2 = b2 - q * b1
        u2 = u2 - q * u1
        if b2 @ b2 >= b1 @ b1:
            break
        b1, b2, u1, u2 = b2, b1, u2, u1
    return np.column_stack([b1, b2]), np.column_stack([u1, u2])


def enumerate_vectors(B, radius, budget=DEFAULT_ENUM_BUDGET):
    """All nonzero integer c with ||B c||_sup <= radius (up to relative round-off).

    Returns (coefficients, vectors) as arrays. Uses Fincke-Pohst over the
    Euclidean ball of radius radius*sqrt(n), which contains the cube.
    """
    B = np.asarray(B, dtype=float)
    n = B.shape[1]
    slack = radius * (1 + 1e-9)
    R = np.linalg.qr(B, mode="r")
    bound2 = slack * slack * n
    coeffs = []
    c = [0] * n
    visited = 0
    diag = np.abs(np.diag(R))

    def rec(level, partial2):
        nonlocal visited
        # centre of the admissible interval for coordinate `level`
        s = sum(R[level, j] * c[j] for j in range(level + 1, n))
        centre = -s / R[level, level]
        span = np.sqrt(max(bound2 - partial2, 0.0)) / diag[level]
        lo = int(np.ceil(centre - span - 1e-12))
        hi = int(np.floor(centre + span + 1e-12))
        visited += max(hi - lo + 1, 0)
        if visited > budget:
            raise EnumerationBudgetExceeded(f"more than {budget} candidates", partial=len(coeffs))
        for ci in range(lo, hi + 1):
            c[level] = ci
            t = R[level, level] * ci + s
            p2 = partial2 + t * t
            if p2 > bound2 * (1 + 1e-12):
                continue
            if level == 0:
                coeffs.append(tuple(c))
            else:
                rec(level - 1, p2)
        c[level] = 0

    rec(n - 1, 0.0)
    C = np.array([cv for cv in coeffs if any(cv)], dtype=np.int64).reshape(-1, n)
    V = C @ B.T if len(C) else np.zeros((0, B.shape[0]))
    keep = np.abs(V).max(axis=1) <= slack if len(C) else np.zeros(0, dtype=bool)
    return C[keep], V[keep]


def _sup(v):
    return np.abs(v).max(axis=-1)


def successive_minima(x: LatticePoint, upto=None, budget=DEFAULT_ENUM_BUDGET):
    n = x.n
    upto = n if upto is None else upto
    if n > 5:
        raise ValueError("successive minima are limited to n <= 5")
    if not 1 <= upto <= n:
        raise ValueError("upto must be in 1..n")
    return minima_of_basis(x.basis(), upto, budget)


def minima_of_basis(B, upto, budget=DEFAULT_ENUM_BUDGET):
    Bred, _ = reduce_basis(B)
    norms = np.sort(_sup(Bred.T))
    radius = norms[upto - 1]
    C, V = enumerate_vectors(Bred, radius, budget)
    sups = _sup(V)
    order = np.lexsort((np.arange(len(sups)), sups))
    chosen, minima = [], []
    for idx in order:
        cand = chosen + [list(C[idx])]
        if exact.rank(cand) == len(cand):
            chosen = cand
            minima.append(sups[idx])
            if len(minima) == upto:
                break
    return np.array(minima)


def shortest_sup(B, budget=DEFAULT_ENUM_BUDGET):
    """lambda_1 of the lattice spanned by the columns of B (sup norm)."""
    Bred, _ = reduce_basis(B)
    radius = _sup(Bred.T).min()
    _, V = enumerate_vectors(Bred, radius, budget)
    return float(_sup(V).min())


def lambda1(x: LatticePoint, budget=DEFAULT_ENUM_BUDGET):
    return shortest_sup(x.basis(), budget)


def count_points_in_ball(x: LatticePoint, r, budget=DEFAULT_ENUM_BUDGET):
    return count_in_ball_basis(x.basis(), r, budget)


def count_in_ball_basis(B, r, budget=DEFAULT_ENUM_BUDGET):
    if r <= 0:
        raise ValueError("radius must be positive")
    Bred, _ = reduce_basis(B)
    C, _ = enumerate_vectors(Bred, r, budget)
    return int(len(C))


# -- distance ----------------------------------------------------------------

def op_norm(g):
    """Operator norm of g on (R^n, sup norm): the max absolute row sum."""
    return np.abs(g).sum(axis=-1).max(axis=-1)


def displacement(g):
    g = np.asarray(g, dtype=float)
    eye = np.eye(g.shape[-1])
    return np.maximum(op_norm(g - eye), op_norm(np.linalg.inv(g) - eye))


def lattice_distance(x: LatticePoint, y: LatticePoint, search_bound=1):
    """Upper bound for d(x, y) and whether the optimum was locally certified.

    Minimises max(||g - I||, ||g^-1 - I||) over g = B_y gamma B_x^-1 with
    gamma in GL_n(Z) within ``search_bound`` of round(B_y^-1 B_x).
    """
    Bx, _ = reduce_basis(x.basis())
    By, _ = reduce_basis(y.basis())
    return basis_distance(Bx, By, search_bound)


def basis_distance(Bx, By, search_bound=1):
    n = Bx.shape[0]
    Bxi = np.linalg.inv(Bx)
    seed = np.rint(np.linalg.solve(By, Bx)).astype(np.int64)
    b = int(search_bound)
    steps = np.arange(-b, b + 1)
    best, best_delta = np.inf, None
    # batch over the first row block to keep memory bounded
    eye = np.eye(n)
    deltas_rest = np.array(list(itertools.product(steps, repeat=n * n - n)), dtype=np.int64)
    for head in itertools.product(steps, repeat=n):
        D = np.concatenate([np.broadcast_to(np.array(head), (len(deltas_rest), n)), deltas_rest], axis=1)
        G = seed[None] + D.reshape(-1, n, n)
        dets = np.rint(np.linalg.det(G.astype(float)))
        ok = np.abs(dets) == 1
        if not ok.any():
            continue
        G = G[ok].astype(float)
        g = By[None] @ G @ Bxi[None]
        # det g is +-1 in exact arithmetic; drop candidates destroyed by rounding
        keep = np.abs(np.abs(np.linalg.det(g)) - 1) < 0.5
        g = g[keep]
        if not len(g):
            continue
        gi = np.linalg.inv(g)
        vals = np.maximum(op_norm(g - eye), op_norm(gi - eye))
        i = int(np.argmin(vals))
        if vals[i] < best:
            best, best_delta = float(vals[i]), D[ok][keep][i]
    if best_delta is None:
        return np.inf, False
    if best < 1e-12:
        return 0.0, True
    certified = b >= 1 and bool(np.all(np.abs(best_delta) < b))
    return best, certified


# -- U A L factorisation -------------------------------------------------------

def ual_factorize(g, minor_tol=1e-6):
    """g = u a l with u unit upper, a diagonal, l unit lower triangular."""
    g = np.array(g, dtype=float)
    n = g.shape[0]
    J = np.eye(n)[::-1]
    A = J @ g @ J
    L = np.eye(n)
    Up = A.copy()
    minor = 1.0
    for k in range(n):
        minor *= Up[k, k]
        if abs(minor) < minor_tol:
            raise SingularMinor(f"trailing minor of order {k + 1} is {minor:.3g}")
        for i in range(k + 1, n):
            f = Up[i, k] / Up[k, k]
            L[i, k] = f
            Up[i, :] -= f * Up[k, :]
    d = np.diag(Up).copy()
    Unit = Up / d[:, None]
    u = J @ L @ J
    a = np.diag(d[::-1])
    l = J @ Unit @ J
    return u, a, l
