"""p-Hecke neighbours: exact enumeration, the norm bound and measure pushforward.

Neighbours of x are the sublattices x' of x with x/x' of elementary divisor
type (p^k1, ..., p^kn), rescaled to covolume one.  They are listed once each
via their column Hermite normal form H (upper triangular, 0 <= H[i, j] <
H[i, i] for j > i) in the coordinates of x's basis.
"""
import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from . import exact
from .errors import BudgetExceeded, NeighborBudgetExceeded
from .lattice import LatticePoint, integer_lattice, lattice_distance
from .measure import EmpiricalMeasure

DEFAULT_NEIGHBOR_CAP = 10 ** 6
COMPOSITION_PAIR_CAP = 10 ** 8


def is_prime(p):
    if p < 2:
        return False
    return all(p % d for d in range(2, math.isqrt(p) + 1))


def next_prime(x):
    p = max(2, math.floor(x) + 1)
    while not is_prime(p):
        p += 1
    return p


@dataclass(frozen=True)
class HeckeType:
    p: int
    exponents: tuple

    def __post_init__(self):
        exps = tuple(int(k) for k in self.exponents)
        object.__setattr__(self, "exponents", exps)
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if any(k < 0 for k in exps) or list(exps) != sorted(exps):
            raise ValueError("exponents must be nonnegative and ascending")

    @classmethod
    def normalized(cls, p, exponents):
        """Sorted exponents shifted so the smallest is zero (negative ones allowed)."""
        exps = sorted(int(k) for k in exponents)
        return cls(p, tuple(k - exps[0] for k in exps))

    @property
    def n(self):
        return len(self.exponents)

    @property
    def s(self):
        return sum(self.exponents)

    def divisors(self):
        return [self.p ** k for k in self.exponents]


def cusp_type(p, n):
    """The type of a_p = diag(p^-(n-1)/n, p^1/n, ..., p^1/n): exponents (0, 1, ..., 1)."""
    return HeckeType(p, (0,) + (1,) * (n - 1))


def hyperplane_type(p, n):
    return HeckeType(p, (0,) * (n - 1) + (1,))


def _hnf_candidates(n, p, kmax, s):
    for diag in itertools.product(range(kmax + 1), repeat=n):
        if sum(diag) != s:
            continue
        d = [p ** e for e in diag]
        slots = [(i, j) for i in range(n) for j in range(i + 1, n)]
        for vals in itertools.product(*[range(d[i]) for i, _ in slots]):
            H = [[0] * n for _ in range(n)]
            for i in range(n):
                H[i][i] = d[i]
            for (i, j), v in zip(slots, vals):
                H[i][j] = v
            yield H


def neighbor_matrices(t: HeckeType, cap=DEFAULT_NEIGHBOR_CAP):
    """Hermite forms of all sublattices of Z^n with quotient type t, in a fixed order."""
    target = t.divisors()
    if t.s == 0:
        return [tuple(tuple(int(i == j) for j in range(t.n)) for i in range(t.n))]
    out = []
    for H in _hnf_candidates(t.n, t.p, t.exponents[-1], t.s):
        if exact.smith_diagonal(H) == target:
            out.append(tuple(tuple(row) for row in H))
            if len(out) > cap:
                raise NeighborBudgetExceeded(f"more than {cap} neighbours")
    return out


def neighbor_count_formula_hyperplane(n, p):
    return (p ** n - 1) // (p - 1)


@dataclass
class NeighborSet:
    base: LatticePoint
    htype: HeckeType
    matrices: list
    points: list

    @property
    def count(self):
        return len(self.points)

    @property
    def weight(self):
        return Fraction(1, self.count)


def enumerate_neighbors(x: LatticePoint, t: HeckeType, cap=DEFAULT_NEIGHBOR_CAP) -> NeighborSet:
    if t.n != x.n:
        raise ValueError("type length differs from lattice dimension")
    mats = neighbor_matrices(t, cap)
    return NeighborSet(x, t, mats, [x.sublattice(H) for H in mats])


def operator_norm_bound(t: HeckeType) -> float:
    """Product bound on ||T_a|| restricted to L^2_0(X_n)."""
    k, p, n = t.exponents, t.p, t.n
    out = 1.0
    for i in range(1, n // 2 + 1):
        gap = k[n - i] - k[i - 1]
        out *= p ** (-gap / 2) * (gap * (p - 1) + (p + 1)) / (p + 1)
    return out


def push_measure(mu: EmpiricalMeasure, t: HeckeType, cap=DEFAULT_NEIGHBOR_CAP) -> EmpiricalMeasure:
    if mu.domain != "lattice":
        raise TypeError("push_measure needs a measure on lattices")
    mats = neighbor_matrices(t, cap)
    w_each = Fraction(1, len(mats))
    payloads, weights = [], []
    for x, w in zip(mu.payloads, mu.weights):
        for H in mats:
            payloads.append(x.sublattice(H))
            weights.append(w * w_each)
    return EmpiricalMeasure(payloads, weights, "lattice")


def nearest_neighbor(x: LatticePoint, y: LatticePoint, t: HeckeType, search_bound=1, cap=DEFAULT_NEIGHBOR_CAP):
    """The neighbour of x closest to y, with its distance upper bound and index."""
    ns = enumerate_neighbors(x, t, cap)
    best = (None, math.inf, -1)
    for i, xp in enumerate(ns.points):
        d, _ = lattice_distance(xp, y, search_bound)
        if d < best[1]:
            best = (xp, d, i)
    return best


# -- composition -------------------------------------------------------------

def _shifted(p, exps):
    return HeckeType.normalized(p, exps).exponents


def composition_prediction(n, p, k, l):
    """Coefficients of T_a o T_a' for a ~ (-k, 0, ..., 0), a' ~ (-l, 0, ..., 0), grouped by type."""
    pred = Counter()
    base = Fraction(p ** (n - 1) - 1, p ** n - 1)
    pred[_shifted(p, (-(k + l),) + (0,) * (n - 1))] += Fraction(p ** (n - 1) * (p - 1), p ** n - 1)
    for i in range(1, l):
        pred[_shifted(p, (-(k + l - i), -i) + (0,) * (n - 2))] += base * Fraction(p - 1, p ** i)
    pred[_shifted(p, (-k, -l) + (0,) * (n - 2))] += base * Fraction(1, p ** (l - 1))
    return dict(pred)


def verify_composition(n, p, k, l, pair_cap=COMPOSITION_PAIR_CAP):
    """Brute-force the two-step neighbours of Z^n and compare with the predicted coefficients."""
    if not 1 <= k <= l:
        raise ValueError("need 1 <= k <= l")
    if p ** (n * (k + l)) > pair_cap:
        raise BudgetExceeded("two-step enumeration over budget")
    ta = HeckeType.normalized(p, (-k,) + (0,) * (n - 1))
    tb = HeckeType.normalized(p, (-l,) + (0,) * (n - 1))
    first = neighbor_matrices(tb)
    second = neighbor_matrices(ta)
    counts = Counter()
    for H1 in first:
        for H2 in second:
            H = exact.to_int_matrix(exact.matmul(H1, H2))
            divs = exact.smith_diagonal(H)
            exps = tuple(_vp(d, p) for d in divs)
            counts[_shifted(p, exps)] += 1
    total = len(first) * len(second)
    freq = {key: Fraction(v, total) for key, v in counts.items()}
    pred = composition_prediction(n, p, k, l)
    keys = sorted(set(freq) | set(pred))
    table = [{"type": list(key), "empirical": str(freq.get(key, 0)), "predicted": str(pred.get(key, 0))}
             for key in keys]
    return {
        "n": n, "p": p, "k": k, "l": l,
        "first_type": list(tb.exponents), "second_type": list(ta.exponents),
        "pairs": total,
        "table": table,
        "frequencies_sum": str(sum(freq.values(), Fraction(0))),
        "match": all(freq.get(key, 0) == pred.get(key, 0) for key in keys),
        "_freq": freq, "_pred": pred,
    }


def _vp(d, p):
    e = 0
    while d % p == 0:
        d //= p
        e += 1
    if d != 1:
        raise ValueError("not a prime power")
    return e


def neighbors_of_identity(t: HeckeType):
    return enumerate_neighbors(integer_lattice(t.n), t)
