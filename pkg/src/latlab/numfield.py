"""Totally real number fields given by a monic integer polynomial.

Roots are isolated exactly with a Sturm sequence over the rationals, polished
with Newton's method in mpmath and then certified by an exact sign change on a
bracket of radius ``2**-precision_bits``.  Everything lives in the monogenic
order Z[alpha]; elements are coefficient vectors over the power basis.
"""
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import exact
from .errors import (
    DegenerateSpan,
    NonIntegralElement,
    NotAUnit,
    NotIrreducible,
    NotTotallyReal,
    PrecisionExhausted,
    RepeatedRoot,
    ZeroElement,
)

DEFAULT_PRECISION_BITS = 128
LOG_TOL_ULPS = 10


@dataclass(frozen=True)
class FieldElement:
    coeffs: tuple
    modulus: tuple = field(repr=False)

    def __post_init__(self):
        if len(self.coeffs) != len(self.modulus) - 1:
            raise ValueError("coefficient vector length must equal the field degree")

    @classmethod
    def from_poly(cls, poly, modulus):
        r = exact.poly_mod([Fraction(c) for c in poly], list(modulus))
        n = len(modulus) - 1
        coeffs = tuple(Fraction(r[i]) if i < len(r) else Fraction(0) for i in range(n))
        return cls(coeffs, tuple(modulus))

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            return other
        return FieldElement.from_poly([other], self.modulus)

    def __add__(self, other):
        other = self._coerce(other)
        return FieldElement(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.modulus)

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(tuple(-a for a in self.coeffs), self.modulus)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return FieldElement.from_poly(exact.poly_mul(list(self.coeffs), list(other.coeffs)), self.modulus)

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = FieldElement.from_poly([1], self.modulus)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def is_integral(self):
        return all(c.denominator == 1 for c in self.coeffs)


@dataclass(frozen=True)
class NumberField:
    min_poly: tuple  # integer coefficients, c0 first, leading 1 last
    roots: tuple  # mpf values, one per embedding, in embedding order
    radius: object  # certified error radius (mpf)
    precision_bits: int = DEFAULT_PRECISION_BITS
    embedding_order: tuple = ()

    @property
    def degree(self):
        return len(self.min_poly) - 1

    def element(self, coeffs):
        return FieldElement.from_poly(list(coeffs), self.min_poly)

    def one(self):
        return self.element([1])

    def alpha(self):
        return self.element([0, 1])

    def reorder(self, order):
        """Return the same field with embeddings permuted: new sigma_i = old sigma_{order[i]}."""
        order = tuple(order)
        if sorted(order) != list(range(self.degree)):
            raise ValueError("order must be a permutation")
        return NumberField(self.min_poly, tuple(self.roots[i] for i in order), self.radius,
                           self.precision_bits, tuple(self.embedding_order[i] for i in order))

    def roots_float(self):
        return np.array([float(r) for r in self.roots])

    def to_json(self):
        with mpmath.workprec(self.precision_bits):
            digits = int(self.precision_bits * 0.30103) + 2
            roots = [mpmath.nstr(r, digits) for r in self.roots]
        return {"degree": self.degree, "min_poly": list(self.min_poly), "roots": roots,
                "precision_bits": self.precision_bits}

    def dumps(self):
        return json.dumps(self.to_json(), indent=2)


def field_from_json(doc):
    poly = [int(c) for c in doc["min_poly"]]
    fld = build_field(poly, precision_bits=int(doc.get("precision_bits", DEFAULT_PRECISION_BITS)),
                      assume_irreducible=True)
    stored = [mpmath.mpf(r) for r in doc.get("roots", [])]
    if stored:
        # keep the serialized embedding order
        order = [min(range(fld.degree), key=lambda i: abs(fld.roots[i] - s)) for s in stored]
        fld = fld.reorder(order)
    return fld


# -- root isolation ----------------------------------------------------------

def _sturm_chain(f):
    chain = [[Fraction(c) for c in f], [Fraction(c) for c in exact.poly_deriv(f)]]
    while exact.poly_degree(chain[-1]) > 0:
        r = exact.poly_mod(chain[-2], chain[-1])
        if exact.poly_degree(r) < 0:
            break
        chain.append([-c for c in r])
    return chain


def _sign_changes(chain, x):
    signs = [s for s in (_sign(exact.poly_eval(p, x)) for p in chain) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _sign(v):
    return (v > 0) - (v < 0)


def _count_roots(chain, lo, hi):
    """Distinct real roots in the half-open interval (lo, hi]."""
    return _sign_changes(chain, lo) - _sign_changes(chain, hi)


def _isolate(chain, lo, hi, count, out):
    if count == 0:
        return
    if count == 1:
        # the open end may itself be a (neighbouring) root; move it inwards
        step = (hi - lo) / 2
        while exact.poly_eval(chain[0], lo) == 0:
            if _count_roots(chain, lo + step, hi) == 1:
                lo = lo + step
            step /= 2
        out.append((lo, hi))
        return
    mid = (lo + hi) / 2
    left = _count_roots(chain, lo, mid)
    _isolate(chain, lo, mid, left, out)
    _isolate(chain, mid, hi, count - left, out)


def _bisect(f, lo, hi, width):
    flo = _sign(exact.poly_eval(f, lo))
    if flo == 0:
        return lo, lo
    while hi - lo > width:
        mid = (lo + hi) / 2
        fm = _sign(exact.poly_eval(f, mid))
        if fm == 0:
            return mid, mid
        if fm == flo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _mpf_to_fraction(x):
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(man) * (Fraction(2) ** exp) if exp >= 0 else Fraction(man, 2 ** -exp)


def _certified_root(f, lo, hi, bits):
    """A root inside the isolating interval (lo, hi], certified to radius 2**-bits."""
    fi = [int(c) for c in f]
    if exact.poly_eval(fi, hi) == 0:
        return mpmath.mpf(hi.numerator) / hi.denominator
    lo, hi = _bisect(fi, lo, hi, Fraction(1, 2 ** 40))
    if lo == hi:
        return mpmath.mpf(lo.numerator) / lo.denominator
    rad = Fraction(1, 2 ** bits)
    with mpmath.workprec(bits + 64):
        x = (mpmath.mpf(lo.numerator) / lo.denominator + mpmath.mpf(hi.numerator) / hi.denominator) / 2
        df = exact.poly_deriv(fi)
        for _ in range(12):
            step = exact.poly_eval(fi, x) / exact.poly_eval(df, x)
            x -= step
            if abs(step) < mpmath.mpf(2) ** (-bits - 32):
                break
        xq = _mpf_to_fraction(x)
        a, b = xq - rad, xq + rad
        sa, sb = _sign(exact.poly_eval(fi, a)), _sign(exact.poly_eval(fi, b))
        if sa * sb <= 0 and lo <= xq <= hi:
            return +x
    # Newton failed to land in the bracket; fall back to plain bisection
    lo, hi = _bisect(fi, lo, hi, rad)
    with mpmath.workprec(bits + 64):
        return (mpmath.mpf(lo.numerator) / lo.denominator + mpmath.mpf(hi.numerator) / hi.denominator) / 2


def build_field(min_poly: Sequence[int], precision_bits: int = DEFAULT_PRECISION_BITS,
                assume_irreducible: bool = False, order=None) -> NumberField:
    poly = [int(c) for c in min_poly]
    if any(int(c) != c for c in min_poly):
        raise ValueError("coefficients must be integers")
    poly = exact.poly_trim(poly)
    n = len(poly) - 1
    if n < 2:
        raise ValueError("degree must be at least 2")
    if poly[-1] != 1:
        raise ValueError("polynomial must be monic")
    if not assume_irreducible:
        if n > 4:
            raise NotIrreducible("degree > 4 requires assume_irreducible=True")
        c0 = poly[0]
        if c0 == 0:
            raise NotIrreducible("0 is a root")
        for d in _divisors(abs(c0)):
            for r in (d, -d):
                if exact.poly_eval(poly, r) == 0:
                    raise NotIrreducible(f"rational root {r}")
    g = exact.poly_gcd(poly, exact.poly_deriv(poly))
    if exact.poly_degree(g) > 0:
        raise RepeatedRoot("polynomial is not squarefree")
    chain = _sturm_chain(poly)
    bound = Fraction(1 + max(abs(c) for c in poly[:-1]))
    total = _count_roots(chain, -bound, bound)
    if total < n:
        raise NotTotallyReal(f"only {total} of {n} roots are real")
    intervals = []
    _isolate(chain, -bound, bound, total, intervals)
    roots = [_certified_root(poly, lo, hi, precision_bits) for lo, hi in intervals]
    with mpmath.workprec(precision_bits + 64):
        radius = mpmath.mpf(2) ** (-precision_bits)
        gaps = [roots[i + 1] - roots[i] for i in range(n - 1)]
        if min(gaps) <= 2 * radius:
            raise RepeatedRoot("root separation below certification radius")
    fld = NumberField(tuple(poly), tuple(roots), radius, precision_bits, tuple(range(n)))
    if order is not None:
        fld = fld.reorder(order)
    return fld


def _divisors(m):
    out = []
    d = 1
    while d * d <= m:
        if m % d == 0:
            out.extend({d, m // d})
        d += 1
    return sorted(out)


# -- element operations ------------------------------------------------------

def _check_member(fld, e):
    if tuple(e.modulus) != tuple(fld.min_poly):
        raise ValueError("element belongs to a different field")


def embed_element(fld: NumberField, e: FieldElement, with_error=False):
    """Real embeddings (sigma_1(e), ..., sigma_n(e)) as mpf values."""
    _check_member(fld, e)
    coeffs = list(e.coeffs)
    with mpmath.workprec(fld.precision_bits + 32):
        cs = [mpmath.mpf(c.numerator) / c.denominator for c in coeffs]
        vals = [exact.poly_eval(cs, r) for r in fld.roots]
        if not with_error:
            return vals
        dcs = exact.poly_deriv(cs)
        errs = []
        for r in fld.roots:
            slope = sum(abs(c) * (abs(r) + fld.radius) ** i for i, c in enumerate(dcs))
            errs.append(slope * fld.radius)
        return vals, errs


def embed_float(fld, e):
    return np.array([float(v) for v in embed_element(fld, e)])


def field_norm(fld: NumberField, e: FieldElement) -> Fraction:
    """Exact norm N(e) = Res(f, e) for the monic minimal polynomial f."""
    _check_member(fld, e)
    if e.is_zero():
        raise ZeroElement("norm of zero")
    return Fraction(exact.resultant(list(fld.min_poly), list(e.coeffs)))


def log_embedding(fld: NumberField, u: FieldElement):
    """(log|sigma_i(u)|)_i for a unit u; the coordinates sum to zero."""
    if abs(field_norm(fld, u)) != 1:
        raise NotAUnit("|norm| != 1")
    vals, errs = embed_element(fld, u, with_error=True)
    with mpmath.workprec(fld.precision_bits + 32):
        ulp = mpmath.mpf(2) ** (-fld.precision_bits)
        cs = [abs(mpmath.mpf(c.numerator) / c.denominator) for c in u.coeffs]
        rel = []
        for v, e, r in zip(vals, errs, fld.roots):
            # root error plus rounding in the evaluation, relative to |sigma_i(u)|
            scale = sum(c * abs(r) ** i for i, c in enumerate(cs))
            err = e + LOG_TOL_ULPS * ulp * scale
            if err >= abs(v) / 2:
                raise PrecisionExhausted("embedding not resolved at this precision")
            rel.append(2 * err / abs(v))
        logs = [mpmath.log(abs(v)) for v in vals]
        total = sum(logs)
        if abs(total) > sum(rel) + LOG_TOL_ULPS * ulp * (1 + sum(abs(x) for x in logs)):
            raise PrecisionExhausted(f"log coordinates sum to {mpmath.nstr(total, 5)}")
        return np.array([float(x) for x in logs])


def in_suborder(fld: NumberField, u: FieldElement, p: int, k: int = 1) -> bool:
    """Is u in Z + p^k Z[alpha]?"""
    _check_member(fld, u)
    if not u.is_integral():
        raise NonIntegralElement("element is not in Z[alpha]")
    q = p ** k
    return all(c.numerator % q == 0 for c in u.coeffs[1:])


def multiplication_matrix(fld: NumberField, u: FieldElement):
    """Exact matrix of x -> u x on the power basis (columns are images)."""
    _check_member(fld, u)
    n = fld.degree
    cols = [(u * fld.element([0] * j + [1])).coeffs for j in range(n)]
    return exact.transpose(cols)


@dataclass(frozen=True)
class UnitLogLattice:
    generators: np.ndarray  # n x (n-1), columns in the trace-zero hyperplane
    regulator: float

    @property
    def dim(self):
        return self.generators.shape[0]

    @property
    def rank(self):
        return self.generators.shape[1]


def unit_log_lattice(fld: NumberField, units: Sequence[FieldElement], denominator_cap: int = 10 ** 4):
    """Lattice spanned by the log embeddings of ``units`` inside the trace-zero hyperplane."""
    n = fld.degree
    vecs = [log_embedding(fld, u) for u in units]
    basis = []
    for v in vecs:
        trial = np.column_stack(basis + [v]) if basis else v[:, None]
        if np.linalg.matrix_rank(trial, tol=1e-9 * (1 + np.abs(trial).max())) == trial.shape[1]:
            basis.append(v)
        if len(basis) == n - 1:
            break
    if len(basis) < n - 1:
        raise DegenerateSpan(f"log vectors span rank {len(basis)} < {n - 1}")
    B = np.column_stack(basis)
    # express every vector over the chosen basis and take the Z-span of all of them
    coords = [np.linalg.lstsq(B, v, rcond=None)[0] for v in vecs]
    rows = [[Fraction(float(c)).limit_denominator(denominator_cap) for c in cv] for cv in coords]
    den = exact.common_denominator(rows)
    int_rows = [[int(c * den) for c in row] for row in rows]
    hnf = _row_hnf(int_rows)
    T = np.array([[c / den for c in row] for row in hnf], dtype=float).T  # (n-1) x (n-1)
    G = B @ T
    G = np.where(np.abs(G) < 1e-300, 0.0, G)
    reg = float(np.sqrt(abs(np.linalg.det(G.T @ G))))
    return UnitLogLattice(G, reg)


def _row_hnf(rows):
    """Nonzero rows of the row-style Hermite form of an integer matrix."""
    m = [list(r) for r in rows]
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        while True:
            nz = [i for i in range(r, len(m)) if m[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(m[i][c]))
            m[r], m[piv] = m[piv], m[r]
            done = True
            for i in range(r + 1, len(m)):
                q = m[i][c] // m[r][c]
                m[i] = [x - q * y for x, y in zip(m[i], m[r])]
                if m[i][c]:
                    done = False
            if done:
                break
        if any(m[i][c] for i in range(r, len(m))):
            if m[r][c] < 0:
                m[r] = [-x for x in m[r]]
            r += 1
    return [row for row in m[:r]]
