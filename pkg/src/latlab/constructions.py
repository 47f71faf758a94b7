"""The two explicit polynomial families.

special_field(p, n): R(x) = ((p x - a_1)...(p x - a_n) - 1) / p^n where the a_i
are spread Hensel lifts of the roots of x^n + 1 mod p^n.  The units
u_i = (p alpha - a_i)^2 lie in Z + p Z[alpha] and multiply to one.

shapira_field(M, n): P(z) = (z - a_1)...(z - a_n) - 1 with a_i = floor(i M / n);
each a_i - alpha is a unit of norm -1.
"""
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import exact
from .errors import (
    BadCongruence,
    HenselFailure,
    LatlabError,
    NodesTooClose,
    PrecisionExhausted,
    RootCertificationFailure,
)
from .hecke import is_prime
from .numfield import (
    DEFAULT_PRECISION_BITS,
    FieldElement,
    NumberField,
    build_field,
    embed_element,
    field_norm,
    in_suborder,
    log_embedding,
)


def hensel_roots(n, p, e):
    """All solutions of x^n = -1 mod p^e, lifted from mod p by Newton steps (ascending)."""
    base = [r for r in range(1, p) if (pow(r, n, p) + 1) % p == 0]
    out = []
    for r in base:
        if (n * pow(r, n - 1, p)) % p == 0:
            raise HenselFailure(f"root {r} is singular mod {p}")
        x, prec = r, 1
        while prec < e:
            prec = min(2 * prec, e)
            mod = p ** prec
            fx = pow(x, n, mod) + 1
            dfx = n * pow(x, n - 1, mod)
            x = (x - fx * pow(dfx, -1, mod)) % mod
        out.append(x % p ** e)
    for x in out:
        if (pow(x, n, p ** e) + 1) % p ** e:
            raise HenselFailure(f"lift {x} is not a root mod p^{e}")
    return sorted(out)


@dataclass
class SpecialFieldData:
    p: int
    n: int
    residues: list
    nodes: list
    R: list  # integer coefficients, constant first
    field: NumberField
    units_linear: list  # p alpha - a_i
    units: list  # (p alpha - a_i)^2
    log_matrix: np.ndarray  # [i, j] = log sigma_i(u_j)

    def to_json(self):
        return {
            "kind": "special", "p": self.p, "n": self.n,
            "residues": self.residues, "nodes": self.nodes, "polynomial": self.R,
            "field": self.field.to_json(),
            "units": [[str(c) for c in u.coeffs] for u in self.units],
            "log_matrix": self.log_matrix.tolist(),
            "expected_log_matrix": expected_unit_log_matrix(self.p, self.n).tolist(),
        }


def special_field(p: int, n: int, min_prime=None, precision_bits=DEFAULT_PRECISION_BITS) -> SpecialFieldData:
    if not is_prime(p):
        raise BadCongruence(f"{p} is not prime")
    if p % (2 * n) != 1:
        raise BadCongruence(f"{p} is not 1 mod {2 * n}")
    if min_prime is not None and p < min_prime:
        raise BadCongruence(f"{p} is below the configured minimum {min_prime}")
    pn = p ** n
    residues = hensel_roots(n, p, n)
    if len(residues) != n:
        raise HenselFailure(f"found {len(residues)} roots of x^{n}+1 mod {p}^{n}")
    nodes = [a + 2 * i * pn for i, a in enumerate(residues)]
    prod = [1]
    for a in nodes:
        prod = exact.poly_mul(prod, [-a, p])
    shifted = exact.poly_add(prod, [-1])
    if any(c % pn for c in shifted):
        raise HenselFailure("product minus one is not divisible by p^n")
    R = [c // pn for c in shifted]
    bits = precision_bits
    while True:
        try:
            return _special_from_poly(p, n, residues, nodes, R, bits)
        except PrecisionExhausted:
            if bits >= MAX_PRECISION_BITS:
                raise
            bits *= 2


MAX_PRECISION_BITS = 2048


def _special_from_poly(p, n, residues, nodes, R, bits):
    try:
        fld = build_field(R, precision_bits=bits, assume_irreducible=True)
    except LatlabError as exc:
        raise RootCertificationFailure(str(exc)) from exc
    # sigma_i is the root next to a_i / p
    order = [min(range(n), key=lambda j: abs(fld.roots[j] - Fraction(a, p))) for a in nodes]
    if sorted(order) != list(range(n)):
        raise RootCertificationFailure("roots do not pair off with the nodes")
    fld = fld.reorder(order)
    alpha = fld.alpha()
    lin = [p * alpha - a for a in nodes]
    units = [u * u for u in lin]
    one = fld.one()
    total = one
    for u in lin:
        total = total * u
    if total != one:
        raise HenselFailure("product of p*alpha - a_i is not 1")
    L = np.column_stack([log_embedding(fld, u) for u in units])
    return SpecialFieldData(p, n, residues, nodes, R, fld, lin, units, L)


def expected_unit_log_matrix(p, n):
    lp = math.log(p)
    E = np.full((n, n), 2 * n * lp)
    np.fill_diagonal(E, -2 * n * (n - 1) * lp)
    return E


def special_field_checks(data: SpecialFieldData):
    """Exact invariants; returns a dict of booleans."""
    p, n = data.p, data.n
    prod = [1]
    for a in data.nodes:
        prod = exact.poly_mul(prod, [-a, p])
    lhs = exact.poly_add(exact.poly_scale(data.R, p ** n), [1])
    one = data.field.one()
    total = one
    for u in data.units:
        total = total * u
    return {
        "R_integral_monic": all(isinstance(c, int) for c in data.R) and data.R[-1] == 1,
        "residues_are_roots": all((pow(a, n, p ** n) + 1) % p ** n == 0 for a in data.nodes),
        "polynomial_identity": lhs == prod,
        "product_linear_is_one": _product(data.units_linear, one) == one,
        "product_units_is_one": total == one,
        "units_in_suborder": all(in_suborder(data.field, u, p, 1) for u in data.units),
        "linear_units_norm": all(abs(field_norm(data.field, u)) == 1 for u in data.units_linear),
    }


def _product(xs, one):
    out = one
    for x in xs:
        out = out * x
    return out


@dataclass
class ShapiraFieldData:
    M: int
    n: int
    eta: float
    nodes: list
    P: list
    field: NumberField
    units_linear: list  # a_i - alpha
    units: list  # (a_i - alpha)^2

    def to_json(self):
        logs = np.column_stack([log_embedding(self.field, u) for u in self.units])
        return {
            "kind": "shapira", "M": self.M, "n": self.n, "eta": self.eta,
            "nodes": self.nodes, "polynomial": self.P, "field": self.field.to_json(),
            "units": [[str(c) for c in u.coeffs] for u in self.units],
            "log_matrix": logs.tolist(),
        }


def shapira_nodes(M, n):
    return [(i * M) // n for i in range(1, n + 1)]


def shapira_field(M: int, n: int, eta=None, nodes=None, min_gap=4,
                  precision_bits=DEFAULT_PRECISION_BITS) -> ShapiraFieldData:
    eta = 1 / (2 * n) * 0.99 if eta is None else eta
    if not 0 < eta < 1 / (2 * n):
        raise ValueError("eta must lie in (0, 1/(2n))")
    nodes = shapira_nodes(M, n) if nodes is None else sorted(int(a) for a in nodes)
    gaps = [b - a for a, b in zip(nodes, nodes[1:])]
    if nodes[0] < 0 or nodes[-1] > M or min(gaps) < max(eta * M, min_gap):
        raise NodesTooClose(f"node gaps {gaps} below max({eta * M:.3g}, {min_gap})")
    P = exact.poly_add(exact.poly_from_roots(nodes), [-1])
    fld = build_field(P, precision_bits=precision_bits, assume_irreducible=True)
    order = [min(range(n), key=lambda j: abs(fld.roots[j] - a)) for a in nodes]
    if sorted(order) != list(range(n)):
        raise RootCertificationFailure("roots do not pair off with the nodes")
    fld = fld.reorder(order)
    alpha = fld.alpha()
    lin = [a - alpha for a in nodes]
    for a in nodes:
        if exact.poly_eval(P, a) != -1:
            raise AssertionError("P(a_i) != -1")
    return ShapiraFieldData(M, n, eta, nodes, P, fld, lin, [u * u for u in lin])


def totally_positive(fld, u: FieldElement):
    """All embeddings certified positive (value exceeds its error bound)."""
    vals, errs = embed_element(fld, u, with_error=True)
    with mpmath.workprec(fld.precision_bits + 32):
        return all(v - e > 0 for v, e in zip(vals, errs))
