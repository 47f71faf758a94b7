"""Exact rational matrix and polynomial helpers.

Matrices are tuples of row tuples holding ``int`` or ``Fraction`` entries.
Polynomials are coefficient sequences, lowest degree first.
"""
from fractions import Fraction
from math import gcd


def as_matrix(rows):
    return tuple(tuple(Fraction(v) for v in row) for row in rows)


def identity(n):
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def matmul(a, b):
    cols = list(zip(*b))
    return tuple(tuple(sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in cols) for row in a)


def matvec(a, v):
    return tuple(sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a)


def transpose(a):
    return tuple(tuple(col) for col in zip(*a))


def det(a):
    """Determinant by fraction-exact Gaussian elimination."""
    m = [list(map(Fraction, row)) for row in a]
    n = len(m)
    sign = 1
    result = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        result *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                for k in range(c, n):
                    m[r][k] -= f * m[c][k]
    return sign * result


def inverse(a):
    n = len(a)
    m = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for c in range(n):
        piv = next((r for r in range(c, n) if m[r][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        m[c], m[piv] = m[piv], m[c]
        p = m[c][c]
        m[c] = [v / p for v in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return tuple(tuple(row[n:]) for row in m)


def rank(rows):
    m = [list(map(Fraction, row)) for row in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, len(m)):
            f = m[i][c] / m[r][c]
            if f:
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def is_integral(a):
    return all(Fraction(v).denominator == 1 for row in a for v in row)


def to_int_matrix(a):
    return tuple(tuple(int(Fraction(v)) for v in row) for row in a)


def common_denominator(a):
    d = 1
    for row in a:
        for v in row:
            q = Fraction(v).denominator
            d = d * q // gcd(d, q)
    return d


def smith_diagonal(a):
    """Elementary divisors of a square integer matrix, ascending, positive."""
    m = [[int(v) for v in row] for row in a]
    n = len(m)
    divisors = []
    for t in range(n):
        while True:
            entries = [(abs(m[i][j]), i, j) for i in range(t, n) for j in range(t, n) if m[i][j] != 0]
            if not entries:
                divisors.extend([0] * (n - t))
                return sorted(divisors, key=lambda d: (d == 0, d))
            _, pi, pj = min(entries)
            m[t], m[pi] = m[pi], m[t]
            for row in m:
                row[t], row[pj] = row[pj], row[t]
            piv = m[t][t]
            clean = True
            for i in range(t + 1, n):
                q = m[i][t] // piv
                if q:
                    m[i] = [x - q * y for x, y in zip(m[i], m[t])]
                if m[i][t]:
                    clean = False
            for j in range(t + 1, n):
                q = m[t][j] // piv
                if q:
                    for row in m:
                        row[j] -= q * row[t]
                if m[t][j]:
                    clean = False
            if not clean:
                continue
            bad = next(((i, j) for i in range(t + 1, n) for j in range(t + 1, n) if m[i][j] % piv), None)
            if bad is None:
                divisors.append(abs(piv))
                break
            # fold the offending row in so the pivot gets replaced by a gcd
            m[t] = [x + y for x, y in zip(m[t], m[bad[0]])]
    return sorted(divisors)


# -- polynomials -----------------------------------------------------------

def poly_trim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return poly_trim(out)


def poly_add(a, b):
    n = max(len(a), len(b))
    return poly_trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def poly_scale(a, c):
    return poly_trim([c * x for x in a])


def poly_divmod(a, b):
    a = [Fraction(x) for x in poly_trim(a)]
    b = [Fraction(x) for x in poly_trim(b)]
    if len(b) == 1 and b[0] == 0:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b) and not (len(a) == 1 and a[0] == 0):
        c = a[-1] / b[-1]
        k = len(a) - len(b)
        q[k] = c
        for i, y in enumerate(b):
            a[i + k] -= c * y
        a.pop()
        a = poly_trim(a) if a else [Fraction(0)]
    return poly_trim(q), poly_trim(a)


def poly_mod(a, b):
    return poly_divmod(a, b)[1]


def poly_eval(p, x):
    acc = 0 * x
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_deriv(p):
    return poly_trim([i * p[i] for i in range(1, len(p))]) if len(p) > 1 else [0]


def poly_degree(p):
    p = poly_trim(p)
    return -1 if len(p) == 1 and p[0] == 0 else len(p) - 1


def poly_gcd(a, b):
    a, b = poly_trim(a), poly_trim(b)
    while poly_degree(b) >= 0:
        a, b = b, poly_mod(a, b)
    return a


def poly_from_roots(roots):
    """Monic product of (x - r)."""
    out = [1]
    for r in roots:
        out = poly_mul(out, [-r, 1])
    return out


def resultant(f, g):
    """Res(f, g) via the Sylvester matrix determinant."""
    f, g = poly_trim(f), poly_trim(g)
    m, n = len(f) - 1, len(g) - 1
    if n == 0:
        return Fraction(g[0]) ** m
    size = m + n
    rows = []
    for i in range(n):
        row = [0] * size
        for j, c in enumerate(reversed(f)):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [0] * size
        for j, c in enumerate(reversed(g)):
            row[i + j] = c
        rows.append(row)
    return det(rows)
