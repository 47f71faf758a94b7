"""Finite weighted sample sets standing in for measures on X_n or on R."""
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import EmptyMeasure


@dataclass
class EmpiricalMeasure:
    payloads: list
    weights: list  # Fractions
    domain: str = "scalar"  # "scalar" or "lattice"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.payloads) != len(self.weights):
            raise ValueError("payloads and weights differ in length")
        self.weights = [Fraction(w) for w in self.weights]
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")

    @classmethod
    def uniform(cls, payloads, domain="scalar", mass=Fraction(1)):
        payloads = list(payloads)
        if not payloads:
            raise EmptyMeasure("no samples")
        w = Fraction(mass) / len(payloads)
        return cls(payloads, [w] * len(payloads), domain)

    @classmethod
    def dirac(cls, payload, domain="lattice"):
        return cls([payload], [Fraction(1)], domain)

    def __len__(self):
        return len(self.payloads)

    def total_mass(self):
        return sum(self.weights, Fraction(0))

    def combine(self, other, a=Fraction(1), b=Fraction(1)):
        """a*self + b*other."""
        if self.domain != other.domain:
            raise ValueError("domains differ")
        return EmpiricalMeasure(self.payloads + other.payloads,
                                [a * w for w in self.weights] + [b * w for w in other.weights], self.domain)

    def values(self):
        if self.domain != "scalar":
            raise TypeError("values() needs a scalar measure")
        return np.array([float(v) for v in self.payloads])

    def float_weights(self):
        return np.array([float(w) for w in self.weights])

    def integrate(self, f):
        return float(sum(float(w) * f(x) for x, w in zip(self.payloads, self.weights)))

    def cdf(self, t):
        """Weight of samples with value <= t, for each t (normalised by total mass)."""
        vals, w = self.values(), self.float_weights()
        order = np.argsort(vals, kind="stable")
        cw = np.cumsum(w[order])
        vals, cw = vals[order], np.minimum(cw / cw[-1], 1.0)
        idx = np.searchsorted(vals, np.asarray(t, dtype=float), side="right")
        return np.where(idx > 0, cw[np.maximum(idx - 1, 0)], 0.0)


def ks_distance(values_a, values_b):
    """sup_t |F_a(t) - F_b(t)| for two equally weighted samples."""
    a = np.sort(np.asarray(values_a, dtype=float))
    b = np.sort(np.asarray(values_b, dtype=float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.abs(fa - fb).max())
