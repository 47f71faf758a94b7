"""Compact diagonal orbits, Hecke neighbours and escape of mass on spaces of lattices."""
from .errors import LatlabError
from .hecke import HeckeType, enumerate_neighbors, operator_norm_bound, verify_composition
from .lattice import LatticePoint, lambda1, make_point, successive_minima
from .numfield import build_field, log_embedding, unit_log_lattice

__version__ = "0.1.0"
