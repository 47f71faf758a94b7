"""End-to-end scenarios: escape profiles, the two-step Hecke pipeline, and fast approximation.

Each runner returns (rows, summary); write_outputs turns them into a CSV and a
JSON file.  Floats are written with repr so reruns with the same config and
seed give identical bytes.
"""
import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .constructions import shapira_field, special_field
from .errors import BudgetExceeded, PrimeLadderExhausted
from .hecke import (
    HeckeType,
    cusp_type,
    enumerate_neighbors,
    next_prime,
    operator_norm_bound,
    push_measure,
)
from .lattice import (
    LatticePoint,
    apply_diagonal,
    count_in_ball_basis,
    lattice_distance,
    make_point,
    reduce_basis,
    shortest_sup,
)
from .measure import EmpiricalMeasure, ks_distance
from .orbits import (
    escape_fraction,
    fundamental_sample,
    lambda_profile,
    min_co_cdf,
    min_co_cdf_exact_n2,
    min_co_quantile,
    orbit_from_shapira,
    orbit_from_special,
    verify_stabilizer_exact,
)

EXPERIMENTS = ("escape", "haar", "approx")


@dataclass
class ExperimentConfig:
    experiment: str = "escape"
    n: int = 2
    M: int = 10 ** 4
    primes: list = field(default_factory=lambda: [5, 13, 29, 61])
    density: int = 10 ** 4
    eta: float = 0.25
    epsilon: float = None  # default 1/log log M
    c: float = 0.5
    eps_cusp: float = 0.05
    r_grid: list = field(default_factory=lambda: [0.8, 1.0, 1.2])
    precision_bits: int = 128
    oracle_samples: int = 200000
    haar_samples: int = 10 ** 4
    walk_length: int = 160
    enum_budget: int = 10 ** 7
    neighbor_cap: int = 10 ** 6
    point_cap: int = 2 * 10 ** 6
    prime_cap: int = 10 ** 6
    ks_tol: float = 0.15
    siegel_tol: float = 0.15
    mass_tol: float = 0.1
    target: list = None  # basis of the target point for approx
    seed: int = 0
    out_dir: str = "."

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        for name in ("density", "oracle_samples", "haar_samples", "walk_length", "enum_budget",
                     "neighbor_cap", "point_cap", "prime_cap"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def eps(self):
        if self.epsilon is not None:
            return float(self.epsilon)
        return 1.0 / math.log(math.log(self.M))

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, doc):
        known = set(cls.__dataclass_fields__)
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**doc)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _f(x):
    return repr(float(x))


def rows_to_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_f(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_outputs(out_dir, name, header, rows, summary):
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{name}.csv")
    json_path = os.path.join(out_dir, f"{name}_summary.json")
    with open(csv_path, "w", newline="") as fh:
        fh.write(rows_to_csv(header, rows))
    with open(json_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    return csv_path, json_path


# -- escape ---------------------------------------------------------------------

ESCAPE_HEADER = ("t", "empirical_cdf", "oracle_cdf")


def oracle_cdf(n, samples, seed):
    if n == 2:
        return min_co_cdf_exact_n2
    return min_co_cdf(tuple(range(n)), n, samples, seed)


def profile_ks(values, n, samples=200000, seed=0):
    """sup |F_emp - F_oracle|, evaluated on both sides of every jump."""
    if n == 2:
        v = np.sort(np.asarray(values))
        m = len(v)
        F = min_co_cdf_exact_n2(v)
        return float(max(np.max(np.arange(1, m + 1) / m - F), np.max(F - np.arange(m) / m)))
    ref = oracle_cdf(n, samples, seed).samples
    return ks_distance(values, ref)


def run_escape(cfg: ExperimentConfig):
    data = shapira_field(cfg.M, cfg.n, precision_bits=cfg.precision_bits)
    orbit = orbit_from_shapira(data)
    prof = lambda_profile(orbit, cfg.density, math.log(cfg.M), budget=cfg.enum_budget)
    vals = prof.values()
    oracle = oracle_cdf(cfg.n, cfg.oracle_samples, cfg.seed)
    grid = np.linspace(-(cfg.n - 1) / 2, 0.0, 201)
    rows = [(t, e, o) for t, e, o in zip(grid, prof.cdf(grid), oracle(grid))]
    ks = profile_ks(vals, cfg.n, cfg.oracle_samples, cfg.seed)
    frac = escape_fraction(prof, -cfg.eta)
    summary = {
        "experiment": "escape", "seed": cfg.seed, "M": cfg.M, "n": cfg.n,
        "polynomial": data.P, "grid_points": len(prof),
        "sup_distance": ks, "ks_tol": cfg.ks_tol,
        "escape_fraction": str(frac), "escape_fraction_float": float(frac),
        "oracle_escape_fraction": float(oracle(-cfg.eta)),
        "eta": cfg.eta, "total_mass": str(prof.total_mass()),
        "profile_min": float(vals.min()), "profile_max": float(vals.max()),
    }
    summary["checks"] = {
        "sup_distance": ks <= cfg.ks_tol,
        "total_mass_one": prof.total_mass() == 1,
        "profile_nonpositive": bool(vals.max() <= 1e-12),
    }
    return rows, summary


# -- Haar reference and Siegel calibration ---------------------------------------

def haar_walk(n, samples, length, seed, step=1.0):
    """Lattices from random words in upper/lower unipotents and diagonals applied to Z^n.

    Each letter is one of: u_ij(t) (i < j), l_ij(t) (i > j), exp(diag(s)),
    with t uniform on [-step, step] and s a centred Gaussian of scale step.
    Bases are LLL-reduced every few letters, which leaves the lattice unchanged.
    """
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    B = np.broadcast_to(np.eye(n), (samples, n, n)).copy()
    for k in range(length):
        kind = rng.integers(0, 2, size=samples)
        pick = rng.integers(0, len(pairs), size=samples)
        t = rng.uniform(-step, step, size=samples)
        s = rng.normal(0.0, step, size=(samples, n))
        s -= s.mean(axis=1, keepdims=True)
        G = np.broadcast_to(np.eye(n), (samples, n, n)).copy()
        for idx, (i, j) in enumerate(pairs):
            sel = (kind == 0) & (pick == idx)
            G[sel, i, j] = t[sel]
        dsel = kind == 1
        G[dsel] = np.exp(s[dsel])[:, :, None] * np.eye(n)
        B = G @ B
        if k % 4 == 3 or k == length - 1:
            B = np.stack([reduce_basis(b)[0] for b in B])
    return B


def siegel_means(bases, r_grid, budget=10 ** 7):
    """Mean number of nonzero lattice points in the cube of radius r, per r (the count excludes 0)."""
    out = {}
    for r in r_grid:
        counts = [count_in_ball_basis(b, r, budget) for b in bases]
        out[r] = float(np.mean(counts))
    return out


def siegel_calibration(n, samples, length, seed, r_grid=(1.0,)):
    B = haar_walk(n, samples, length, seed)
    means = siegel_means(B, r_grid)
    return {str(r): {"mean": m, "expected": (2 * r) ** n, "rel_err": m / (2 * r) ** n - 1}
            for r, m in means.items()}


# -- the two-step Hecke pipeline ---------------------------------------------------

HAAR_HEADER = ("sample_id", "side", "lambda1_before", "mean_count_r", "expected_count_r")


def haar_primes(cfg):
    eta = min_co_quantile(cfg.n, cfg.c, cfg.oracle_samples, cfg.seed)
    p = next_prime(cfg.M ** (cfg.n * eta))
    q = next_prime(math.log(cfg.M))
    if p > cfg.prime_cap or q > cfg.prime_cap:
        raise PrimeLadderExhausted(f"primes {p}, {q} exceed cap {cfg.prime_cap}")
    return eta, p, q


def run_haar_pipeline(cfg: ExperimentConfig):
    n = cfg.n
    if n not in (2, 3):
        raise ValueError("the pipeline supports n in {2, 3}")
    if not 0 < cfg.c <= 1:
        raise ValueError("c must lie in (0, 1]")
    eta, p, q = haar_primes(cfg)
    eps = cfg.eps()
    tp, tq = cusp_type(p, n), cusp_type(q, n)
    data = shapira_field(cfg.M, n, precision_bits=cfg.precision_bits)
    orbit = orbit_from_shapira(data)
    vs = fundamental_sample(orbit.stabilizer, cfg.density)
    per_sample = _count(tp) * _count(tq)
    if per_sample * len(vs) > cfg.point_cap:
        raise BudgetExceeded(f"{per_sample * len(vs)} two-step neighbours exceed point cap {cfg.point_cap}")
    logM = math.log(cfg.M)
    lo = math.exp((-1 - eps) * eta * logM)
    hi = math.exp((-1 + eps) * eta * logM)
    mid = math.exp(-eta * logM)
    points = [apply_diagonal(v, orbit.point) for v in vs]
    mu = EmpiricalMeasure.uniform(points, "lattice")
    nu = push_measure(push_measure(mu, tp, cfg.neighbor_cap), tq, cfg.neighbor_cap)
    if len(nu) != per_sample * len(vs):
        raise AssertionError("unexpected neighbour count")
    rows = []
    side_mass = {"minus": Fraction(0), "plus": Fraction(0), "middle": Fraction(0)}
    central_minus = Fraction(0)
    exits, minus_children = 0, 0
    plus_counts = {r: [] for r in cfg.r_grid}
    minus_lam_max = 0.0
    for sid, (x, w) in enumerate(zip(mu.payloads, mu.weights)):
        lam = shortest_sup(x.basis(), cfg.enum_budget)
        side = "minus" if lam <= lo else "plus" if lam >= hi else "middle"
        side_mass[side] += w
        if lam <= mid:
            central_minus += w
        kids = nu.payloads[sid * per_sample:(sid + 1) * per_sample]
        kid_bases = [k.basis() for k in kids]
        if side == "minus":
            lams = [shortest_sup(b, cfg.enum_budget) for b in kid_bases]
            minus_children += len(lams)
            exits += sum(1 for v in lams if v > cfg.eps_cusp)
            minus_lam_max = max(minus_lam_max, max(lams))
        for r in cfg.r_grid:
            counts = [count_in_ball_basis(b, r, cfg.enum_budget) for b in kid_bases]
            mean = float(np.mean(counts))
            if side == "plus":
                plus_counts[r].extend(counts)
            rows.append((sid, side, lam, mean, (2 * r) ** n))
    siegel = {}
    for r in cfg.r_grid:
        m = float(np.mean(plus_counts[r])) if plus_counts[r] else float("nan")
        siegel[str(r)] = {"mean": m, "expected": (2 * r) ** n, "rel_err": m / (2 * r) ** n - 1}
    calib = siegel_calibration(n, cfg.haar_samples, cfg.walk_length, cfg.seed, cfg.r_grid)
    total = mu.total_mass()
    summary = {
        "experiment": "haar", "seed": cfg.seed, "M": cfg.M, "n": n, "c": cfg.c,
        "eta": eta, "epsilon": eps, "p": p, "q": q,
        "first_type": list(tp.exponents), "second_type": list(tq.exponents),
        "orbit_samples": len(vs), "two_step_neighbours": len(nu),
        "nu0_total_mass": str(nu.total_mass()),
        "lambda_thresholds": {"minus": lo, "central": mid, "plus": hi},
        "minus_mass": float(side_mass["minus"] / total),
        "plus_mass": float(side_mass["plus"] / total),
        "middle_mass": float(side_mass["middle"] / total),
        "central_minus_mass": float(central_minus / total),
        "expected_minus_mass": 1 - cfg.c,
        "eps_cusp": cfg.eps_cusp,
        "minus_children": minus_children, "minus_exits": exits,
        "minus_max_child_lambda1": minus_lam_max,
        "siegel_plus": siegel, "haar_calibration": calib,
    }
    summary["checks"] = {
        "nu0_mass_one": nu.total_mass() == 1,
        "minus_mass": abs(summary["minus_mass"] - (1 - cfg.c)) <= cfg.mass_tol,
        "minus_no_exits": exits == 0,
        "siegel_plus": all(abs(s["rel_err"]) <= cfg.siegel_tol for s in siegel.values()),
    }
    return rows, summary


def _count(t: HeckeType):
    from .hecke import neighbor_matrices
    return len(neighbor_matrices(t))


# -- fast approximation --------------------------------------------------------------

APPROX_HEADER = ("p", "min_distance", "norm_bound", "stabilizer_pass")


def default_target(n):
    if n == 2:
        return make_point([[1.0, 0.5], [0.0, math.sqrt(3) / 2]])
    B = np.eye(n) + 0.3 * np.triu(np.ones((n, n)), 1)
    return make_point(B)


def approx_type(p, n):
    h = n // 2
    return HeckeType(p, (0,) * h + (1,) * (n - h))


def central_orbit_point(orbit, density):
    """The orbit grid point with the largest lambda_1 (a representative in a fixed compact set)."""
    best, best_lam = None, -1.0
    for v in fundamental_sample(orbit.stabilizer, density):
        x = apply_diagonal(v, orbit.point)
        lam = shortest_sup(x.basis())
        if lam > best_lam:
            best, best_lam = x, lam
    return best, best_lam


def run_fast_approx(cfg: ExperimentConfig, target: LatticePoint = None):
    n = cfg.n
    y = target
    if y is None:
        y = make_point(cfg.target) if cfg.target is not None else default_target(n)
    rows, details = [], []
    density = min(cfg.density, int(round(10 ** (5 / max(n - 1, 1)))), 400)
    for p in cfg.primes:
        data = special_field(p, n, precision_bits=cfg.precision_bits)
        orbit = orbit_from_special(data)
        x, lam = central_orbit_point(orbit, density)
        t = approx_type(p, n)
        ns = enumerate_neighbors(x, t, cfg.neighbor_cap)
        best_d, best_i = math.inf, -1
        for i, xp in enumerate(ns.points):
            d, _ = lattice_distance(xp, y)
            if d < best_d:
                best_d, best_i = d, i
        H = ns.matrices[best_i]
        ok = all(verify_stabilizer_exact(orbit, u, H, p, 1) for u in data.units)
        bound = operator_norm_bound(t) ** (1.0 / (n * n - 1))
        rows.append([p, best_d, bound, ok])
        details.append({"p": p, "neighbours": ns.count, "base_lambda1": lam, "best_index": best_i,
                        "best_H": [list(r) for r in H]})
    dists = np.array([r[1] for r in rows])
    bounds = np.array([r[2] for r in rows])
    C = float(np.max(dists / bounds))
    inversions = int(np.sum(np.diff(dists) > 0))
    for r in rows:
        r[2] = C * r[2]
        r[3] = "pass" if r[3] else "fail"
    summary = {
        "experiment": "approx", "seed": cfg.seed, "n": n, "primes": list(cfg.primes),
        "target": y.basis().tolist(), "fitted_C": C, "inversions": inversions, "details": details,
    }
    summary["checks"] = {
        "stabilizer_all_pass": all(r[3] == "pass" for r in rows),
        "trend": inversions <= 1,
    }
    return [tuple(r) for r in rows], summary


# -- measure distance ---------------------------------------------------------------

MEASURE_FAMILY_VERSION = 1
CAPS = (0.25, 0.5, 1.0, math.inf)


def measure_distance(mu1: EmpiricalMeasure, mu2: EmpiricalMeasure, eps_grid=(0.05, 0.1, 0.2, 0.4)):
    """max over eps and a fixed family f of eps * |int f dmu1 - int f dmu2|.

    Family (version 1): f_{eps,s}(x) = min(s, max(0, log lambda_1(x) - log eps))
    for s in CAPS.  Each f vanishes off K_eps = {lambda_1 >= eps} and is
    1-Lipschitz, since d(x, y) <= delta forces |log lambda_1(x) - log lambda_1(y)| <= log(1 + delta).
    """
    l1 = _log_lambdas(mu1)
    l2 = _log_lambdas(mu2)
    w1 = mu1.float_weights() / float(mu1.total_mass())
    w2 = mu2.float_weights() / float(mu2.total_mass())
    best = 0.0
    for eps in eps_grid:
        for s in CAPS:
            f1 = np.minimum(s, np.maximum(0.0, l1 - math.log(eps)))
            f2 = np.minimum(s, np.maximum(0.0, l2 - math.log(eps)))
            best = max(best, eps * abs(float(w1 @ f1) - float(w2 @ f2)))
    return best


def _log_lambdas(mu):
    return np.array([math.log(shortest_sup(x.basis())) for x in mu.payloads])


RUNNERS = {"escape": (run_escape, ESCAPE_HEADER), "haar": (run_haar_pipeline, HAAR_HEADER),
           "approx": (run_fast_approx, APPROX_HEADER)}


def run(cfg: ExperimentConfig):
    fn, header = RUNNERS[cfg.experiment]
    rows, summary = fn(cfg)
    summary["config"] = cfg.to_json()
    paths = write_outputs(cfg.out_dir, cfg.experiment, header, rows, summary)
    return rows, summary, paths
