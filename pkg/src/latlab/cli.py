"""Command line entry point: latlab {hecke,field,exp} ..."""
import argparse
import json
import sys

from .constructions import shapira_field, special_field
from .errors import BudgetExceeded, LatlabError
from .experiments import ExperimentConfig, run
from .hecke import HeckeType, enumerate_neighbors, verify_composition
from .lattice import integer_lattice, point_from_json

EXIT_OK, EXIT_ERROR, EXIT_ASSERT, EXIT_BUDGET = 0, 1, 2, 3

def _dump(doc, path):
    text = json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)

def cmd_neighbors(args):
    exps = [int(k) for k in args.type.split(",")]
    if args.point:
        with open(args.point) as fh:
            x = point_from_json(json.load(fh))
    else:
        x = integer_lattice(len(exps))
    t = HeckeType.normalized(args.p, exps)
    ns = enumerate_neighbors(x, t, args.cap)
    _dump({
        "p": args.p, "type": list(t.exponents), "count": ns.count, "weight": str(ns.weight),
        "neighbors": [{"H": [list(r) for r in H], "point": pt.to_json()} for H, pt in zip(ns.matrices, ns.points)],
    }, args.out)
    return EXIT_OK

def cmd_compose(args):
    rep = verify_composition(args.n, args.p, args.k, args.l)
    rep = {k: v for k, v in rep.items() if not k.startswith("_")}
    _dump(rep, args.out)
    return EXIT_OK if rep["match"] else EXIT_ASSERT

def cmd_field(args):
    if args.kind == "special":
        data = special_field(args.p, args.n)
    else:
        data = shapira_field(args.M, args.n)
    _dump(data.to_json(), args.out)
    return EXIT_OK

def cmd_exp(args):
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig(experiment=args.name)
    cfg.experiment = args.name
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    _, summary, paths = run(cfg)
    checks = summary.get("checks", {})
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"wrote {paths[0]} and {paths[1]}")
    return EXIT_OK if all(checks.values()) else EXIT_ASSERT

def build_parser():
    ap = argparse.ArgumentParser(prog="latlab")
    sub = ap.add_subparsers(dest="group", required=True)

    hk = sub.add_parser("hecke").add_subparsers(dest="cmd", required=True)
    nb = hk.add_parser("neighbors")
    nb.add_argument("--p", type=int, required=True)
    nb.add_argument("--type", required=True, help="comma separated exponents, e.g. 0,0,1")
    nb.add_argument("--point", help="point JSON (default Z^n)")
    nb.add_argument("--cap", type=int, default=10 ** 6)
    nb.add_argument("--out")
    nb.set_defaults(func=cmd_neighbors)
    cc = hk.add_parser("compose-check")
    for name in ("n", "p", "k", "l"):
        cc.add_argument(f"--{name}", type=int, required=True)
    cc.add_argument("--out")
    cc.set_defaults(func=cmd_compose)

    fd = sub.add_parser("field").add_subparsers(dest="kind", required=True)
    sp = fd.add_parser("special")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_field)
    sh = fd.add_parser("shapira")
    sh.add_argument("--M", type=int, required=True)
    sh.add_argument("--n", type=int, required=True)
    sh.add_argument("--out")
    sh.set_defaults(func=cmd_field)

    ex = sub.add_parser("exp")
    ex.add_argument("name", choices=("escape", "haar", "approx"))
    ex.add_argument("--config")
    ex.add_argument("--seed", type=int)
    ex.add_argument("--out")
    ex.set_defaults(func=cmd_exp)
    return ap

def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget abort: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except AssertionError as exc:
        print(f"assertion failure: {exc}", file=sys.stderr)
        return EXIT_ASSERT
    except (LatlabError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR

if __name__ == "__main__":
    sys.exit(main())
