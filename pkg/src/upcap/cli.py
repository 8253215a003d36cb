"""Command-line interface: ``upcap <command> ...`` (also ``python -m upcap``).

Exit status: 0 on success, 1 when an input violates a precondition (or is
malformed), 2 when a numerical method fails (non-convergence, failed cross-check).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CrossValidationError, DomainError, NonConvergenceError


def _dump(obj, out: str | None = None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise DomainError(f"input file {path!r} does not exist") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"input file {path!r} is not valid JSON ({exc.msg})") from None


def _point(text: str) -> np.ndarray:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise DomainError(f"cannot parse point {text!r}; expected x,y") from None
    if len(vals) != 2:
        raise DomainError(f"point {text!r} must have two coordinates")
    return np.array(vals)


def _mask(args):
    from .domain import STOCK, DomainMask

    if args.mask:
        if args.mask.lower().endswith(".png"):
            try:
                data = Path(args.mask).read_bytes()
            except FileNotFoundError:
                raise DomainError(f"input file {args.mask!r} does not exist") from None
            return DomainMask.from_png(data, args.level)
        return DomainMask.from_json(_read_json(args.mask))
    if args.stock:
        if args.stock not in STOCK:
            raise DomainError(f"unknown stock domain {args.stock!r}; choose from {sorted(STOCK)}")
        return STOCK[args.stock](args.level if args.level is not None else 10)
    raise DomainError("give a domain with --mask FILE or --stock NAME")


def _add_mask_args(p):
    p.add_argument("--mask", help="domain mask (JSON run-length or PNG bitmap)")
    p.add_argument("--stock", help="built-in domain: square, punctured-square, l-shape, disk")
    p.add_argument("--level", type=int, help="raster level, cell side 2^-level (PNG masks written by upcap store it)")


# --- commands -------------------------------------------------------------------------


def cmd_cantor(args):
    from .sets import cantor_middle_third, nested_ball_cantor

    if args.nested:
        fam, E = nested_ball_cantor(args.p, args.c, args.r, args.depth, seed=args.seed)
        data = E.to_json()
        data["family"] = {"p": fam.p, "c": fam.c, "root_radius": fam.root_radius, "radii": fam.radii,
                          "mode": fam.mode}
    else:
        data = cantor_middle_third(args.depth).to_json()
    _dump(data, args.out)


def cmd_up_estimate(args):
    from .sets import CompactSet, up_parameter_estimate

    E = CompactSet.from_json(_read_json(args.set))
    est = up_parameter_estimate(E, safety=args.safety)
    _dump({"c_hat": est.c_hat, "witness": {"center": est.center, "r": est.radius},
           "r_lo": est.r_lo, "r_hi": est.r_hi, "points": len(E)}, args.out)


def cmd_bounds(args):
    from . import bounds as B
    from .specfun import M1

    reports = []
    if args.c is not None:
        beta = B.beta_exponent(args.c)
        reports.append(B.BoundReport("beta", beta, {"c": args.c}, "log 2 / log(3/c)"))
        reports.append(B.BoundReport("M1", M1(args.n, beta), {"n": args.n, "beta": beta},
                                     "max{2^(beta+n) ((n-1)/beta)^n N*_n, 1/K_n}"))
        reports.append(B.BoundReport("content_lower_bound", B.content_lower_bound(args.n, args.c, args.r),
                                     {"n": args.n, "c": args.c, "r": args.r, "beta": beta}, "r^beta / (2 3^n)"))
        reports.append(B.BoundReport("capacity_lower_bound", B.capacity_lower_bound(args.n, args.c),
                                     {"n": args.n, "c": args.c, "beta": beta}, "1 / (2 3^n M1(n, beta))"))
        reports.append(B.BoundReport("lambda", B.lambda_basic(args.n, args.c), {"n": args.n, "c": args.c},
                                     "max{exp((2 omega/c)^(1/(n-1)))/2, 2}"))
    if args.sigma is not None:
        reports.append(B.up_from_capacity(args.n, args.sigma))
    if args.delta is not None:
        if args.dE is None or args.dist is None:
            raise DomainError("--delta needs --dE and --dist")
        reports.append(B.cap_GE_lower(args.n, args.delta, args.dE, args.dist, uniform=args.uniform))
    if not reports:
        reports.append(B.mu_n(args.n))
    _dump([r.to_json() for r in reports], args.out)


def cmd_whitney(args):
    from .whitney import decompose, verify

    G = _mask(args)
    D = decompose(G, args.kmin, args.kmax)
    rep = verify(D, G)
    if args.svg:
        Path(args.svg).write_bytes(D.export("svg"))
    if args.json:
        Path(args.json).write_bytes(D.export("json"))
    _dump(rep.to_json(), args.out)


def cmd_capacity(args):
    from . import capacity2d as C
    from .specfun import teichmuller_tau2, validate_tau2

    if args.action == "solve":
        if not args.cond:
            raise DomainError("capacity solve needs --cond FILE")
        cond = C.GridCondenser.from_json(_read_json(args.cond))
        rep = C.solve_capacity(cond, tol=args.tol, refine=args.refine, method=args.method, precond=args.precond,
                               maxiter=args.maxiter)
        _dump(rep.to_json(), args.out)
    elif args.action == "ring":
        _dump({"n": args.n, "a": args.a, "b": args.b, "modulus": C.ring_modulus_exact(args.n, args.a, args.b)},
              args.out)
    elif args.action == "annulus":
        cond = C.annulus_condenser(args.a, args.b, args.cells)
        if args.save:
            Path(args.save).write_text(json.dumps(cond.to_json()))
        rep = C.solve_capacity(cond, tol=args.tol, refine=args.refine, method=args.method, precond=args.precond)
        out = rep.to_json()
        out["exact"] = C.ring_modulus_exact(2, args.a, args.b)
        _dump(out, args.out)
    elif args.action == "tau2":
        out = {"s": args.s, "tau2": teichmuller_tau2(args.s)}
        if args.validate:
            out["grid_mismatch"] = validate_tau2(args.s)
        _dump(out, args.out)


def cmd_metrics(args):
    from .metrics import DomainGraph, j_metric, qh_tolerance

    if args.action != "qh":
        raise DomainError(f"unknown metrics action {args.action!r}")
    G = _mask(args)
    x, y = _point(args.frm), _point(args.to)
    k = DomainGraph.from_mask(G).distance(x, y)
    dx, dy = G.distance(np.array([x, y]))
    _dump({"k_approx": k, "j": j_metric(dx, dy, float(np.linalg.norm(x - y))), "d_x": dx, "d_y": dy,
           "tolerance": qh_tolerance(G, x, y, k)}, args.out)


def cmd_testfn(args):
    from .testfn import inf_scan, up_param_from_inf_u, whitney_cube_test
    from .whitney import decompose

    if args.action != "scan":
        raise DomainError(f"unknown testfn action {args.action!r}")
    G = _mask(args)
    D = decompose(G, 0, min(args.kmax, G.level))
    if args.cubes:
        rep = whitney_cube_test(G, D, n_theta=args.n_theta, jobs=args.jobs)
        if args.csv:
            Path(args.csv).write_text(rep.to_csv())
        _dump(rep.summary(), args.out)
        return
    scan = inf_scan(G, args.alpha, D=D, n_theta=args.n_theta, jobs=args.jobs)
    out = {"alpha": args.alpha, "inf_estimate": scan.inf_estimate, "argmin": scan.argmin,
           "harnack_correction": scan.correction, "harnack_s": scan.s, "lower_bound": scan.lower_bound(),
           "samples": len(scan.values)}
    if args.alpha == 0.5 and scan.lower_bound() > 0:
        out["up_parameter"] = up_param_from_inf_u(2, scan.lower_bound())
    _dump(out, args.out)


def _version_text() -> str:
    from .specfun import _KISSING

    table = ", ".join(f"kappa({n})={k}" for n, k in sorted(_KISSING.items()))
    return (f"upcap {__version__}\n"
            f"kissing numbers: {table}; N*_n = kappa(n) + 1; other n need an explicit value\n"
            "Gamma/Beta: math.gamma and math.lgamma from the C library")


class _VersionAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        sys.stdout.write(_version_text() + "\n")
        parser.exit()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="upcap", description="Uniform perfectness, capacity and Whitney tools.")
    ap.add_argument("--version", action=_VersionAction, nargs=0, help="show version, kissing-number table and Gamma source")
    ap.add_argument("--jobs", type=int, default=1, help="worker processes for independent solves")
    # --jobs is also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cantor", parents=[common], help="Cantor-type sample sets")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--nested", action="store_true", help="random nested-ball family instead of middle thirds")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--c", type=float, default=0.4)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cantor)

    p = sub.add_parser("up-estimate", parents=[common], help="uniform-perfectness parameter of a sample")
    p.add_argument("--set", required=True, help="CompactSet JSON")
    p.add_argument("--safety", type=float, default=8.0, help="radii below safety x resolution are ignored")
    p.add_argument("--out")
    p.set_defaults(func=cmd_up_estimate)

    p = sub.add_parser("bounds", parents=[common], help="explicit constants and lower bounds")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--c", type=float)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--sigma", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--dE", type=float)
    p.add_argument("--dist", type=float)
    p.add_argument("--uniform", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("whitney", parents=[common], help="Whitney decomposition and its verification")
    _add_mask_args(p)
    p.add_argument("--kmin", type=int, default=0)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--svg")
    p.add_argument("--json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_whitney)

    p = sub.add_parser("capacity", parents=[common], help="condenser capacity")
    p.add_argument("action", choices=["solve", "ring", "annulus", "tau2"])
    p.add_argument("--cond")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--refine", action="store_true")
    p.add_argument("--maxiter", type=int, default=100_000)
    p.add_argument("--method", default="cg", choices=["cg", "direct"])
    p.add_argument("--precond", default="amg", choices=["amg", "jacobi", "none"])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=math.e)
    p.add_argument("--cells", type=int, default=256)
    p.add_argument("--save", help="write the rasterized condenser JSON")
    p.add_argument("--s", type=float, default=1.0)
    p.add_argument("--validate", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("metrics", parents=[common], help="quasihyperbolic distance")
    p.add_argument("action", choices=["qh"])
    _add_mask_args(p)
    p.add_argument("--from", dest="frm", required=True)
    p.add_argument("--to", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("testfn", parents=[common], help="capacity test function scans")
    p.add_argument("action", choices=["scan"])
    _add_mask_args(p)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--kmax", type=int, default=5)
    p.add_argument("--cubes", action="store_true", help="Whitney-square capacity test instead of u_alpha scan")
    p.add_argument("--csv")
    p.add_argument("--n-theta", dest="n_theta", type=int, default=64)
    p.add_argument("--out")
    p.set_defaults(func=cmd_testfn)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        sys.stderr.write("upcap: error: --jobs must be at least 1\n")
        return 1
    try:
        args.func(args)
    except DomainError as exc:
        sys.stderr.write(f"upcap {args.command}: precondition violated: {exc}\n")
        return 1
    except (NonConvergenceError, CrossValidationError) as exc:
        sys.stderr.write(f"upcap {args.command}: numerical failure: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
