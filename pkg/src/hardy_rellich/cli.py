"""Command-line interface.

Subcommands mirror the library operations one to one:

* ``mu`` -- the boundary parameter mu(n) and its defining residual;
* ``shoot`` -- integrate one pair equation, emit a JSON summary and
  optionally the trajectory as CSV;
* ``theta`` -- boundary ratio of the positive solution;
* ``weight`` -- beta(V, W; R) by bisection;
* ``sweep`` -- weight over a parameter grid, CSV rows;
* ``rayleigh`` -- per-mode Rayleigh-quotient minimization;
* ``constants`` -- closed-form best constants next to computed values;
* ``verify`` -- inequality deficits over a test-function suite (exit code 1
  when any deficit is genuinely negative).

Output is deterministic: floats are printed with 17 significant digits and
keys are sorted, so identical configurations produce byte-identical JSON.
Potentials are given either as shorthand (``one``, ``zero``, ``power:m=1``,
``logchain:k=1,rho=2.718``, ``xchain:k=2``), as inline JSON, or as
``@file.json`` holding a {kind, params} record tree.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .bessel_weight import NeverPositiveError, weight
from .inequality import suite_deficits
from .potentials import PotentialError, make_potential
from .radial_ode import OdeProblem, shoot_from_origin, theta as ode_theta
from .special_functions import first_zero_j0, mu_for_dimension, mu_residual
from .spectral import GRAD_OVER_GRAD, DELTA_OVER_U, GridParams, min_rayleigh

SCHEMA = "hardy-rellich/1"
WORKERS_ENV = "HARDY_RELLICH_WORKERS"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run (plus the package version)."""

    command: str
    options: dict = field(default_factory=dict)
    seed: int = 0
    output_format: str = "json"
    version: str = __version__


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps_stable(obj, indent: int = 0) -> str:
    """JSON with fixed 17-significant-digit floats and sorted keys."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = ",\n".join(
            f'{pad}  {json.dumps(str(k))}: {dumps_stable(v, indent + 2).lstrip()}'
            for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))
        )
        return f"{pad}{{\n{items}\n{pad}}}" if obj else f"{pad}{{}}"
    if isinstance(obj, (list, tuple)):
        items = ",\n".join(dumps_stable(v, indent + 2) for v in obj)
        return f"{pad}[\n{items}\n{pad}]" if len(obj) else f"{pad}[]"
    if isinstance(obj, (bool, np.bool_)):
        return pad + ("true" if obj else "false")
    if obj is None:
        return pad + "null"
    if isinstance(obj, (int, np.integer)):
        return pad + str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return pad + _fmt_float(float(obj))
    return pad + json.dumps(str(obj))


def parse_potential(text: str, R: float = 1.0):
    """Shorthand / JSON / @file potential parser."""
    text = text.strip()
    if text.startswith("@"):
        with open(text[1:], "r", encoding="utf-8") as fh:
            return make_potential(json.load(fh))
    if text.startswith("{"):
        return make_potential(json.loads(text))
    name, _, argstr = text.partition(":")
    name = name.lower()
    params: dict = {"R": R}
    if argstr:
        for piece in argstr.split(","):
            key, _, val = piece.partition("=")
            params[key.strip()] = float(val)
    alias = {"one": "constant", "const": "constant", "constant": "constant",
             "zero": "zero", "power": "power", "logchain": "logchain",
             "xchain": "xchain"}
    if name not in alias:
        raise PotentialError(f"unknown potential shorthand {name!r}")
    kind = alias[name]
    if kind in ("logchain", "xchain") and "k" in params:
        params["k"] = int(params["k"])
    return make_potential({"kind": kind, "params": params})


def _emit(payload: dict, args) -> None:
    text = dumps_stable(payload) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_csv(rows: list[dict], fieldnames: list[str], args) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames)
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (format(v, ".17g") if isinstance(v, float) else v)
                         for k, v in row.items()})
    text = buf.getvalue()
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_payload(args, command: str, keys: list[str]) -> dict:
    cfg = RunConfig(
        command=command,
        options={k: getattr(args, k) for k in keys},
        seed=getattr(args, "seed", 0),
        output_format=getattr(args, "format", "json"),
    )
    return {"schema": SCHEMA, "config": asdict(cfg)}


def cmd_mu(args) -> int:
    mu = mu_for_dimension(args.n)
    payload = _config_payload(args, "mu", ["n"])
    payload["result"] = {"mu": mu, "residual": mu_residual(args.n, mu),
                         "z0": first_zero_j0()}
    _emit(payload, args)
    return EXIT_OK


def cmd_shoot(args) -> int:
    V = parse_potential(args.V, args.R)
    W = parse_potential(args.W, args.R)
    problem = OdeProblem.create(args.n, V, W, args.c, args.R,
                                ode_dim=args.ode_dim)
    traj = shoot_from_origin(problem, tol=args.tol)
    th = None
    if traj.first_zero is None and traj.end_ratio is not None:
        th = float(V.value(args.R)) * traj.end_ratio
    payload = _config_payload(args, "shoot",
                              ["n", "V", "W", "c", "R", "ode_dim", "tol"])
    payload["result"] = {
        "first_zero": traj.first_zero,
        "end_ratio": traj.end_ratio,
        "theta": th,
        "boundary_degenerate": traj.boundary_degenerate,
        "sigma": traj.sigma,
    }
    if args.csv_out or args.format == "csv":
        rows = [{"r": float(r), "y": float(y), "yp": float(yp)}
                for r, y, yp in zip(traj.grid, traj.y, traj.yp)]
        if args.csv_out:
            saved = args.out
            try:
                args_out = args
                args_out.out = args.csv_out
                _emit_csv(rows, ["r", "y", "yp"], args_out)
            finally:
                args.out = saved
            _emit(payload, args)
        else:
            _emit_csv(rows, ["r", "y", "yp"], args)
    else:
        _emit(payload, args)
    return EXIT_OK


def cmd_theta(args) -> int:
    V = parse_potential(args.V, args.R)
    W = parse_potential(args.W, args.R)
    problem = OdeProblem.create(args.n, V, W, args.c, args.R,
                                ode_dim=args.ode_dim)
    th = ode_theta(problem, tol=args.tol)
    payload = _config_payload(args, "theta",
                              ["n", "V", "W", "c", "R", "ode_dim", "tol"])
    payload["result"] = {"theta": th}
    _emit(payload, args)
    return EXIT_OK


def _weight_payload(res) -> dict:
    return {
        "beta": res.beta,
        "bracket": list(res.bracket),
        "iterations": res.iterations,
        "theta_at_beta": res.theta_at_beta,
        "unbounded": res.unbounded,
    }


def cmd_weight(args) -> int:
    V = parse_potential(args.V, args.R)
    W = parse_potential(args.W, args.R)
    res = weight(V, W, args.n, args.R, rel_tol=args.rel_tol,
                 ode_dim=args.ode_dim)
    payload = _config_payload(args, "weight",
                              ["n", "V", "W", "R", "rel_tol", "ode_dim"])
    payload["result"] = _weight_payload(res)
    _emit(payload, args)
    return EXIT_OK


def _sweep_row(task: dict) -> dict:
    V = make_potential(task["V"])
    W = make_potential(task["W"])
    row = dict(task["params"])
    try:
        res = weight(V, W, task["n"], task["R"], rel_tol=task["rel_tol"],
                     ode_dim=task["ode_dim"])
        row.update(beta=res.beta, theta_at_beta=res.theta_at_beta,
                   iterations=res.iterations,
                   unbounded=res.unbounded, error="")
    except (NeverPositiveError, ArithmeticError, ValueError) as exc:
        row.update(beta=float("nan"), theta_at_beta=None, iterations=0,
                   unbounded=False, error=str(exc))
    return row


def _parse_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_sweep(args) -> int:
    tasks = []
    ns = [int(x) for x in _parse_list(args.n)]
    if args.family == "ckn":
        avals = _parse_list(args.a)
        for n in ns:
            for a in avals:
                c = ((n - 2 * a - 2) / 2.0) ** 2
                tasks.append({
                    "n": n, "R": args.R, "rel_tol": args.rel_tol,
                    "ode_dim": args.ode_dim,
                    "V": {"kind": "power", "params": {"m": a, "R": args.R}},
                    "W": {"kind": "power", "params": {"m": a + 1.0, "R": args.R}},
                    "params": {"family": "ckn", "n": n, "a": a, "R": args.R,
                               "critical_c": c},
                })
    elif args.family == "logchain":
        ks = [int(x) for x in _parse_list(args.k)]
        rhos = _parse_list(args.rho)
        for n in ns:
            for k in ks:
                for rho in rhos:
                    tasks.append({
                        "n": n, "R": args.R, "rel_tol": args.rel_tol,
                        "ode_dim": args.ode_dim,
                        "V": {"kind": "constant", "params": {"R": args.R}},
                        "W": {"kind": "logchain",
                              "params": {"k": k, "rho": rho, "R": args.R}},
                        "params": {"family": "logchain", "n": n, "k": k,
                                   "rho": rho, "R": args.R},
                    })
    elif args.family == "power":
        ms = _parse_list(args.m)
        for n in ns:
            for m in ms:
                tasks.append({
                    "n": n, "R": args.R, "rel_tol": args.rel_tol,
                    "ode_dim": args.ode_dim,
                    "V": {"kind": "constant", "params": {"R": args.R}},
                    "W": {"kind": "power", "params": {"m": m, "R": args.R}},
                    "params": {"family": "power", "n": n, "m": m, "R": args.R},
                })
    else:
        raise PotentialError(f"unknown sweep family {args.family!r}")

    workers = args.workers or int(os.environ.get(WORKERS_ENV, "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    fields = sorted({k for row in rows for k in row})
    _emit_csv(rows, fields, args)
    return EXIT_OK


def cmd_rayleigh(args) -> int:
    quotient = GRAD_OVER_GRAD if args.quotient == "grad" else DELTA_OVER_U
    res = min_rayleigh(args.n, args.m, quotient, args.bc.replace("-", "_"),
                       k_max=args.kmax,
                       grid=GridParams(n_nodes=args.nodes,
                                       r_min_factor=args.rmin_factor),
                       R=args.R)
    payload = _config_payload(args, "rayleigh",
                              ["n", "m", "quotient", "bc", "kmax", "nodes",
                               "rmin_factor", "R"])
    payload["result"] = {
        "value": res.value,
        "k_star": res.k_star,
        "richardson": res.richardson,
        "refinements": [{"nodes": nn, "value": v} for nn, v in res.refinements],
        "per_k": [{"k": p.k, "value": p.value, "excluded": p.excluded}
                  for p in res.per_k],
    }
    _emit(payload, args)
    return EXIT_OK


def _closed_form_gradient(n: int, m: float):
    if m == 0.0:
        if n == 3:
            return 25.0 / 36.0
        if n == 4:
            return 3.0
        if n >= 5:
            return n * n / 4.0
    return None


def cmd_constants(args) -> int:
    n, m = args.n, args.m
    grid = GridParams(n_nodes=args.nodes, r_min_factor=args.rmin_factor)
    rows = []
    grad = min_rayleigh(n, m, GRAD_OVER_GRAD, "h2", grid=grid)
    rows.append({
        "quantity": "gradient_quotient",
        "closed_form": _closed_form_gradient(n, m),
        "computed": grad.value,
        "k_star": grad.k_star,
    })
    if n - 2 * m - 5 > -1:
        mass = min_rayleigh(n, m, DELTA_OVER_U, "h2_h10", grid=grid)
        rows.append({
            "quantity": "mass_quotient",
            "closed_form": ((n + 2 * m) * (n - 4 - 2 * m) / 4.0) ** 2,
            "computed": mass.value,
            "k_star": mass.k_star,
        })
    payload = _config_payload(args, "constants",
                              ["n", "m", "nodes", "rmin_factor"])
    payload["result"] = {"rows": rows}
    if args.format == "csv":
        _emit_csv(rows, ["quantity", "closed_form", "computed", "k_star"], args)
    else:
        _emit(payload, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .profiles import builtin_suite, random_suite

    if args.suite == "builtin":
        suite = builtin_suite(args.R)
    elif args.suite.startswith("random:"):
        suite = random_suite(args.seed, int(args.suite.split(":", 1)[1]), args.R)
    else:
        raise PotentialError(f"unknown suite {args.suite!r}")
    kwargs = {}
    if args.W:
        kwargs["W"] = parse_potential(args.W, args.R)
    if args.m is not None:
        kwargs["m"] = args.m
    if args.alpha is not None:
        kwargs["alpha"] = args.alpha
    reports, skipped = suite_deficits(args.ineq.replace("-", "_"), args.n,
                                      R=args.R, suite=suite, **kwargs)
    entries = [{
        "name": suite_name,
        "inequality": rep.inequality_name,
        "lhs": rep.lhs,
        "deficit": rep.deficit,
        "quad_error": rep.quad_error,
        "holds": rep.holds,
        "labels": list(rep.labels),
        "rhs_terms": dict(rep.rhs_terms),
    } for suite_name, rep in zip(
        [u.name for u in suite if u.name not in set(skipped)], reports)]
    violations = [e["name"] for e in entries if not e["holds"]]
    payload = _config_payload(args, "verify",
                              ["ineq", "n", "R", "suite", "W", "m", "alpha"])
    payload["result"] = {
        "entries": entries,
        "skipped": skipped,
        "violations": violations,
    }
    if args.format == "csv":
        rows = [{k: e[k] for k in ("name", "inequality", "lhs", "deficit",
                                   "quad_error", "holds")} for e in entries]
        _emit_csv(rows, ["name", "inequality", "lhs", "deficit", "quad_error",
                         "holds"], args)
    else:
        _emit(payload, args)
    return EXIT_VIOLATION if violations else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hardy-rellich",
        description="Optimal weighted Hardy and Hardy-Rellich inequality toolkit",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=None, help="write output to this path")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("mu", help="boundary parameter mu(n)")
    p.add_argument("--n", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_mu)

    for name, fn, with_c in (("shoot", cmd_shoot, True),
                             ("theta", cmd_theta, True),
                             ("weight", cmd_weight, False)):
        p = sub.add_parser(name)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--V", required=True)
        p.add_argument("--W", required=True)
        p.add_argument("--R", type=float, default=1.0)
        p.add_argument("--ode-dim", dest="ode_dim", choices=["n", "2d"],
                       default="n")
        if with_c:
            p.add_argument("--c", type=float, default=1.0)
            p.add_argument("--tol", type=float, default=1e-10)
        else:
            p.add_argument("--rel-tol", dest="rel_tol", type=float,
                           default=1e-8)
        if name == "shoot":
            p.add_argument("--csv-out", dest="csv_out", default=None)
        common(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("sweep", help="weight over a parameter grid (CSV)")
    p.add_argument("--family", choices=["ckn", "logchain", "power"],
                   required=True)
    p.add_argument("--n", required=True, help="comma-separated dimensions")
    p.add_argument("--a", default="0.0", help="ckn exponents")
    p.add_argument("--m", default="1.0", help="power exponents")
    p.add_argument("--k", default="1", help="chain depths")
    p.add_argument("--rho", default="7.389", help="logchain scales")
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--rel-tol", dest="rel_tol", type=float, default=1e-8)
    p.add_argument("--ode-dim", dest="ode_dim", choices=["n", "2d"],
                   default="n")
    p.add_argument("--workers", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rayleigh", help="mode-wise Rayleigh minimization")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=float, default=0.0)
    p.add_argument("--quotient", choices=["grad", "delta"], default="grad")
    p.add_argument("--bc", choices=["h2", "h2-h10", "h20"], default="h2")
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--nodes", type=int, default=400)
    p.add_argument("--rmin-factor", dest="rmin_factor", type=float,
                   default=1e-30)
    p.add_argument("--R", type=float, default=1.0)
    common(p)
    p.set_defaults(func=cmd_rayleigh)

    p = sub.add_parser("constants", help="closed-form vs computed constants")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=float, default=0.0)
    p.add_argument("--nodes", type=int, default=200)
    p.add_argument("--rmin-factor", dest="rmin_factor", type=float,
                   default=1e-30)
    common(p)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("verify", help="inequality deficits over a suite")
    p.add_argument("--ineq", required=True,
                   help="hardy | hardy-rellich-radial | hardy-rellich | "
                        "A..F | one-dim")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--suite", default="builtin",
                   help="builtin or random:<size>")
    p.add_argument("--W", default=None, help="improvement weight override")
    p.add_argument("--m", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--workers", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (PotentialError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
