"""Command line entry point.

Failures print one JSON object ``{"error": ..., "message": ..., "exit_code": ...}``
on stderr.  Exit codes: 0 success, 2 usage, 3 configuration, 4 I/O,
5 numerical failure, 6 anything else.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..assembly import assemble_collocation, assemble_evaluation, assemble_rhs, normalize_for_encoding
from ..geometry import Domain, load_points_csv, make_point_set, save_points_csv
from ..kernel import make_wendland
from ..quantum.pipeline import qlsa_solve
from ..quantum.state import normalize
from ..solver import ConvergenceError, manufactured_solution, solve_system
from .complexity import complexity_exponents, tau_of
from .config import ConfigError, StudyConfig, load_config
from .io import output_dir, to_jsonable, write_json, write_matrix, write_vector
from .studies import run_conditioning_study, run_convergence_study, run_qlsa_comparison

__all__ = ["main", "build_parser", "EXIT_CODES"]

EXIT_CODES = {"ok": 0, "usage": 2, "config": 3, "io": 4, "numerical": 5, "internal": 6}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(obj, out=None):
    text = json.dumps(to_jsonable(obj), indent=2)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def _points_from_args(args):
    if args.points:
        return load_points_csv(args.points, Domain(args.d) if args.d else None)
    if not args.d or not args.n:
        raise UsageError("give --points FILE or both --d and --n")
    return make_point_set(Domain(args.d), args.n, per_face=args.per_face, seed_skip=args.seed_skip)


def _system_from_args(args):
    pts = _points_from_args(args)
    kernel = make_wendland(pts.d, args.k)
    u, f, g = manufactured_solution(pts.d)
    system = assemble_collocation(kernel, pts, args.delta)
    b = assemble_rhs(f, g, pts, args.delta)
    ev = assemble_evaluation(kernel, pts, args.delta)
    return pts, kernel, system.with_rhs(b), ev, u


def cmd_kernel_dump(args):
    _emit(make_wendland(args.d, args.k).to_dict(), args.out)


def cmd_points_gen(args):
    pts = make_point_set(Domain(args.d), args.n, per_face=args.per_face, seed_skip=args.seed_skip)
    out = Path(args.out) if args.out else output_dir() / "points.csv"
    save_points_csv(out, pts)
    _emit({"path": str(out), "N": pts.n, "n_interior": pts.n_interior, "h": pts.h, "q": pts.q})


def cmd_assemble(args):
    pts, kernel, system, ev, _ = _system_from_args(args)
    out = output_dir(args.out_dir)
    write_matrix(out / "A_raw.mtx", system.A_raw)
    write_matrix(out / "A.mtx", system.A)
    write_matrix(out / "M.mtx", ev.M)
    write_vector(out / "b.csv", system.b, "b")
    _emit({"dir": str(out), "N": system.n, "n_interior": system.n_interior, "sparsity": system.sparsity})


def cmd_solve(args):
    pts, kernel, system, ev, u = _system_from_args(args)
    res = solve_system(system, ev, method=args.method, tol=args.tol, max_iter=args.max_iter)
    data = json.loads(res.to_json())
    data["l2_error"] = float(
        np.linalg.norm(res.u_bar_at_points - u(pts.points)) / np.linalg.norm(u(pts.points))
    )
    _emit(data, args.out)


def cmd_qsolve(args):
    pts, kernel, system, ev, _ = _system_from_args(args)
    A_hat, eta = normalize_for_encoding(system)
    res = qlsa_solve(A_hat, normalize(system.b).real, eps_L=args.eps_L)
    data = res.to_dict()
    data["eta"] = eta
    if args.amplitudes:
        write_vector(args.amplitudes, res.c_state.real, "c")
    _emit(data, args.out)


def cmd_study(args):
    cfg = load_config(args.config)
    runner = {
        "convergence": run_convergence_study,
        "conditioning": run_conditioning_study,
        "qlsa": run_qlsa_comparison,
    }[args.kind]
    report = runner(cfg)
    csv_path, json_path = report.write(output_dir(cfg.output_dir))
    _emit({"csv": str(csv_path), "json": str(json_path), "fits": report.fits})


def cmd_complexity(args):
    if args.tau is not None:
        tau = args.tau
    elif args.k is not None:
        tau = tau_of(args.d, args.k)
    else:
        raise UsageError("give --k or --tau")
    beta = int(args.beta) if float(args.beta).is_integer() else args.beta
    _emit(complexity_exponents(args.d, tau, beta).to_dict())


def _point_args(p):
    p.add_argument("--points", help="CSV point file (coordinates then tag)")
    p.add_argument("--d", type=int)
    p.add_argument("--n", type=int, help="interior Halton points when generating")
    p.add_argument("--per-face", type=int, default=None)
    p.add_argument("--seed-skip", type=int, default=0)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--delta", type=float, default=0.5)


def build_parser():
    parser = _Parser(prog="rbfqlsa", description="RBF collocation and simulated QLSA workbench")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    kernel = sub.add_parser("kernel").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = kernel.add_parser("dump", help="expanded Wendland coefficients as JSON")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kernel_dump)

    points = sub.add_parser("points").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = points.add_parser("gen", help="Halton interior and boundary points to CSV")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--per-face", type=int, default=None)
    p.add_argument("--seed-skip", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_points_gen)

    p = sub.add_parser("assemble", help="write A_raw, A, M (Matrix Market) and b (CSV)")
    _point_args(p)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_assemble)

    p = sub.add_parser("solve", help="classical solve of the manufactured problem")
    _point_args(p)
    p.add_argument("--method", choices=["cg", "direct"], default="cg")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("qsolve", help="simulated filtering QLSA of the manufactured problem")
    _point_args(p)
    p.add_argument("--eps-L", dest="eps_L", type=float, default=1e-4)
    p.add_argument("--amplitudes", help="CSV file for the output amplitudes")
    p.add_argument("--out")
    p.set_defaults(func=cmd_qsolve)

    p = sub.add_parser("study", help="run a study from a JSON config")
    p.add_argument("kind", choices=["convergence", "conditioning", "qlsa"])
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("complexity", help="cost exponents of both solvers")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--tau", type=float)
    p.set_defaults(func=cmd_complexity)
    return parser


def _fail(kind, exc):
    code = EXIT_CODES[kind]
    print(
        json.dumps({"error": type(exc).__name__, "kind": kind, "message": str(exc), "exit_code": code}),
        file=sys.stderr,
    )
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except UsageError as exc:
        return _fail("usage", exc)
    except ConfigError as exc:
        return _fail("config", exc)
    except OSError as exc:
        return _fail("io", exc)
    except (ValueError, ArithmeticError, ConvergenceError, RuntimeError) as exc:
        return _fail("numerical", exc)
    except Exception as exc:  # pragma: no cover - last resort
        return _fail("internal", exc)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
