"""Experiment harness: single solves, mode comparisons and convergence studies.

Every command writes delimited output (12 significant digits) plus
matplotlib figures into the output directory; rerunning with the same
configuration and seed reproduces the numeric fields byte for byte
(timing columns excepted).  Exit codes: 0 success, 1 solver failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .eigensolver import (EXACT, INEXACT, SolverConfig, SolverError,
                          solve_on_mesh)
from .fem import SingularSystem, assemble_system
from .geometry import DISK, DOMAIN_TOKENS, domain_from_token
from .mesh import MeshError, format_mesh_text, generate_mesh
from .oracle import disk_reference, error_norms


@dataclass
class ExperimentConfig:
    command: str
    domain: str
    h_list: list[float]
    mode: str
    out: Path
    seed: int = 0
    tol_outer: float = 1e-6
    xi_coefficient: float = 20.0
    xi_power: float = 1.1
    tol_eta2: float = 1e-10
    max_inner: int = 15000
    max_outer: int = 200
    eta_init: float = 0.5
    dump_mesh: bool = False
    plots: bool = True
    jobs: int = 1
    dump_profile: bool = False

    def solver_config(self, h: float, mode: str) -> SolverConfig:
        return SolverConfig(domain=domain_from_token(self.domain), h=h, mode=mode,
                            tol_outer=self.tol_outer, xi_coefficient=self.xi_coefficient,
                            xi_power=self.xi_power, tol_eta2=self.tol_eta2,
                            max_inner=self.max_inner, max_outer=self.max_outer,
                            eta_init=self.eta_init, seed=self.seed)


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _parse_h(text: str) -> float:
    try:
        value = float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"cannot parse mesh size {text!r}") from exc
    if not (0.0 < value <= 0.5):
        raise argparse.ArgumentTypeError(f"mesh size {value} outside (0, 0.5]")
    return value


def _h_label(h: float) -> str:
    inv = 1.0 / h
    return f"1/{round(inv)}" if abs(inv - round(inv)) < 1e-9 else _fmt(h)


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _report_dict(report) -> dict:
    return {
        "schema": "maeig-report-v1",
        "domain": report.domain,
        "h": float(report.h),
        "mode": report.mode,
        "seed": report.seed,
        "lambda_h": report.lambda_h,
        "min_u": report.min_u,
        "eta1_final": report.eta1_final,
        "converged": report.converged,
        "outer_iterations": report.outer_iters,
        "total_poisson": report.total_poisson,
        "wall_ms": report.wall_ms,
        "mesh": {
            "vertices": report.n_vertices,
            "triangles": report.n_triangles,
            "stiffness_nnz": report.stiffness_nnz,
            "factor_ms": report.factor_ms,
        },
        "trace": [
            {
                "k": r.k,
                "lambda": r.lambda_k,
                "eta1": r.eta1,
                "inner_iters": r.inner_iters,
                "cumulative_poisson": r.cumulative_poisson,
                "wall_ms": r.wall_ms,
            }
            for r in report.iterations
        ],
    }


def run_solve(cfg: ExperimentConfig) -> int:
    """Single eigensolve: report.json, trace.csv, solution.csv and figures."""
    h = cfg.h_list[0]
    mesh = generate_mesh(domain_from_token(cfg.domain), h, cfg.seed)
    system = assemble_system(mesh)
    lam, u, report = solve_on_mesh(mesh, system, cfg.solver_config(h, cfg.mode))

    cfg.out.mkdir(parents=True, exist_ok=True)
    with open(cfg.out / "report.json", "w") as fh:
        json.dump(_report_dict(report), fh, indent=2)
        fh.write("\n")
    _write_csv(cfg.out / "trace.csv",
               ["k", "lambda", "eta1", "inner_iters", "cumulative_poisson", "wall_ms"],
               [[r.k, _fmt(r.lambda_k), _fmt(r.eta1), r.inner_iters,
                 r.cumulative_poisson, _fmt(r.wall_ms)] for r in report.iterations])
    _write_csv(cfg.out / "solution.csv", ["x", "y", "u", "boundary"],
               [[_fmt(x), _fmt(y), _fmt(val), int(b)]
                for (x, y), val, b in zip(mesh.vertices, u, mesh.boundary_mask)])
    if cfg.dump_mesh:
        (cfg.out / "mesh.txt").write_text(format_mesh_text(mesh))
    if cfg.plots:
        from . import plots
        tag = f"{cfg.domain}, h={_h_label(h)}, {cfg.mode}"
        plots.solution_figure(mesh, u, cfg.out / "solution.png", title=tag)
        plots.trace_figure(report.iterations, cfg.out / "trace.png", title=tag)
    print(f"{cfg.domain} h={_h_label(h)} {cfg.mode}: lambda_h={lam:.9f} "
          f"min_u={report.min_u:.9f} iters={report.outer_iters} "
          f"poisson={report.total_poisson} -> {cfg.out}")
    return 0


def _compare_cell(args):
    """One (domain, h) cell of a comparison: both modes on the same mesh."""
    cfg, h, modes = args
    mesh = generate_mesh(domain_from_token(cfg.domain), h, cfg.seed)
    system = assemble_system(mesh)
    rows = []
    for mode in modes:
        try:
            t0 = time.perf_counter()
            _, _, report = solve_on_mesh(mesh, system, cfg.solver_config(h, mode))
            rows.append({
                "algorithm": mode, "h": h, "iter": report.outer_iters,
                "eta1": report.eta1_final, "lambda_h": report.lambda_h,
                "min_u": report.min_u, "time_s": time.perf_counter() - t0,
                "poisson": report.total_poisson, "status": "ok",
            })
        except (SolverError, SingularSystem) as exc:
            rows.append({
                "algorithm": mode, "h": h, "iter": 0, "eta1": float("nan"),
                "lambda_h": float("nan"), "min_u": float("nan"),
                "time_s": float("nan"), "poisson": 0,
                "status": f"failed: {type(exc).__name__}",
            })
    return rows


def run_compare(cfg: ExperimentConfig) -> int:
    """Both algorithms per mesh size on a shared mesh; one table, one figure."""
    modes = [INEXACT, EXACT] if cfg.mode == "both" else [cfg.mode]
    cells = [(cfg, h, modes) for h in cfg.h_list]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_compare_cell, cells))
    else:
        results = [_compare_cell(cell) for cell in cells]
    rows = [row for cell_rows in results for row in cell_rows]

    cfg.out.mkdir(parents=True, exist_ok=True)
    _write_csv(cfg.out / "compare.csv",
               ["algorithm", "h", "iter", "eta1", "lambda_h", "min_u",
                "time_s", "poisson", "status"],
               [[r["algorithm"], _fmt(r["h"]), r["iter"], _fmt(r["eta1"]),
                 _fmt(r["lambda_h"]), _fmt(r["min_u"]), _fmt(r["time_s"]),
                 r["poisson"], r["status"]] for r in rows])
    if cfg.plots:
        from . import plots
        plots.compare_figure(rows, cfg.out / "compare.png", title=cfg.domain)
    for r in rows:
        print(f"{r['algorithm']:7s} h={_h_label(r['h']):6s} lambda_h={r['lambda_h']:.9f} "
              f"iters={r['iter']:3d} poisson={r['poisson']:5d} [{r['status']}]")
    return 0 if all(r["status"] == "ok" for r in rows) else 1


def run_convergence(cfg: ExperimentConfig) -> int:
    """Disk errors against the radial shooting reference over halving h."""
    reference = disk_reference()
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            solved = list(pool.map(_solve_for_convergence,
                                   [(cfg, h) for h in cfg.h_list]))
    else:
        solved = [_solve_for_convergence((cfg, h)) for h in cfg.h_list]

    errors = []
    for (mesh, u), h in zip(solved, cfg.h_list):
        l2, h1 = error_norms(mesh, u, reference)
        errors.append((h, l2, h1))

    rows = []
    for i, (h, l2, h1) in enumerate(errors):
        if i == 0:
            rows.append([_fmt(h), _fmt(l2), "", _fmt(h1), ""])
        else:
            l2_rate = np.log2(errors[i - 1][1] / l2)
            h1_rate = np.log2(errors[i - 1][2] / h1)
            rows.append([_fmt(h), _fmt(l2), _fmt(l2_rate), _fmt(h1), _fmt(h1_rate)])
    cfg.out.mkdir(parents=True, exist_ok=True)
    _write_csv(cfg.out / "convergence.csv",
               ["h", "l2_error", "l2_rate", "h1_error", "h1_rate"], rows)
    if cfg.dump_profile:
        _write_csv(cfg.out / "reference_profile.csv", ["r", "v"],
                   [[_fmt(r), _fmt(v)] for r, v in zip(reference.r_grid, reference.v)])
    if cfg.plots:
        from . import plots
        plots.convergence_figure([e[0] for e in errors], [e[1] for e in errors],
                                 [e[2] for e in errors], cfg.out / "rates.png",
                                 title="disk convergence")
    for row in rows:
        print("h={:8s} l2={:12s} rate={:8s} h1={:12s} rate={}".format(
            row[0], row[1], row[2] or "-", row[3], row[4] or "-"))
    return 0


def _solve_for_convergence(args):
    cfg, h = args
    scfg = cfg.solver_config(h, cfg.mode)
    mesh = generate_mesh(scfg.domain, h, cfg.seed)
    system = assemble_system(mesh)
    _, u, _ = solve_on_mesh(mesh, system, scfg)
    return mesh, u


def _add_common(sub, modes, default_mode):
    sub.add_argument("--domain", choices=DOMAIN_TOKENS, default=DISK,
                     help="domain token (default: disk)")
    sub.add_argument("--h", dest="h_list", action="append", type=_parse_h,
                     metavar="H", help="target edge length, e.g. 1/40 (repeatable)")
    sub.add_argument("--mode", choices=modes, default=default_mode)
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--tol-outer", type=float, default=1e-6)
    sub.add_argument("--xi-coeff", type=float, default=20.0)
    sub.add_argument("--xi-power", type=float, default=1.1)
    sub.add_argument("--tol-eta2", type=float, default=1e-10)
    sub.add_argument("--max-inner", type=int, default=15000)
    sub.add_argument("--max-outer", type=int, default=200)
    sub.add_argument("--eta-init", type=float, default=0.5)
    sub.add_argument("--out", type=Path, default=Path("maeig_out"))
    sub.add_argument("--no-plots", dest="plots", action="store_false",
                     help="skip figure rendering")
    sub.add_argument("--jobs", type=int, default=1,
                     help="parallel workers across mesh sizes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maeig",
        description="Monge-Ampere eigenvalue experiments on unstructured P1 meshes")
    parser.add_argument("--version", action="version", version=f"maeig {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    solve = subs.add_parser("solve", help="single eigensolve with full trace output")
    _add_common(solve, (INEXACT, EXACT), INEXACT)
    solve.add_argument("--dump-mesh", action="store_true",
                       help="also write the mesh in the documented text format")

    compare = subs.add_parser("compare",
                              help="inexact vs exact subproblem solves on shared meshes")
    _add_common(compare, (INEXACT, EXACT, "both"), "both")

    conv = subs.add_parser("convergence",
                           help="disk error rates against the radial shooting reference")
    _add_common(conv, (INEXACT, EXACT), INEXACT)
    conv.add_argument("--dump-profile", action="store_true",
                      help="also write the radial reference profile as (r, v) columns")
    return parser


def _configure_logging():
    level = os.environ.get("MAEIG_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)

    h_list = args.h_list or []
    if args.command == "solve" and len(h_list) != 1:
        parser.error("solve needs exactly one --h")
    if args.command == "compare" and not h_list:
        parser.error("compare needs at least one --h")
    if args.command == "convergence":
        if args.domain != DISK:
            parser.error("convergence study requires --domain disk (the only "
                         "domain with a shooting reference)")
        if len(h_list) < 2:
            parser.error("convergence needs at least two --h values")
        for a, b in zip(h_list, h_list[1:]):
            if abs(b - a / 2.0) > 1e-9 * a:
                parser.error("convergence requires successively halving --h values")

    cfg = ExperimentConfig(
        command=args.command, domain=args.domain, h_list=h_list, mode=args.mode,
        out=args.out, seed=args.seed, tol_outer=args.tol_outer,
        xi_coefficient=args.xi_coeff, xi_power=args.xi_power, tol_eta2=args.tol_eta2,
        max_inner=args.max_inner, max_outer=args.max_outer, eta_init=args.eta_init,
        dump_mesh=getattr(args, "dump_mesh", False), plots=args.plots, jobs=args.jobs,
        dump_profile=getattr(args, "dump_profile", False))

    runner = {"solve": run_solve, "compare": run_compare,
              "convergence": run_convergence}[args.command]
    try:
        return runner(cfg)
    except (MeshError, SolverError, SingularSystem) as exc:
        print(f"maeig: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
