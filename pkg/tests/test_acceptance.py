"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines; the
solves here are timed end to end (mesh generation included) because the
criteria carry runtime budgets.
"""

import time

import numpy as np
import pytest

from maeig.eigensolver import (EXACT, INEXACT, SolverConfig, initial_guess,
                               rayleigh_quotient, solve_on_mesh, xi_threshold)
from maeig.fem import assemble_system, solve_poisson
from maeig.geometry import domain_from_token, reference_area
from maeig.mesh import discrete_norm, generate_mesh
from maeig.oracle import error_norms, integrate_radial, normalized_profile, shoot_lambda
from maeig.recovery import recover_hessian

TABLE_DISK = {20: (7.481792879, -1.061907032), 40: (7.488103602, -1.062780305)}
TABLE_ELLIPSE_40 = 14.974065807
TABLE_SMOOTHSQ_40 = 5.7361
TABLE_SQUARE_40 = 54.15
SHOOTING_LAMBDA = 7.490039
SHOOTING_CENTER = -1.0628
TABLE_L2_AT_20 = 1.32e-4


def verdict(num, label, ok, detail):
    print(f"ACCEPTANCE {num} ({label}): {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


def timed_solve(token, h, mode=INEXACT):
    domain = domain_from_token(token)
    t0 = time.perf_counter()
    mesh = generate_mesh(domain, h, seed=0)
    system = assemble_system(mesh)
    lam, u, report = solve_on_mesh(mesh, system, SolverConfig(domain=domain, h=h, mode=mode))
    return {"mesh": mesh, "system": system, "lam": lam, "u": u,
            "report": report, "seconds": time.perf_counter() - t0}


@pytest.fixture(scope="module")
def oracle():
    t0 = time.perf_counter()
    lam = shoot_lambda(1e-10)
    profile = normalized_profile(integrate_radial(lam, -1.0))
    return {"lam": lam, "profile": profile, "seconds": time.perf_counter() - t0}


@pytest.fixture(scope="module")
def solves():
    cells = [("disk", 20), ("disk", 40), ("ellipse", 40), ("smoothsq", 40),
             ("square", 20), ("square", 40)]
    return {cell: timed_solve(cell[0], 1.0 / cell[1]) for cell in cells}


@pytest.fixture(scope="module")
def shared_mesh_compare(solves):
    base = solves[("disk", 40)]
    out = {}
    for mode in (INEXACT, EXACT):
        t0 = time.perf_counter()
        lam, u, report = solve_on_mesh(
            base["mesh"], base["system"],
            SolverConfig(domain=domain_from_token("disk"), h=1 / 40, mode=mode))
        out[mode] = {"lam": lam, "report": report,
                     "seconds": time.perf_counter() - t0}
    return out


def test_criterion_1_shooting_oracle(oracle):
    lam, v0 = oracle["lam"], oracle["profile"].v[0]
    ok = (abs(lam - SHOOTING_LAMBDA) <= 1e-4
          and abs(v0 - SHOOTING_CENTER) <= 1e-3
          and oracle["seconds"] < 1.0)
    verdict(1, "shooting oracle", ok,
            f"lambda={lam:.7f} (target {SHOOTING_LAMBDA}+-1e-4), "
            f"v(0)={v0:.5f} (target {SHOOTING_CENTER}+-1e-3), "
            f"runtime {oracle['seconds']:.2f}s < 1s")


def test_criterion_2_disk_eigenvalue(solves):
    cell = solves[("disk", 40)]
    lam_ref, min_ref = TABLE_DISK[40]
    ok = (abs(cell["lam"] - lam_ref) <= 5e-3
          and abs(cell["report"].min_u - min_ref) <= 5e-3
          and cell["seconds"] < 10.0)
    verdict(2, "disk eigenvalue h=1/40", ok,
            f"lambda_h={cell['lam']:.9f} (table {lam_ref}, diff "
            f"{cell['lam'] - lam_ref:+.2e} within 5e-3), min_u="
            f"{cell['report'].min_u:.9f} (table {min_ref}, diff "
            f"{cell['report'].min_u - min_ref:+.2e}), runtime "
            f"{cell['seconds']:.1f}s < 10s")


def test_criterion_3_disk_refinement_trend(solves):
    err20 = abs(solves[("disk", 20)]["lam"] - SHOOTING_LAMBDA)
    err40 = abs(solves[("disk", 40)]["lam"] - SHOOTING_LAMBDA)
    ok = err40 < err20
    verdict(3, "disk refinement trend", ok,
            f"|lambda(1/40)-{SHOOTING_LAMBDA}|={err40:.2e} < "
            f"|lambda(1/20)-{SHOOTING_LAMBDA}|={err20:.2e}")


def test_criterion_4_other_domains(solves):
    ell = solves[("ellipse", 40)]
    ssq = solves[("smoothsq", 40)]
    sq40 = solves[("square", 40)]
    sq20 = solves[("square", 20)]
    checks = [
        abs(ell["lam"] - TABLE_ELLIPSE_40) <= 0.02,
        abs(ssq["lam"] - TABLE_SMOOTHSQ_40) <= 0.01,
        abs(sq40["lam"] - TABLE_SQUARE_40) <= 0.5,
        sq20["lam"] > sq40["lam"],
        ell["seconds"] < 15.0, ssq["seconds"] < 15.0, sq40["seconds"] < 15.0,
    ]
    verdict(4, "ellipse/smoothed-square/square", all(checks),
            f"ellipse {ell['lam']:.6f} ({TABLE_ELLIPSE_40}+-0.02), smoothsq "
            f"{ssq['lam']:.6f} ({TABLE_SMOOTHSQ_40}+-0.01), square "
            f"{sq40['lam']:.4f} ({TABLE_SQUARE_40}+-0.5), square trend "
            f"{sq20['lam']:.4f} > {sq40['lam']:.4f}, runtimes "
            f"{ell['seconds']:.1f}/{ssq['seconds']:.1f}/{sq40['seconds']:.1f}s < 15s")


def test_criterion_5_efficiency(shared_mesh_compare):
    inexact = shared_mesh_compare[INEXACT]
    exact = shared_mesh_compare[EXACT]
    n_in, n_ex = inexact["report"].total_poisson, exact["report"].total_poisson
    ok = n_in <= 0.5 * n_ex and inexact["seconds"] <= exact["seconds"]
    verdict(5, "inexact efficiency on shared mesh", ok,
            f"Poisson {n_in} <= 0.5*{n_ex} (ratio {n_in / n_ex:.3f}), wall "
            f"{inexact['seconds']:.2f}s <= {exact['seconds']:.2f}s")


def test_criterion_6_convergence_rates(solves, oracle):
    errs = {}
    for level in (20, 40):
        cell = solves[("disk", level)]
        errs[level] = error_norms(cell["mesh"], cell["u"], oracle["profile"])
    l2_rate = np.log2(errs[20][0] / errs[40][0])
    h1_rate = np.log2(errs[20][1] / errs[40][1])
    ok = (1.6 <= l2_rate <= 2.4 and 0.8 <= h1_rate <= 1.5
          and TABLE_L2_AT_20 / 4.0 <= errs[20][0] <= TABLE_L2_AT_20 * 4.0)
    verdict(6, "disk error rates", ok,
            f"L2 rate {l2_rate:.2f} in [1.6,2.4], H1 rate {h1_rate:.2f} in "
            f"[0.8,1.5], L2(1/20)={errs[20][0]:.3e} within 4x of {TABLE_L2_AT_20}")


def test_criterion_7_outer_convergence(solves):
    details = []
    ok = True
    for tok in ("disk", "ellipse", "smoothsq", "square"):
        report = solves[(tok, 40)]["report"]
        lams = [r.lambda_k for r in report.iterations]
        monotone = all(b <= a * (1.0 + 1e-3) for a, b in zip(lams[5:], lams[6:]))
        ok &= (report.converged and report.eta1_final < 1e-6
               and report.outer_iters <= 40 and monotone)
        details.append(f"{tok}: {report.outer_iters} iters, eta1="
                       f"{report.eta1_final:.1e}, monotone(k>=5)={monotone}")
    verdict(7, "outer convergence on all domains", ok, "; ".join(details))


def test_criterion_8_property_suite(solves):
    checks = []
    disk = solves[("disk", 40)]
    mesh20 = solves[("disk", 20)]["mesh"]
    system20 = solves[("disk", 20)]["system"]

    # manufactured Poisson solution, laplacian(u)=4 on the disk
    u = solve_poisson(system20, np.full(mesh20.n_vertices, 4.0))
    exact = mesh20.vertices[:, 0] ** 2 + mesh20.vertices[:, 1] ** 2 - 1.0
    checks.append(("poisson 5h^2", np.abs(u - exact).max() <= 5.0 * mesh20.h_target**2))

    # recovery annihilates affine fields (unit-scale data; the roundoff
    # floor of double differentiation is eps * |f| / h^2)
    affine = 0.7 * mesh20.vertices[:, 0] - 0.25 * mesh20.vertices[:, 1] + 0.2
    hess = recover_hessian(mesh20, affine)
    checks.append(("affine recovery 1e-13",
                   max(np.abs(hess.uxx).max(), np.abs(hess.uxy).max(),
                       np.abs(hess.uyy).max()) <= 1e-13))

    # discrete norm homogeneity and triangle inequality
    rng = np.random.default_rng(21)
    areas = mesh20.patch_areas
    homogeneous = True
    triangle = True
    for _ in range(100):
        f = rng.normal(size=mesh20.n_vertices)
        g = rng.normal(size=mesh20.n_vertices)
        c = rng.normal()
        homogeneous &= np.isclose(discrete_norm(c * f, areas, 3),
                                  abs(c) * discrete_norm(f, areas, 3), rtol=1e-13)
        triangle &= (discrete_norm(f + g, areas, 2)
                     <= discrete_norm(f, areas, 2) + discrete_norm(g, areas, 2) + 1e-12)
    checks.append(("norm homogeneity", homogeneous))
    checks.append(("norm triangle inequality", triangle))

    # solutions: bit-exact zero boundary, nonpositive everywhere
    signs = True
    for cell in solves.values():
        signs &= bool(np.all(cell["u"][cell["mesh"].boundary_mask] == 0.0))
        signs &= bool(np.all(cell["u"] <= 0.0))
    u0 = initial_guess(mesh20, system20, 0.5)
    signs &= bool(np.all(u0 <= 0.0) and np.all(u0[mesh20.boundary_mask] == 0.0))
    checks.append(("zero boundary / nonpositive", signs))

    # monotonicity monitor with |Omega|^(1/3) xi_k and 1% slack, k >= 3
    cfg = SolverConfig(domain=domain_from_token("disk"), h=1 / 40)
    factor = reference_area(domain_from_token("disk")) ** (1.0 / 3.0)
    rec = disk["report"].iterations
    monitor = True
    for prev, nxt in zip(rec[3:], rec[4:]):
        phi_prev = prev.lambda_k * prev.u_norm_h**2
        phi_next = nxt.lambda_k * nxt.u_norm_h**2
        monitor &= phi_next <= phi_prev + factor * xi_threshold(prev.k, prev.eta1, cfg) \
            + 1e-2 * phi_prev
    checks.append(("monotonicity monitor", monitor))

    # Rayleigh quotient of the paraboloid tends to 8
    mesh40 = disk["mesh"]
    par = 0.5 * (mesh40.vertices[:, 0] ** 2 + mesh40.vertices[:, 1] ** 2 - 1.0)
    rq = rayleigh_quotient(par, np.ones(mesh40.n_vertices), mesh40.patch_areas)
    checks.append(("paraboloid Rayleigh -> 8", abs(rq - 8.0) < 0.2))

    ok = all(flag for _, flag in checks)
    verdict(8, "property suite", ok,
            ", ".join(f"{name}: {'ok' if flag else 'FAIL'}" for name, flag in checks))
