"""Rayleigh inverse iteration for the Monge-Ampere eigenproblem in 2D.

The outer loop updates the Rayleigh quotient R(u_k) and hands the
Monge-Ampere subproblem det(D^2 u) = R(u_k) |u_k|^2 to a fixed-point
Poisson iteration: each pass solves

    laplacian(u_new) = sqrt(uxx^2 + uyy^2 + 2 uxy^2 + 2 R(u_k) u_k^2)

with nodal second derivatives of the previous pass.  In inexact mode the
subproblem is accepted as soon as its determinant residual drops below a
summable tolerance schedule xi_k; exact mode polishes each subproblem to
near machine precision.

The nodal Hessian is the weak-form operator of :class:`~maeig.recovery.
WeakHessian`, whose trace equals the lumped finite-element Laplacian at
interior vertices.  Because every iterate is produced by a Poisson solve,
its nodal Laplacian equals the right-hand side it was solved with, and the
determinant entering the residuals and the Rayleigh quotient is evaluated
through the 2D identity det(D^2 u) = ((lap u)^2 - uxx^2 - uyy^2 -
2 uxy^2) / 2.  At the fixed point of the inner map this determinant equals
the prescribed right-hand side exactly, so the residuals can be driven to
the 1e-6 and 1e-10 thresholds instead of plateauing at discretization
error.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .fem import PoissonSystem, assemble_system, solve_poisson
from .geometry import DomainSpec
from .mesh import TriMesh, discrete_norm, generate_mesh
from .recovery import HessianField, WeakHessian

log = logging.getLogger("maeig")

INEXACT = "inexact"
EXACT = "exact"
MODES = (INEXACT, EXACT)


class SolverError(Exception):
    """Base class for eigensolver failures."""


class ZeroDenominator(SolverError):
    """The Rayleigh quotient denominator vanished."""


class InnerStall(SolverError):
    """The fixed-point loop hit its iteration cap before the break test."""


class OuterStall(SolverError):
    """The outer loop hit its iteration cap before eta1 < tol."""


@dataclass
class SolverConfig:
    """All knobs of one eigensolve; defaults match the benchmark runs."""

    domain: DomainSpec
    h: float
    mode: str = INEXACT
    tol_outer: float = 1e-6       # stop when eta1 drops below this
    xi_coefficient: float = 20.0  # xi_k = xi_coefficient * eta1 / (1+k)^xi_power
    xi_power: float = 1.1
    tol_eta2: float = 1e-10       # exact-mode inner break
    max_inner: int = 15000
    max_outer: int = 200
    eta_init: float = 0.5         # constant Poisson source for the initial guess
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.tol_outer > 0:
            raise ValueError("tol_outer must be positive")
        if not self.xi_power > 1:
            raise ValueError("xi_power must exceed 1 (summable schedule)")
        if self.max_inner < 1:
            raise ValueError("max_inner must be at least 1")
        if not self.eta_init > 0:
            raise ValueError("eta_init must be positive")


@dataclass
class IterationRecord:
    k: int
    lambda_k: float
    eta1: float
    inner_iters: int
    cumulative_poisson: int
    wall_ms: float
    u_norm_h: float = float("nan")  # discrete L2 norm of the raw iterate


@dataclass
class SolverReport:
    """Per-iteration trace plus the final outcome of one eigensolve."""

    domain: str
    h: float
    mode: str
    seed: int
    iterations: list[IterationRecord] = field(default_factory=list)
    lambda_h: float = float("nan")
    min_u: float = float("nan")
    eta1_final: float = float("nan")
    outer_iters: int = 0
    total_poisson: int = 0
    converged: bool = False
    wall_ms: float = 0.0
    n_vertices: int = 0
    n_triangles: int = 0
    stiffness_nnz: int = 0
    factor_ms: float = 0.0


@dataclass
class InnerResult:
    """Accepted subproblem iterate with its defining Poisson right-hand side."""

    u: np.ndarray
    laplacian: np.ndarray
    hessian: HessianField
    poisson_solves: int
    residual: float


def initial_guess(mesh: TriMesh, system: PoissonSystem, eta_init: float) -> np.ndarray:
    """Solution of laplacian(u) = eta_init with zero boundary values."""
    if not eta_init > 0:
        raise ValueError("eta_init must be positive")
    return solve_poisson(system, np.full(mesh.n_vertices, float(eta_init)))


def rayleigh_quotient(field, hess_det, areas) -> float:
    """sum |omega_v| |u_v| det_v / sum |omega_v| |u_v|^3 (quadrature 1/3 cancels)."""
    u = np.abs(np.asarray(field, dtype=float))
    den = float(np.sum(areas * u**3))
    if den < 1e-300:
        raise ZeroDenominator("field is numerically zero")
    return float(np.sum(areas * u * np.asarray(hess_det))) / den


def residual_eta(hess_det, field, rayleigh: float, areas) -> float:
    """Relative eigen-equation residual ||det - R u^2||_h / (1 + R ||u||_h^2).

    Evaluating it with the determinant of the current iterate gives the
    outer criterion eta1; with the determinant of a fresh subproblem
    iterate (field staying the outer one) it gives the inner criterion eta2.
    """
    u = np.asarray(field, dtype=float)
    num = discrete_norm(np.asarray(hess_det) - rayleigh * u**2, areas, 2.0)
    den = 1.0 + rayleigh * discrete_norm(u, areas, 2.0) ** 2
    return num / den


def xi_threshold(k: int, eta1_k: float, cfg: SolverConfig) -> float:
    """Subproblem tolerance schedule, taken with equality for determinism."""
    return cfg.xi_coefficient * eta1_k / (1.0 + k) ** cfg.xi_power


def fixed_point_rhs(hess: HessianField, source) -> np.ndarray:
    """sqrt(uxx^2 + uyy^2 + 2 uxy^2 + 2 source), radicand clamped at zero."""
    return np.sqrt(np.maximum(hess.squared_sum() + 2.0 * np.asarray(source), 0.0))


def laplacian_determinant(lap, hess: HessianField) -> np.ndarray:
    """Nodal det(D^2 u) via ((lap u)^2 - uxx^2 - uyy^2 - 2 uxy^2) / 2.

    For a field produced by a Poisson solve, `lap` is the right-hand side
    it was solved with, so this evaluation is consistent with the discrete
    Laplacian to machine precision.
    """
    return 0.5 * (np.asarray(lap) ** 2 - hess.squared_sum())


def inner_solve(mesh: TriMesh, system: PoissonSystem, hess_op: WeakHessian,
                u_k, hess_k: HessianField, rayleigh_k: float,
                cfg: SolverConfig, xi_k: float | None) -> InnerResult:
    """Fixed-point Poisson iteration for one Monge-Ampere subproblem.

    Starts from the outer iterate and breaks on the determinant residual:
    inexact mode uses the discrete L3 norm against `xi_k`, exact mode the
    relative eta2 criterion against ``cfg.tol_eta2``.  Raises
    :class:`InnerStall` when ``cfg.max_inner`` passes are exhausted.
    """
    if rayleigh_k <= 0:
        raise SolverError(f"Rayleigh quotient {rayleigh_k} is not positive")
    if cfg.mode == INEXACT and (xi_k is None or xi_k <= 0):
        raise SolverError("inexact mode needs a positive xi_k")
    areas = mesh.patch_areas
    source = rayleigh_k * np.asarray(u_k) ** 2
    eta2_den = 1.0 + rayleigh_k * discrete_norm(u_k, areas, 2.0) ** 2

    hess = hess_k
    best = np.inf
    for n in range(cfg.max_inner):
        g = fixed_point_rhs(hess, source)
        u_next = solve_poisson(system, g)
        hess = hess_op(u_next)
        det_residual = laplacian_determinant(g, hess) - source
        if cfg.mode == INEXACT:
            resid = discrete_norm(det_residual, areas, 3.0)
            accepted = resid <= xi_k
        else:
            resid = discrete_norm(det_residual, areas, 2.0) / eta2_den
            accepted = resid < cfg.tol_eta2
        best = min(best, resid)
        if accepted:
            return InnerResult(u_next, g, hess, n + 1, resid)
    raise InnerStall(
        f"no break after {cfg.max_inner} Poisson solves (best residual {best:.3e})")


def solve_on_mesh(mesh: TriMesh, system: PoissonSystem, cfg: SolverConfig):
    """Run the eigensolve on a prebuilt mesh/system pair.

    Returns ``(lambda_h, u_h, report)`` where `u_h` is normalized to unit
    discrete L2 norm, is nonpositive everywhere and carries bit-exact
    zeros on the boundary.
    """
    t_start = time.perf_counter()
    areas = mesh.patch_areas
    report = SolverReport(domain=cfg.domain.kind, h=cfg.h, mode=cfg.mode, seed=cfg.seed,
                          n_vertices=mesh.n_vertices, n_triangles=mesh.n_triangles,
                          stiffness_nnz=system.nnz, factor_ms=system.factor_ms)

    hess_op = WeakHessian(mesh)
    u = initial_guess(mesh, system, cfg.eta_init)
    lap = np.full(mesh.n_vertices, float(cfg.eta_init))
    hess = hess_op(u)
    poisson = 1
    t_prev = t_start

    for k in range(cfg.max_outer + 1):
        det = laplacian_determinant(lap, hess)
        lam = rayleigh_quotient(u, det, areas)
        eta1 = residual_eta(det, u, lam, areas)
        norm = discrete_norm(u, areas, 2.0)
        if eta1 < cfg.tol_outer:
            now = time.perf_counter()
            report.iterations.append(IterationRecord(k, lam, eta1, 0, poisson,
                                                     1e3 * (now - t_prev), norm))
            u_out = u / norm
            report.lambda_h = lam
            report.min_u = float(u_out.min())
            report.eta1_final = eta1
            report.outer_iters = k
            report.total_poisson = poisson
            report.converged = True
            report.wall_ms = 1e3 * (now - t_start)
            log.info("converged: domain=%s h=%g mode=%s k=%d lambda=%.9f poisson=%d",
                     cfg.domain.kind, cfg.h, cfg.mode, k, lam, poisson)
            return lam, u_out, report
        if k == cfg.max_outer:
            break
        xi_k = xi_threshold(k, eta1, cfg) if cfg.mode == INEXACT else None
        result = inner_solve(mesh, system, hess_op, u, hess, lam, cfg, xi_k)
        poisson += result.poisson_solves
        now = time.perf_counter()
        report.iterations.append(IterationRecord(k, lam, eta1, result.poisson_solves,
                                                 poisson, 1e3 * (now - t_prev), norm))
        t_prev = now
        log.debug("k=%d lambda=%.9f eta1=%.3e inner=%d poisson=%d",
                  k, lam, eta1, result.poisson_solves, poisson)
        u, lap, hess = result.u, result.laplacian, result.hessian

    raise OuterStall(f"eta1 still {eta1:.3e} after {cfg.max_outer} outer iterations")


def solve_eigenproblem(cfg: SolverConfig):
    """Mesh the domain, assemble the Poisson system and run the eigensolve."""
    mesh = generate_mesh(cfg.domain, cfg.h, cfg.seed)
    system = assemble_system(mesh)
    return solve_on_mesh(mesh, system, cfg)
