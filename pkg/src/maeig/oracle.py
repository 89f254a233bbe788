"""High-accuracy radial reference on the unit disk via a shooting method.

On the disk the eigenproblem reduces to the boundary value problem
v' v'' = lambda r v^2 on (0, 1) with v'(0) = 0, v(1) = 0 and the
normalization 2 pi int_0^1 v^2 r dr = 1.  The problem is 2-homogeneous in
v, so the center value can be fixed at v(0) = -1 and only lambda shot for;
the profile is rescaled afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .fem import element_gradients
from .mesh import TriMesh, discrete_norm

_EPS_START = 1e-4  # series start, resolves the p(0) = 0 singularity


class BlowUp(Exception):
    """The radial slope lost positivity during integration."""


class NoBracket(Exception):
    """v(1; lambda) does not change sign over the shooting bracket."""


@dataclass(frozen=True)
class RadialSolution:
    """Radial profile v(r) with its derivative, eigenvalue and applied scale."""

    r_grid: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    lam: float
    scale: float = 1.0

    def weighted_l2(self) -> float:
        """sqrt(2 pi int v^2 r dr), composite Simpson on the grid."""
        return float(np.sqrt(2.0 * np.pi * simpson(self.v**2 * self.r_grid, x=self.r_grid)))


def integrate_radial(lam: float, v0: float, n_steps: int = 10000) -> RadialSolution:
    """Integrate v' = p, p' = lambda r v^2 / p from the series start to r = 1.

    Classical 4th-order one-step integration on a uniform grid; the first
    grid points up to r ~ 1e-4 come from the leading-order series
    v = v0 + (sqrt(lam) |v0| / 2) r^2, p = sqrt(lam) |v0| r.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if v0 >= 0:
        raise ValueError("v0 must be negative")
    if n_steps < 1000:
        raise ValueError("n_steps must be at least 1000")
    r = np.linspace(0.0, 1.0, n_steps + 1)
    dr = 1.0 / n_steps
    i0 = max(1, int(np.ceil(_EPS_START / dr - 1e-12)))

    a = np.sqrt(lam) * abs(v0)
    v = np.empty_like(r)
    p = np.empty_like(r)
    v[: i0 + 1] = v0 + 0.5 * a * r[: i0 + 1] ** 2
    p[: i0 + 1] = a * r[: i0 + 1]

    def rhs(ri, vi, pi):
        if pi <= 0.0:
            raise BlowUp(f"slope reached {pi} at r={ri}")
        return pi, lam * ri * vi**2 / pi

    for i in range(i0, n_steps):
        ri, vi, pi = r[i], v[i], p[i]
        k1v, k1p = rhs(ri, vi, pi)
        k2v, k2p = rhs(ri + 0.5 * dr, vi + 0.5 * dr * k1v, pi + 0.5 * dr * k1p)
        k3v, k3p = rhs(ri + 0.5 * dr, vi + 0.5 * dr * k2v, pi + 0.5 * dr * k2p)
        k4v, k4p = rhs(ri + dr, vi + dr * k3v, pi + dr * k3p)
        v[i + 1] = vi + dr / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        p[i + 1] = pi + dr / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
        if p[i + 1] <= 0.0:
            raise BlowUp(f"slope reached {p[i + 1]} at r={r[i + 1]}")
    return RadialSolution(r_grid=r, v=v, dv=p, lam=lam)


def shoot_lambda(tol: float = 1e-10, v0: float = -1.0, n_steps: int = 10000,
                 bracket=(1.0, 50.0)) -> float:
    """Root of lambda -> v(1; lambda) with v(0) = v0 fixed."""
    if tol < 1e-12:
        raise ValueError("tol below the integrator resolution")

    def end_value(lam):
        return integrate_radial(lam, v0, n_steps).v[-1]

    lo, hi = bracket
    if np.sign(end_value(lo)) == np.sign(end_value(hi)):
        raise NoBracket(f"v(1) does not change sign over {bracket}")
    lam = brentq(end_value, lo, hi, xtol=1e-13, rtol=8.9e-16)
    if abs(end_value(lam)) > tol:
        raise NoBracket(f"residual |v(1)|={abs(end_value(lam)):.3e} above tol={tol}")
    return float(lam)


def normalized_profile(sol: RadialSolution) -> RadialSolution:
    """Rescale so that 2 pi int v^2 r dr = 1; the eigenvalue is unchanged."""
    s = 1.0 / sol.weighted_l2()
    return replace(sol, v=s * sol.v, dv=s * sol.dv, scale=s * sol.scale)


def disk_reference(tol: float = 1e-10, n_steps: int = 10000) -> RadialSolution:
    """Shoot for the disk eigenvalue and return the normalized profile."""
    lam = shoot_lambda(tol, n_steps=n_steps)
    return normalized_profile(integrate_radial(lam, -1.0, n_steps))


def error_norms(mesh: TriMesh, u_h, sol: RadialSolution):
    """L2 and H1 errors of a nodal disk field against the radial reference.

    The reference v(r) is cubic-interpolated at the mesh vertices and
    rescaled to unit discrete L2 norm, the same normalization the solver
    applies to its output, so that the comparison is scale-consistent.
    The L2 error is the discrete norm of the nodal difference; the H1
    seminorm applies the elementwise P1 gradient to that difference field.
    Returns ``(l2, sqrt(l2^2 + seminorm^2))``.
    """
    u_h = np.asarray(u_h, dtype=float)
    spline = CubicSpline(sol.r_grid, sol.v)
    r = np.minimum(np.hypot(mesh.vertices[:, 0], mesh.vertices[:, 1]), 1.0)
    v_h = spline(r)
    v_h = v_h / discrete_norm(v_h, mesh.patch_areas, 2.0)

    err = u_h / discrete_norm(u_h, mesh.patch_areas, 2.0) - v_h
    l2 = discrete_norm(err, mesh.patch_areas, 2.0)
    grad_err = element_gradients(mesh, err)
    semi_sq = np.sum(mesh.tri_areas * np.sum(grad_err**2, axis=1))
    return float(l2), float(np.sqrt(l2**2 + semi_sq))
