"""Nodal gradient and Hessian recovery from piecewise-linear fields.

Two discrete Hessians live here.  :func:`recover_hessian` averages
elementwise P1 gradients onto vertices with incident-triangle area
weights, twice; it is exact for quadratics on centrally symmetric patches
and keeps one-sided values at the boundary.  :class:`WeakHessian` instead
tests second derivatives against the hat functions and integrates by
parts, dividing by the lumped vertex measure; it is a strictly local
one-ring operator whose trace matches the lumped finite-element Laplacian
identically at interior vertices, which is what the eigensolver's
fixed-point loop needs to close its residuals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .fem import _shape_coefficients, element_gradients
from .mesh import TriMesh


@dataclass(frozen=True)
class HessianField:
    """Recovered nodal second derivatives (the mixed one stored once)."""

    uxx: np.ndarray
    uxy: np.ndarray
    uyy: np.ndarray

    def squared_sum(self) -> np.ndarray:
        """uxx^2 + uyy^2 + 2 uxy^2, the Frobenius-type term of the fixed-point map."""
        return self.uxx**2 + self.uyy**2 + 2.0 * self.uxy**2


def recover_gradient(mesh: TriMesh, field) -> np.ndarray:
    """Area-weighted average of incident triangle gradients, shape (nv, 2)."""
    gt = element_gradients(mesh, field)
    w = mesh.tri_areas
    num = np.zeros((mesh.n_vertices, 2))
    for k in range(3):
        idx = mesh.triangles[:, k]
        num[:, 0] += np.bincount(idx, weights=w * gt[:, 0], minlength=mesh.n_vertices)
        num[:, 1] += np.bincount(idx, weights=w * gt[:, 1], minlength=mesh.n_vertices)
    return num / mesh.patch_areas[:, None]


def recover_hessian(mesh: TriMesh, field) -> HessianField:
    """Double gradient recovery with symmetrized mixed derivative."""
    g = recover_gradient(mesh, field)
    dgx = recover_gradient(mesh, g[:, 0])
    dgy = recover_gradient(mesh, g[:, 1])
    return HessianField(uxx=dgx[:, 0],
                        uxy=0.5 * (dgy[:, 0] + dgx[:, 1]),
                        uyy=dgy[:, 1])


def hessian_determinant(hess: HessianField) -> np.ndarray:
    """Nodal determinant uxx * uyy - uxy^2."""
    return hess.uxx * hess.uyy - hess.uxy**2


class WeakHessian:
    """Integration-by-parts nodal second derivatives on one mesh.

    Row v of each operator evaluates -int u_a (phi_v)_b dx / (|omega_v|/3),
    the weak u_ab tested against the hat function of v under lumped
    quadrature.  The mixed derivative is symmetrized.  Since the x- and
    y-operators sum to the stiffness matrix, uxx + uyy reproduces the
    lumped finite-element Laplacian exactly at interior vertices; the
    components are exact for quadratics on centrally symmetric patches.
    Boundary rows drop the boundary flux of the integration by parts and
    are therefore inconsistent; they are zeroed, which is harmless because
    the eigen-equation forces the determinant to vanish on the boundary
    anyway and every use multiplies them by the zero boundary values.
    """

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh
        b, c = _shape_coefficients(mesh)
        inv4a = 1.0 / (4.0 * mesh.tri_areas)
        nv = mesh.n_vertices
        rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
        cols = np.tile(mesh.triangles, (1, 3)).ravel()

        def build(da, db):
            vals = (da[:, :, None] * db[:, None, :]) * inv4a[:, None, None]
            return sparse.coo_matrix((vals.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()

        self._kxx = build(b, b)
        self._kyy = build(c, c)
        kxy = build(b, c)
        self._ksym = (0.5 * (kxy + kxy.T)).tocsr()
        self._weights = mesh.patch_areas / 3.0
        self._boundary = mesh.boundary_mask

    def __call__(self, field) -> HessianField:
        u = np.asarray(field, dtype=float)
        uxx = -(self._kxx @ u) / self._weights
        uxy = -(self._ksym @ u) / self._weights
        uyy = -(self._kyy @ u) / self._weights
        for comp in (uxx, uxy, uyy):
            comp[self._boundary] = 0.0
        return HessianField(uxx, uxy, uyy)
