"""P1 Lagrange finite elements: stiffness assembly and zero-Dirichlet Poisson solves.

The stiffness matrix is assembled once per mesh over the interior
unknowns and LU-factorized; the factorization is reused for every Poisson
solve on that mesh.  Loads are mass-lumped with the vertex patch weights
|omega_v|/3 so that all nodal fields share one quadrature convention.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .mesh import TriMesh


class SingularSystem(Exception):
    """The interior stiffness matrix could not be factorized."""


@dataclass
class PoissonSystem:
    """Assembled interior stiffness with a reusable LU factorization."""

    interior_index_map: np.ndarray   # vertex index -> interior unknown index, or -1
    interior_vertices: np.ndarray
    stiffness: sparse.csc_matrix     # integral grad(phi_i) . grad(phi_j), interior block
    factorization: object            # SuperLU handle
    mesh_ref: TriMesh
    nnz: int = 0
    factor_ms: float = 0.0


def _shape_coefficients(mesh: TriMesh):
    # P1 gradients: grad(phi_m) = (b_m, c_m) / (2 A) on each triangle
    p = mesh.vertices[mesh.triangles]
    x, y = p[:, :, 0], p[:, :, 1]
    b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    return b, c


def assemble_system(mesh: TriMesh) -> PoissonSystem:
    """Assemble and factorize the interior P1 stiffness matrix."""
    nv = mesh.n_vertices
    interior = np.flatnonzero(mesh.interior_mask)
    if len(interior) == 0:
        raise SingularSystem("mesh has no interior vertices")
    index_map = np.full(nv, -1, dtype=int)
    index_map[interior] = np.arange(len(interior))

    b, c = _shape_coefficients(mesh)
    inv4a = 1.0 / (4.0 * mesh.tri_areas)
    ke = (b[:, :, None] * b[:, None, :] + c[:, :, None] * c[:, None, :]) * inv4a[:, None, None]

    rows = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cols = np.tile(mesh.triangles, (1, 3)).ravel()
    vals = ke.ravel()
    ri, ci = index_map[rows], index_map[cols]
    keep = (ri >= 0) & (ci >= 0)
    k = sparse.coo_matrix((vals[keep], (ri[keep], ci[keep])),
                          shape=(len(interior), len(interior))).tocsc()

    t0 = time.perf_counter()
    try:
        lu = splu(k)
    except RuntimeError as exc:
        raise SingularSystem(f"LU factorization failed: {exc}") from exc
    factor_ms = 1e3 * (time.perf_counter() - t0)
    return PoissonSystem(index_map, interior, k, lu, mesh, nnz=k.nnz, factor_ms=factor_ms)


def solve_poisson(system: PoissonSystem, source) -> np.ndarray:
    """Nodal solution of ``laplacian(u) = source`` with u = 0 on the boundary.

    The load is mass-lumped, b_v = (|omega_v|/3) * source_v; boundary
    entries of the result are exactly zero.
    """
    mesh = system.mesh_ref
    rhs = (mesh.patch_areas / 3.0) * np.asarray(source, dtype=float)
    u = np.zeros(mesh.n_vertices)
    # stiffness is integral grad.grad, so laplacian(u) = f reads K u = -b
    u[system.interior_vertices] = system.factorization.solve(-rhs[system.interior_vertices])
    return u


def element_gradients(mesh: TriMesh, field) -> np.ndarray:
    """Exact gradient of the P1 interpolant on each triangle, shape (nt, 2)."""
    f = np.asarray(field, dtype=float)[mesh.triangles]
    f = f - f.mean(axis=1, keepdims=True)  # tame cancellation for large offsets
    b, c = _shape_coefficients(mesh)
    inv2a = 1.0 / (2.0 * mesh.tri_areas)
    return np.stack([(f * b).sum(axis=1) * inv2a, (f * c).sum(axis=1) * inv2a], axis=1)
