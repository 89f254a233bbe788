import numpy as np
import pytest

from maeig.eigensolver import EXACT, INEXACT, SolverConfig, solve_on_mesh
from maeig.fem import assemble_system
from maeig.geometry import domain_from_token
from maeig.mesh import TriMesh, _patch_areas, generate_mesh, triangle_areas
from maeig.oracle import disk_reference


def make_trimesh(vertices, triangles, boundary, h=1.0):
    """Assemble a TriMesh from raw arrays (for small hand-built meshes)."""
    vertices = np.asarray(vertices, dtype=float)
    triangles = np.asarray(triangles, dtype=int)
    areas = triangle_areas(vertices, triangles)
    flip = areas < 0
    triangles = triangles.copy()
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    areas = np.abs(areas)
    return TriMesh(vertices, triangles, np.asarray(boundary, dtype=bool), h,
                   _patch_areas(triangles, areas, len(vertices)), areas)


def structured_square_mesh(n):
    """Right-triangle mesh of the unit square, all diagonals parallel.

    Interior vertices away from the boundary have centrally symmetric
    patches, where gradient recovery is exact for quadratics.
    """
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs)
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    tris = []
    for r in range(n):
        for c in range(n):
            v00 = r * (n + 1) + c
            v10 = v00 + 1
            v01 = v00 + n + 1
            v11 = v01 + 1
            tris.append([v00, v10, v11])
            tris.append([v00, v11, v01])
    boundary = ((vertices[:, 0] == 0) | (vertices[:, 0] == 1)
                | (vertices[:, 1] == 0) | (vertices[:, 1] == 1))
    return make_trimesh(vertices, np.array(tris), boundary, h=1.0 / n)


def hexagon_patch_mesh(center=(0.0, 0.0), radius=1.0):
    """One interior vertex surrounded by six equilateral triangles."""
    cx, cy = center
    ang = np.arange(6) * np.pi / 3.0
    ring = np.column_stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang)])
    vertices = np.vstack([[cx, cy], ring])
    tris = [[0, 1 + i, 1 + (i + 1) % 6] for i in range(6)]
    boundary = np.array([False] + [True] * 6)
    return make_trimesh(vertices, tris, boundary, h=radius)


DOMAINS = ("disk", "ellipse", "smoothsq", "square")


@pytest.fixture(scope="session")
def domains():
    return {tok: domain_from_token(tok) for tok in DOMAINS}


@pytest.fixture(scope="session")
def meshes_20(domains):
    return {tok: generate_mesh(domains[tok], 1 / 20, seed=0) for tok in DOMAINS}


@pytest.fixture(scope="session")
def meshes_40(domains):
    return {tok: generate_mesh(domains[tok], 1 / 40, seed=0) for tok in DOMAINS}


@pytest.fixture(scope="session")
def disk_mesh_20(meshes_20):
    return meshes_20["disk"]


@pytest.fixture(scope="session")
def disk_mesh_40(meshes_40):
    return meshes_40["disk"]


@pytest.fixture(scope="session")
def disk_system_20(disk_mesh_20):
    return assemble_system(disk_mesh_20)


@pytest.fixture(scope="session")
def disk_system_40(disk_mesh_40):
    return assemble_system(disk_mesh_40)


@pytest.fixture(scope="session")
def disk_solve_40(domains, disk_mesh_40, disk_system_40):
    cfg = SolverConfig(domain=domains["disk"], h=1 / 40, mode=INEXACT)
    return solve_on_mesh(disk_mesh_40, disk_system_40, cfg)


@pytest.fixture(scope="session")
def disk_solve_40_exact(domains, disk_mesh_40, disk_system_40):
    cfg = SolverConfig(domain=domains["disk"], h=1 / 40, mode=EXACT)
    return solve_on_mesh(disk_mesh_40, disk_system_40, cfg)


@pytest.fixture(scope="session")
def disk_solve_20(domains, disk_mesh_20, disk_system_20):
    cfg = SolverConfig(domain=domains["disk"], h=1 / 20, mode=INEXACT)
    return solve_on_mesh(disk_mesh_20, disk_system_20, cfg)


@pytest.fixture(scope="session")
def radial_ref():
    return disk_reference()
