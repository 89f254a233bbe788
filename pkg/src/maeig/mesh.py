"""Quasi-uniform triangulation by force-based relaxation, plus discrete norms.

The generator follows the classic signed-distance meshing recipe: seed a
hexagonal point lattice over the bounding box, keep points inside the
domain, then relax them as a truss with repulsive-only bar forces,
retriangulating by Delaunay whenever points have moved far enough.
Escaped points are pulled back to the zero level set each step.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay

from .geometry import DomainSpec, sd_gradient, signed_distance

# classic relaxation constants
_DPTOL = 1e-3     # terminate when interior points move less than dptol*h
_TTOL = 0.1       # retriangulate when any point moved more than ttol*h
_FSCALE = 1.2     # rest-length inflation of the bar forces
_DELTAT = 0.2     # pseudo-time step
_MAX_STEPS = 2000
_JITTER = 0.1     # initial lattice jitter, in units of h


class MeshError(Exception):
    """Base class for meshing failures."""


class NonConvergence(MeshError):
    """Force relaxation failed to reach the movement tolerance."""


class DegenerateMesh(MeshError):
    """A triangle collapsed below the area threshold."""


@dataclass(frozen=True)
class TriMesh:
    """An oriented conforming triangulation of one domain.

    Attributes
    ----------
    vertices : (nv, 2) float array
    triangles : (nt, 3) int array
        Vertex index triples, counterclockwise.
    boundary_mask : (nv,) bool array
        True for vertices on the domain boundary.
    h_target : float
        Requested edge length.
    patch_areas : (nv,) float array
        Area of the union of triangles incident to each vertex.
    tri_areas : (nt,) float array
        Signed (positive) triangle areas.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_mask: np.ndarray
    h_target: float
    patch_areas: np.ndarray
    tri_areas: np.ndarray

    def __post_init__(self):
        for arr in (self.vertices, self.triangles, self.boundary_mask,
                    self.patch_areas, self.tri_areas):
            arr.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def interior_mask(self) -> np.ndarray:
        return ~self.boundary_mask

    @property
    def area(self) -> float:
        return float(self.tri_areas.sum())


def triangle_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Signed areas of the triangles (positive when counterclockwise)."""
    p = vertices[triangles]
    return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                  - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))


def patch_areas(mesh: TriMesh) -> np.ndarray:
    """|omega_v|: the area of the union of triangles incident to each vertex."""
    return _patch_areas(mesh.triangles, mesh.tri_areas, mesh.n_vertices)


def _patch_areas(triangles, areas, nv):
    out = np.zeros(nv)
    for k in range(3):
        out += np.bincount(triangles[:, k], weights=areas, minlength=nv)
    return out


def discrete_norm(field, areas, p: float = 2.0) -> float:
    """Vertex-quadrature norm ((1/3) sum_v |omega_v| |f_v|^p)^(1/p)."""
    f = np.abs(np.asarray(field, dtype=float))
    return float((np.sum(np.asarray(areas) * f**p) / 3.0) ** (1.0 / p))


def unique_edges(triangles: np.ndarray):
    """All mesh edges as sorted vertex pairs, with their triangle counts."""
    e = np.vstack([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    e = np.sort(e, axis=1)
    return np.unique(e, axis=0, return_counts=True)


def _interior_triangulation(domain, points, geps):
    tri = Delaunay(points).simplices
    centroids = points[tri].mean(axis=1)
    tri = tri[signed_distance(domain, centroids) < -geps]
    # orient counterclockwise
    a = triangle_areas(points, tri)
    flip = a < 0
    tri[flip] = tri[flip][:, [0, 2, 1]]
    return tri


def _hex_lattice(bbox, h):
    xmin, xmax, ymin, ymax = bbox
    x = np.arange(xmin, xmax + 0.5 * h, h)
    y = np.arange(ymin, ymax + 0.5 * h * np.sqrt(3.0) / 2.0, h * np.sqrt(3.0) / 2.0)
    X, Y = np.meshgrid(x, y)
    X[1::2] += h / 2.0  # shift every other row
    return np.column_stack([X.ravel(), Y.ravel()])


def generate_mesh(domain: DomainSpec, h: float, seed: int = 0) -> TriMesh:
    """Triangulate `domain` with target edge length `h`.

    Deterministic for fixed ``(domain, h, seed)``; the seed only perturbs
    the initial lattice.  Fixed points of the domain are kept verbatim as
    mesh vertices.  Raises :class:`NonConvergence` if the relaxation does
    not settle within the step cap and :class:`DegenerateMesh` if a sliver
    survives the final retriangulation.
    """
    if not (1e-3 <= h <= 0.5):
        raise ValueError(f"h={h} outside the supported range [1e-3, 0.5]")
    geps = 1e-3 * h
    deps = 1e-6 * domain.diameter
    rng = np.random.default_rng(seed)

    p = _hex_lattice(domain.bounding_box, h)
    p = p[signed_distance(domain, p) < geps]
    pfix = np.asarray(domain.fixed_points, dtype=float).reshape(-1, 2)
    nfix = len(pfix)
    if nfix:
        keep = np.ones(len(p), dtype=bool)
        for q in pfix:
            keep &= np.hypot(p[:, 0] - q[0], p[:, 1] - q[1]) > 1e-9
        p = p[keep]
    p += _JITTER * h * (rng.random(p.shape) - 0.5)
    p = np.vstack([pfix, p])

    pold = None
    tri = edges = None
    for _ in range(_MAX_STEPS):
        if pold is None or np.max(np.hypot(*(p - pold).T)) / h > _TTOL:
            pold = p.copy()
            tri = _interior_triangulation(domain, p, geps)
            edges, _ = unique_edges(tri)
        bar = p[edges[:, 0]] - p[edges[:, 1]]
        L = np.hypot(bar[:, 0], bar[:, 1])
        L0 = _FSCALE * np.sqrt(np.sum(L**2) / len(L))
        F = np.maximum(L0 - L, 0.0)
        fvec = (F / L)[:, None] * bar
        ftot = np.zeros_like(p)
        np.add.at(ftot, edges[:, 0], fvec)
        np.add.at(ftot, edges[:, 1], -fvec)
        ftot[:nfix] = 0.0
        p = p + _DELTAT * ftot

        d = signed_distance(domain, p)
        escaped = d > 0
        escaped[:nfix] = False
        if np.any(escaped):
            g = sd_gradient(domain, p[escaped], deps)
            p[escaped] -= d[escaped, None] * g / np.sum(g**2, axis=1)[:, None]
            d = signed_distance(domain, p)

        interior = d < -geps
        moved = _DELTAT * np.hypot(ftot[:, 0], ftot[:, 1])
        if not np.any(interior) or np.max(moved[interior]) / h < _DPTOL:
            break
    else:
        raise NonConvergence(
            f"relaxation did not settle in {_MAX_STEPS} steps (domain={domain.kind}, h={h})")

    tri = _interior_triangulation(domain, p, geps)
    used = np.unique(tri)
    remap = np.full(len(p), -1, dtype=int)
    remap[used] = np.arange(len(used))
    p = p[used]
    tri = remap[tri]
    fixed_idx = remap[:nfix]
    if nfix and np.any(fixed_idx < 0):
        raise DegenerateMesh("a fixed point lost all incident triangles")

    edges, counts = unique_edges(tri)
    boundary = np.zeros(len(p), dtype=bool)
    boundary[np.unique(edges[counts == 1])] = True

    # snap boundary vertices onto the zero level set (fixed points stay verbatim)
    snap = boundary.copy()
    snap[fixed_idx] = False
    for _ in range(20 if snap.any() else 0):
        d = signed_distance(domain, p[snap])
        if np.max(np.abs(d)) < 1e-12 * domain.diameter:
            break
        g = sd_gradient(domain, p[snap], deps)
        p[snap] -= d[:, None] * g / np.sum(g**2, axis=1)[:, None]

    areas = triangle_areas(p, tri)
    flip = areas < 0
    tri[flip] = tri[flip][:, [0, 2, 1]]
    areas = np.abs(areas)
    if np.any(areas < 1e-14):
        raise DegenerateMesh(
            f"{int(np.sum(areas < 1e-14))} triangles below the area threshold")

    return TriMesh(
        vertices=p,
        triangles=tri,
        boundary_mask=boundary,
        h_target=float(h),
        patch_areas=_patch_areas(tri, areas, len(p)),
        tri_areas=areas,
    )


MESH_HEADER = ("# maeig mesh: line2 = <nv> <nt> <h>; then nv vertex lines "
               "<index> <x> <y> <boundary 0|1>; then nt triangle lines <i> <j> <k>")


def format_mesh_text(mesh: TriMesh) -> str:
    """Serialize a mesh in the documented plain-text block format."""
    out = io.StringIO()
    out.write(MESH_HEADER + "\n")
    out.write(f"{mesh.n_vertices} {mesh.n_triangles} {mesh.h_target:.12g}\n")
    for i, (x, y) in enumerate(mesh.vertices):
        out.write(f"{i} {x:.12g} {y:.12g} {int(mesh.boundary_mask[i])}\n")
    for i, j, k in mesh.triangles:
        out.write(f"{i} {j} {k}\n")
    return out.getvalue()


def parse_mesh_text(text: str) -> TriMesh:
    """Inverse of :func:`format_mesh_text`."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    nv, nt, h = lines[0].split()
    nv, nt, h = int(nv), int(nt), float(h)
    verts = np.empty((nv, 2))
    boundary = np.empty(nv, dtype=bool)
    for ln in lines[1:1 + nv]:
        i, x, y, b = ln.split()
        verts[int(i)] = (float(x), float(y))
        boundary[int(i)] = bool(int(b))
    tri = np.array([[int(t) for t in ln.split()] for ln in lines[1 + nv:1 + nv + nt]])
    areas = np.abs(triangle_areas(verts, tri))
    return TriMesh(verts, tri, boundary, h, _patch_areas(tri, areas, nv), areas)
