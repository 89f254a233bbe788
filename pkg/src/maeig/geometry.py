"""Signed-distance descriptions of the four benchmark domains.

Each domain is a convex region given by a level-set function that is
negative inside, zero on the boundary and positive outside.  The disk and
the square use exact signed distances; the ellipse and the smoothed square
use approximate level-set normalizations, which is all a force-based
mesher needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

DISK = "disk"
ELLIPSE = "ellipse"
SMOOTHSQ = "smoothsq"
SQUARE = "square"

DOMAIN_TOKENS = (DISK, ELLIPSE, SMOOTHSQ, SQUARE)


@dataclass(frozen=True)
class DomainSpec:
    """A convex test domain with the metadata the mesher and harness need.

    Attributes
    ----------
    kind : str
        One of ``disk``, ``ellipse``, ``smoothsq``, ``square``.
    bounding_box : tuple
        ``(xmin, xmax, ymin, ymax)`` containing the zero level set.
    fixed_points : tuple
        Corner points pinned during meshing (nonempty only for the square).
    analytic_area : float
        The exact area of the domain (numerically computed once for the
        smoothed square).
    """

    kind: str
    bounding_box: tuple
    fixed_points: tuple
    analytic_area: float

    @property
    def diameter(self) -> float:
        """Diagonal of the bounding box, used as the length scale for tolerances."""
        xmin, xmax, ymin, ymax = self.bounding_box
        return math.hypot(xmax - xmin, ymax - ymin)


@lru_cache(maxsize=None)
def _smoothsq_area() -> float:
    # 4 * int_0^1 (1 - x^3)^(1/3) dx, adaptive quadrature to ~1e-10
    val, _ = quad(lambda x: (1.0 - x**3) ** (1.0 / 3.0), 0.0, 1.0,
                  epsabs=1e-12, epsrel=1e-10)
    return 4.0 * val


@lru_cache(maxsize=None)
def domain_from_token(token: str) -> DomainSpec:
    """Build the :class:`DomainSpec` for a CLI domain token."""
    if token == DISK:
        return DomainSpec(DISK, (-1.0, 1.0, -1.0, 1.0), (), math.pi)
    if token == ELLIPSE:
        b = 1.0 / math.sqrt(2.0)
        return DomainSpec(ELLIPSE, (-1.0, 1.0, -b, b), (), math.pi / math.sqrt(2.0))
    if token == SMOOTHSQ:
        return DomainSpec(SMOOTHSQ, (-1.0, 1.0, -1.0, 1.0), (), _smoothsq_area())
    if token == SQUARE:
        corners = ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0))
        return DomainSpec(SQUARE, (0.0, 1.0, 0.0, 1.0), corners, 1.0)
    raise ValueError(f"unknown domain token {token!r}; expected one of {DOMAIN_TOKENS}")


def _box_distance(x, y, xmin, xmax, ymin, ymax):
    # exact signed distance to an axis-aligned box
    cx, cy = 0.5 * (xmin + xmax), 0.5 * (ymin + ymax)
    hx, hy = 0.5 * (xmax - xmin), 0.5 * (ymax - ymin)
    qx = np.abs(x - cx) - hx
    qy = np.abs(y - cy) - hy
    outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
    inside = np.minimum(np.maximum(qx, qy), 0.0)
    return outside + inside


def signed_distance(domain: DomainSpec, points) -> np.ndarray:
    """Signed distance (or level-set value) of `points` to the boundary.

    Exact for the disk and the square; approximate level-set forms
    ``sqrt(x^2 + 2 y^2) - 1`` and ``(|x|^3 + |y|^3)^(1/3) - 1`` for the
    ellipse and the smoothed square.  Accepts a single ``(x, y)`` pair or
    an ``(n, 2)`` array; returns a scalar or an ``(n,)`` array accordingly.
    """
    p = np.asarray(points, dtype=float)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    x, y = p[:, 0], p[:, 1]
    if domain.kind == DISK:
        d = np.hypot(x, y) - 1.0
    elif domain.kind == ELLIPSE:
        d = np.sqrt(x**2 + 2.0 * y**2) - 1.0
    elif domain.kind == SMOOTHSQ:
        d = np.cbrt(np.abs(x) ** 3 + np.abs(y) ** 3) - 1.0
    elif domain.kind == SQUARE:
        d = _box_distance(x, y, *domain.bounding_box)
    else:  # pragma: no cover
        raise ValueError(f"unknown domain kind {domain.kind!r}")
    return float(d[0]) if single else d


def sd_gradient(domain: DomainSpec, points: np.ndarray, step: float) -> np.ndarray:
    """Centered finite-difference gradient of the signed distance, shape (n, 2)."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    ex = np.array([step, 0.0])
    ey = np.array([0.0, step])
    gx = (signed_distance(domain, p + ex) - signed_distance(domain, p - ex)) / (2.0 * step)
    gy = (signed_distance(domain, p + ey) - signed_distance(domain, p - ey)) / (2.0 * step)
    return np.column_stack([gx, gy])


def reference_area(domain: DomainSpec) -> float:
    """The area of the domain, |Omega|."""
    return domain.analytic_area


def boundary_points(domain: DomainSpec, n: int) -> np.ndarray:
    """`n` points exactly on the zero level set, for sampling tests."""
    t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    if domain.kind == DISK:
        return np.column_stack([np.cos(t), np.sin(t)])
    if domain.kind == ELLIPSE:
        return np.column_stack([np.cos(t), np.sin(t) / np.sqrt(2.0)])
    if domain.kind == SMOOTHSQ:
        c, s = np.cos(t), np.sin(t)
        x = np.sign(c) * np.abs(c) ** (2.0 / 3.0)
        y = np.sign(s) * np.abs(s) ** (2.0 / 3.0)
        return np.column_stack([x, y])
    if domain.kind == SQUARE:
        # walk the perimeter at equal arc length
        s = np.linspace(0.0, 4.0, n, endpoint=False)
        x = np.empty(n)
        y = np.empty(n)
        side = np.floor(s).astype(int)
        frac = s - side
        x[side == 0], y[side == 0] = frac[side == 0], 0.0
        x[side == 1], y[side == 1] = 1.0, frac[side == 1]
        x[side == 2], y[side == 2] = 1.0 - frac[side == 2], 1.0
        x[side == 3], y[side == 3] = 0.0, 1.0 - frac[side == 3]
        return np.column_stack([x, y])
    raise ValueError(f"unknown domain kind {domain.kind!r}")
