"""Fixed-size Bezier primitives produced by decomposition.

Segments live on [0, 1], rectangles on [0, 1]^2, triangles on the unit
triangle {u >= 0, v >= 0, u + v <= 1}. Triangle control points are stored
flat in (i, j)-lexicographic order for the index set {i + j <= d}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import ArgumentError, DegeneracyError, DomainError
from .geometry import as_homogeneous_array, bernstein_all

DOMAIN_ATOL = 1e-12


@lru_cache(maxsize=None)
def triangle_indices(degree):
    """(i, j) index pairs with i + j <= degree, in lexicographic order."""
    return tuple((i, j) for i in range(degree + 1) for j in range(degree + 1 - i))


def triangle_point_count(degree):
    return (degree + 1) * (degree + 2) // 2


def bivariate_bernstein(i, j, d, u, v):
    """Triangle Bernstein basis d!/(i! j! (d-i-j)!) u^i v^j t^(d-i-j), t = 1-u-v."""
    if i < 0 or j < 0 or i + j > d:
        raise ArgumentError(f"triangle basis index out of range: ({i}, {j}) for degree {d}")
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    t = 1.0 - u - v
    coeff = math.factorial(d) // (math.factorial(i) * math.factorial(j) * math.factorial(d - i - j))
    return coeff * u**i * v**j * t ** (d - i - j)


def _rational_divide(pts):
    w = pts[:, 3]
    if np.any(w <= 0.0):
        raise DegeneracyError("accumulated weight is non-positive")
    return pts[:, :3] / w[:, None]


@dataclass(frozen=True)
class BezierSegment:
    """Rational Bezier curve piece; source_span records where it came from."""

    degree: int
    control_points: np.ndarray  # (degree+1, 4) homogeneous
    source_span: tuple = (None, (0.0, 1.0))  # (entity id, (t0, t1) in the source curve)

    def __post_init__(self):
        pts = as_homogeneous_array(self.control_points, "segment control points")
        if len(pts) != self.degree + 1:
            raise ArgumentError(
                f"degree-{self.degree} segment needs {self.degree + 1} control points")
        object.__setattr__(self, "control_points", pts)

    def evaluate_homogeneous(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        if np.any(u < -DOMAIN_ATOL) or np.any(u > 1.0 + DOMAIN_ATOL):
            raise DomainError("segment parameter outside [0, 1]")
        basis = bernstein_all(self.degree, np.clip(u, 0.0, 1.0))
        return basis @ self.control_points

    def evaluate(self, u):
        out = _rational_divide(self.evaluate_homogeneous(u))
        return out[0] if np.ndim(u) == 0 else out

    def source_parameter(self, u):
        """Map local [0, 1] parameter(s) to the source curve's parameter."""
        t0, t1 = self.source_span[1]
        return t0 + (t1 - t0) * np.asarray(u, dtype=np.float64)


@dataclass(frozen=True)
class BezierRectangle:
    """Tensor-product rational Bezier patch on [0, 1]^2."""

    degrees: tuple
    control_net: np.ndarray  # (p+1, q+1, 4)
    source_cell: tuple = (None, (0.0, 1.0), (0.0, 1.0))  # (entity id, u-interval, v-interval)

    def __post_init__(self):
        p, q = self.degrees
        net = np.asarray(self.control_net, dtype=np.float64)
        if net.shape != (p + 1, q + 1, 4):
            raise ArgumentError(
                f"bi-degree {self.degrees} patch needs a {(p + 1, q + 1, 4)} net, "
                f"got {net.shape}")
        if np.any(net[:, :, 3] <= 0.0) or not np.all(np.isfinite(net)):
            raise ArgumentError("rectangle control net has invalid weights or values")
        object.__setattr__(self, "degrees", (int(p), int(q)))
        object.__setattr__(self, "control_net", net)

    def evaluate_homogeneous(self, u, v):
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        v = np.atleast_1d(np.asarray(v, dtype=np.float64))
        for name, t in (("u", u), ("v", v)):
            if np.any(t < -DOMAIN_ATOL) or np.any(t > 1.0 + DOMAIN_ATOL):
                raise DomainError(f"rectangle parameter {name} outside [0, 1]")
        p, q = self.degrees
        bu = bernstein_all(p, np.clip(u, 0.0, 1.0))
        bv = bernstein_all(q, np.clip(v, 0.0, 1.0))
        return np.einsum("ki,kj,ijc->kc", bu, bv, self.control_net)

    def evaluate(self, u, v):
        out = _rational_divide(self.evaluate_homogeneous(u, v))
        return out[0] if (np.ndim(u) == 0 and np.ndim(v) == 0) else out

    def source_parameters(self, u, v):
        (u0, u1), (v0, v1) = self.source_cell[1], self.source_cell[2]
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        return u0 + (u1 - u0) * u, v0 + (v1 - v0) * v


@dataclass(frozen=True)
class BezierTriangle:
    """Rational Bezier triangle of total degree d over the unit triangle.

    source = (entity id, ((u0, u1), (v0, v1)), half) records the parametric
    cell of the source surface and which diagonal half this triangle covers
    ('lower' keeps cell coordinates; 'upper' is the point reflection
    (u, v) -> (1-u, 1-v) of the cell).
    """

    degree: int
    control_points: np.ndarray  # (count, 4) in (i, j)-lex order
    source: tuple = (None, ((0.0, 1.0), (0.0, 1.0)), "lower")

    def __post_init__(self):
        pts = as_homogeneous_array(self.control_points, "triangle control points")
        if len(pts) != triangle_point_count(self.degree):
            raise ArgumentError(
                f"degree-{self.degree} triangle needs {triangle_point_count(self.degree)} "
                f"control points, got {len(pts)}")
        object.__setattr__(self, "control_points", pts)

    def corner(self, which):
        """Euclidean corner control point: which in {(0,0), (d,0), (0,d)}."""
        idx = triangle_indices(self.degree).index(which)
        p = self.control_points[idx]
        return p[:3] / p[3]

    def evaluate_homogeneous(self, u, v):
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        v = np.atleast_1d(np.asarray(v, dtype=np.float64))
        if (np.any(u < -DOMAIN_ATOL) or np.any(v < -DOMAIN_ATOL)
                or np.any(u + v > 1.0 + DOMAIN_ATOL)):
            raise DomainError("parameters outside the unit triangle")
        d = self.degree
        basis = np.empty(u.shape + (triangle_point_count(d),))
        for k, (i, j) in enumerate(triangle_indices(d)):
            basis[..., k] = bivariate_bernstein(i, j, d, u, v)
        return basis @ self.control_points

    def evaluate(self, u, v):
        out = _rational_divide(self.evaluate_homogeneous(u, v))
        return out[0] if (np.ndim(u) == 0 and np.ndim(v) == 0) else out

    def source_parameters(self, u, v):
        """Map unit-triangle parameter(s) to the source surface's (u, v)."""
        _, ((u0, u1), (v0, v1)), half = self.source
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        if half == "upper":
            u, v = 1.0 - u, 1.0 - v
        return u0 + (u1 - u0) * u, v0 + (v1 - v0) * v


def eval_bezier_triangle(tri, u, v):
    """Evaluate a Bezier triangle at barycentric-compatible (u, v)."""
    return tri.evaluate(u, v)
