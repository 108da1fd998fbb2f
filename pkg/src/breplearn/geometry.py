"""NURBS geometry kernel: Bernstein and Cox-de Boor bases, rational evaluation.

All rational geometry travels in homogeneous coordinates (wx, wy, wz, w):
control points are premultiplied by their weight so refinement operations
(knot insertion, degree elevation, patch conversion) stay linear, and the
rational division happens exactly once, at evaluation time.

A curve is C(u) = sum_i N_{i,p}(u) w_i P_i / sum_i N_{i,p}(u) w_i; surfaces
are the tensor product of two such bases. Knot vectors must be clamped
(end multiplicity exactly p+1); unclamped inputs are rejected rather than
silently reparameterized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ArgumentError, DegeneracyError, DomainError, TopologyError

# Relative tolerance (scaled by knot range) for treating knots as equal.
KNOT_EQ_RTOL = 1e-10

# Slack allowed when checking that a parameter lies in an evaluation domain.
DOMAIN_RTOL = 1e-12


# ---------------------------------------------------------------------------
# Basis functions
# ---------------------------------------------------------------------------

def bernstein(i, n, u):
    """Bernstein basis polynomial B_{i,n}(u) = C(n,i) u^i (1-u)^(n-i)."""
    if not (isinstance(i, (int, np.integer)) and isinstance(n, (int, np.integer))):
        raise ArgumentError("bernstein indices must be integers")
    if n < 0 or i < 0 or i > n:
        raise ArgumentError(f"bernstein index out of range: i={i}, n={n}")
    u = np.asarray(u, dtype=np.float64)
    return math.comb(n, i) * u**i * (1.0 - u) ** (n - i)


def bernstein_all(n, u):
    """All n+1 Bernstein values at u; shape (..., n+1). They sum to 1."""
    u = np.asarray(u, dtype=np.float64)
    out = np.empty(u.shape + (n + 1,))
    for i in range(n + 1):
        out[..., i] = math.comb(n, i) * u**i * (1.0 - u) ** (n - i)
    return out


def bspline_basis(i, p, u, knots):
    """B-spline basis N_{i,p}(u) by the Cox-de Boor recursion.

    The 0/0 convention is 0. Degree-0 support is the half-open span
    [u_i, u_{i+1}), except that the span touching the last knot is closed
    so the basis still partitions unity at the right end of the domain.
    """
    knots = np.asarray(knots.knots if isinstance(knots, KnotVector) else knots,
                       dtype=np.float64)
    if i < 0 or i + p + 1 >= len(knots) + 1:
        return 0.0
    if p == 0:
        if i + 1 >= len(knots):
            return 0.0
        top = knots[-1]
        if knots[i] <= u < knots[i + 1]:
            return 1.0
        if u == top and knots[i + 1] == top and knots[i] < top:
            return 1.0
        return 0.0
    left = 0.0
    denom = knots[i + p] - knots[i]
    if denom > 0.0:
        left = (u - knots[i]) / denom * bspline_basis(i, p - 1, u, knots)
    right = 0.0
    denom = knots[i + p + 1] - knots[i + 1]
    if denom > 0.0:
        right = (knots[i + p + 1] - u) / denom * bspline_basis(i + 1, p - 1, u, knots)
    return left + right


def find_span(knots, degree, u):
    """Index k with knots[k] <= u < knots[k+1], clamped to the valid range."""
    knots = np.asarray(knots, dtype=np.float64)
    n = len(knots) - degree - 2
    k = int(np.searchsorted(knots, u, side="right")) - 1
    return min(max(k, degree), n)


def basis_row(knots, degree, u):
    """Nonzero basis values at each parameter (vectorized Cox-de Boor).

    Returns (spans, values) where values[k, j] = N_{spans[k]-p+j, p}(u[k]).
    """
    knots = np.asarray(knots, dtype=np.float64)
    u = np.atleast_1d(np.asarray(u, dtype=np.float64))
    p = degree
    n = len(knots) - p - 2
    spans = np.searchsorted(knots, u, side="right") - 1
    spans = np.clip(spans, p, n)
    m = len(u)
    values = np.zeros((m, p + 1))
    values[:, 0] = 1.0
    left = np.zeros((m, p + 1))
    right = np.zeros((m, p + 1))
    for j in range(1, p + 1):
        left[:, j] = u - knots[spans + 1 - j]
        right[:, j] = knots[spans + j] - u
        saved = np.zeros(m)
        for r in range(j):
            temp = values[:, r] / (right[:, r + 1] + left[:, j - r])
            values[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        values[:, j] = saved
    return spans, values


# ---------------------------------------------------------------------------
# Homogeneous control points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomogeneousPoint:
    """Weighted control point: spatial coordinates premultiplied by w."""

    wx: float
    wy: float
    wz: float
    w: float = 1.0  # rational weight, strictly positive

    def __post_init__(self):
        if not np.isfinite([self.wx, self.wy, self.wz, self.w]).all():
            raise ArgumentError("homogeneous point has non-finite components")
        if self.w <= 0.0:
            raise ArgumentError(f"weight must be > 0, got {self.w}")

    @classmethod
    def from_euclidean(cls, x, y, z, w=1.0):
        return cls(x * w, y * w, z * w, w)

    def euclidean(self):
        return np.array([self.wx, self.wy, self.wz]) / self.w

    def as_array(self):
        return np.array([self.wx, self.wy, self.wz, self.w])


def as_homogeneous_array(points, name="control points"):
    """Normalize a point list / array to an (n, 4) float array; validate weights."""
    if isinstance(points, np.ndarray):
        arr = points.astype(np.float64, copy=True)
    else:
        rows = [p.as_array() if isinstance(p, HomogeneousPoint) else np.asarray(p, dtype=np.float64)
                for p in points]
        arr = np.stack(rows) if rows else np.zeros((0, 4))
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ArgumentError(f"{name} must be an (n, 4) homogeneous array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} contain non-finite values")
    if np.any(arr[:, 3] <= 0.0):
        raise ArgumentError(f"{name} contain non-positive weights")
    return arr


# ---------------------------------------------------------------------------
# Knot vectors
# ---------------------------------------------------------------------------

class KnotVector:
    """Clamped, non-decreasing knot vector for a fixed degree."""

    def __init__(self, knots, degree):
        degree = int(degree)
        if degree < 0:
            raise ArgumentError("degree must be non-negative")
        knots = np.asarray(knots, dtype=np.float64)
        if knots.ndim != 1 or len(knots) < 2 * (degree + 1):
            raise ArgumentError(
                f"knot vector needs at least {2 * (degree + 1)} entries for degree {degree}")
        if not np.all(np.isfinite(knots)):
            raise ArgumentError("knot vector contains non-finite values")
        if np.any(np.diff(knots) < 0):
            raise ArgumentError("knot vector must be non-decreasing")
        if knots[0] == knots[-1]:
            raise ArgumentError("knot vector spans a zero-length domain")
        self.knots = knots
        self.degree = degree
        self._tol = KNOT_EQ_RTOL * (knots[-1] - knots[0])
        if self.multiplicity(knots[0]) != degree + 1 or self.multiplicity(knots[-1]) != degree + 1:
            raise ArgumentError(
                "knot vector must be clamped: end multiplicity exactly degree+1")

    def __len__(self):
        return len(self.knots)

    def __eq__(self, other):
        return (isinstance(other, KnotVector) and self.degree == other.degree
                and np.array_equal(self.knots, other.knots))

    @property
    def tolerance(self):
        return self._tol

    @property
    def domain(self):
        p = self.degree
        return float(self.knots[p]), float(self.knots[-p - 1])

    def multiplicity(self, value):
        return int(np.count_nonzero(np.abs(self.knots - value) <= self._tol))

    def interior_knots(self):
        """Distinct interior knot values with multiplicities (tolerance-grouped)."""
        p = self.degree
        interior = self.knots[p + 1:-p - 1]
        values, counts = [], []
        for u in interior:
            if values and abs(u - values[-1]) <= self._tol:
                counts[-1] += 1
            else:
                values.append(float(u))
                counts.append(1)
        return values, counts

    def span(self, u):
        return find_span(self.knots, self.degree, u)

    def check_domain(self, u, what="parameter"):
        lo, hi = self.domain
        slack = DOMAIN_RTOL * (hi - lo)
        u = np.asarray(u, dtype=np.float64)
        if np.any(u < lo - slack) or np.any(u > hi + slack):
            raise DomainError(f"{what} outside evaluation domain [{lo}, {hi}]")
        return np.clip(u, lo, hi)


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------

class NurbsCurve:
    """Rational B-spline curve of a given degree over a clamped knot vector.

    2-D parameter-space curves (trim pcurves) reuse this type with the z
    coordinate fixed at zero, so one evaluation path serves both spaces.
    """

    def __init__(self, degree, knots, control_points):
        self.degree = int(degree)
        self.knots = knots if isinstance(knots, KnotVector) else KnotVector(knots, self.degree)
        if self.knots.degree != self.degree:
            raise ArgumentError("knot vector degree does not match curve degree")
        self.control_points = as_homogeneous_array(control_points)
        expected = len(self.knots) - self.degree - 1
        if len(self.control_points) != expected:
            raise ArgumentError(
                f"curve needs {expected} control points for this knot vector, "
                f"got {len(self.control_points)}")

    @property
    def domain(self):
        return self.knots.domain

    def evaluate_homogeneous(self, u):
        u = self.knots.check_domain(u)
        scalar = np.ndim(u) == 0
        spans, basis = basis_row(self.knots.knots, self.degree, u)
        idx = spans[:, None] - self.degree + np.arange(self.degree + 1)[None, :]
        pts = np.einsum("kj,kjc->kc", basis, self.control_points[idx])
        return pts[0] if scalar else pts

    def evaluate(self, u):
        pts = np.atleast_2d(self.evaluate_homogeneous(u))
        w = pts[:, 3]
        if np.any(w <= 0.0):
            raise DegeneracyError("accumulated weight is non-positive")
        out = pts[:, :3] / w[:, None]
        return out[0] if np.ndim(u) == 0 else out

    def reversed(self):
        """The same curve traversed backwards: C_rev(u) = C(a + b - u)."""
        a, b = self.domain
        new_knots = (a + b - self.knots.knots)[::-1].copy()
        return NurbsCurve(self.degree, KnotVector(new_knots, self.degree),
                          self.control_points[::-1].copy())

    def control_bbox(self):
        eu = self.control_points[:, :3] / self.control_points[:, 3:4]
        return eu.min(axis=0), eu.max(axis=0)

    def is_planar_uv(self):
        """True when all control z components vanish (a parameter-space curve)."""
        return bool(np.all(self.control_points[:, 2] == 0.0))


def eval_curve(curve, u):
    """Evaluate a NURBS curve at parameter(s) u (3-D euclidean result)."""
    return curve.evaluate(u)


# ---------------------------------------------------------------------------
# Trim loops and surfaces
# ---------------------------------------------------------------------------

LOOP_CLOSURE_RTOL = 1e-9


class TrimLoop:
    """Closed chain of parameter-space curves bounding a face region.

    Orientation is normalized at construction: outer loops run
    counter-clockwise in (u, v), inner loops clockwise.
    """

    def __init__(self, pcurves, orientation):
        if orientation not in ("outer", "inner"):
            raise ArgumentError(f"orientation must be 'outer' or 'inner', got {orientation!r}")
        pcurves = list(pcurves)
        if not pcurves:
            raise ArgumentError("trim loop needs at least one pcurve")
        for c in pcurves:
            if not isinstance(c, NurbsCurve) or not c.is_planar_uv():
                raise ArgumentError("trim pcurves must be 2-D NurbsCurve instances (z == 0)")
        self.orientation = orientation
        self.pcurves = pcurves
        self._check_closed()
        if self._signed_area() * (1.0 if orientation == "outer" else -1.0) < 0.0:
            self.pcurves = [c.reversed() for c in reversed(self.pcurves)]

    def _endpoints(self):
        pts = []
        for c in self.pcurves:
            a, b = c.domain
            pts.append((c.evaluate(a), c.evaluate(b)))
        return pts

    def _check_closed(self):
        pts = self._endpoints()
        all_pts = np.concatenate([np.stack(p) for p in pts])
        scale = max(1.0, float(np.abs(all_pts).max()))
        tol = LOOP_CLOSURE_RTOL * scale
        for i, (_, end) in enumerate(pts):
            start_next = pts[(i + 1) % len(pts)][0]
            if np.linalg.norm(end - start_next) > tol:
                raise TopologyError(
                    f"trim loop is open between pcurve {i} and {(i + 1) % len(pts)}")

    def chain_points(self, samples_per_curve=64):
        """Polygonal sampling of the loop (shared endpoints deduplicated)."""
        pts = []
        for c in self.pcurves:
            a, b = c.domain
            u = np.linspace(a, b, samples_per_curve)
            p = c.evaluate(u)[:, :2]
            pts.append(p[:-1])
        return np.concatenate(pts)

    def _signed_area(self):
        poly = self.chain_points()
        x, y = poly[:, 0], poly[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        return 0.5 * float(np.sum(x * yn - xn * y))


class NurbsSurface:
    """Tensor-product rational surface with optional trim loops."""

    def __init__(self, degrees, knots_u, knots_v, control_net, trim_loops=()):
        p, q = (int(degrees[0]), int(degrees[1]))
        self.degrees = (p, q)
        self.knots_u = knots_u if isinstance(knots_u, KnotVector) else KnotVector(knots_u, p)
        self.knots_v = knots_v if isinstance(knots_v, KnotVector) else KnotVector(knots_v, q)
        if self.knots_u.degree != p or self.knots_v.degree != q:
            raise ArgumentError("knot vector degrees do not match surface degrees")
        net = np.asarray(control_net, dtype=np.float64)
        if net.ndim != 3 or net.shape[2] != 4:
            raise ArgumentError(f"control net must have shape (nu, nv, 4), got {net.shape}")
        nu = len(self.knots_u) - p - 1
        nv = len(self.knots_v) - q - 1
        if net.shape[:2] != (nu, nv):
            raise ArgumentError(
                f"control net shape {net.shape[:2]} inconsistent with knot vectors "
                f"(expected {(nu, nv)})")
        if not np.all(np.isfinite(net)):
            raise ArgumentError("control net contains non-finite values")
        if np.any(net[:, :, 3] <= 0.0):
            raise ArgumentError("control net contains non-positive weights")
        self.control_net = net
        self.trim_loops = tuple(trim_loops)
        for loop in self.trim_loops:
            if not isinstance(loop, TrimLoop):
                raise ArgumentError("trim_loops must be TrimLoop instances")

    @property
    def domain(self):
        return self.knots_u.domain, self.knots_v.domain

    @property
    def is_trimmed(self):
        return len(self.trim_loops) > 0

    def evaluate_homogeneous(self, u, v):
        u = self.knots_u.check_domain(u, "u")
        v = self.knots_v.check_domain(v, "v")
        scalar = np.ndim(u) == 0 and np.ndim(v) == 0
        u, v = np.broadcast_arrays(np.atleast_1d(u), np.atleast_1d(v))
        p, q = self.degrees
        su, bu = basis_row(self.knots_u.knots, p, u)
        sv, bv = basis_row(self.knots_v.knots, q, v)
        iu = su[:, None] - p + np.arange(p + 1)[None, :]
        iv = sv[:, None] - q + np.arange(q + 1)[None, :]
        window = self.control_net[iu[:, :, None], iv[:, None, :]]
        pts = np.einsum("ki,kj,kijc->kc", bu, bv, window)
        return pts[0] if scalar else pts

    def evaluate(self, u, v):
        pts = np.atleast_2d(self.evaluate_homogeneous(u, v))
        w = pts[:, 3]
        if np.any(w <= 0.0):
            raise DegeneracyError("accumulated weight is non-positive")
        out = pts[:, :3] / w[:, None]
        return out[0] if (np.ndim(u) == 0 and np.ndim(v) == 0) else out

    def control_bbox(self):
        eu = self.control_net[:, :, :3] / self.control_net[:, :, 3:4]
        flat = eu.reshape(-1, 3)
        return flat.min(axis=0), flat.max(axis=0)


def eval_surface(surface, u, v):
    """Evaluate a NURBS surface at (u, v); trimming is not checked here."""
    return surface.evaluate(u, v)
