"""Shape-preserving decomposition of NURBS entities into Bezier primitives.

Knot insertion refines the homogeneous control points by
Q_i = (1 - a_i) P_{i-1} + a_i P_i with a_i = (u - u_i) / (u_{i+p} - u_i)
(a_i = 1 below the affected window, 0 above it), which leaves the evaluated
curve pointwise unchanged. Raising every distinct interior knot to
multiplicity p slices the curve into Bezier segments; the same operation
along both surface axes yields a grid of tensor-product patches, which are
then split along the diagonal u + v = 1 into two triangles of total degree
d = p + q via an exact linear change of basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .bezier import BezierRectangle, BezierSegment, BezierTriangle, triangle_indices, \
    triangle_point_count
from .exceptions import ArgumentError, DomainError, MultiplicityError
from .geometry import KnotVector, NurbsCurve, NurbsSurface

# Standardized primitive degrees fed to the learning stack. Curves are
# elevated to cubics (4 control points); triangles to total degree 6
# (28 control points), which covers planes, quadrics and every
# rational-quadratic industrial primitive (max bi-degree (3, 3)).
CURVE_STANDARD_DEGREE = 3
TRIANGLE_STANDARD_DEGREE = 6


# ---------------------------------------------------------------------------
# Knot insertion
# ---------------------------------------------------------------------------

def _insertion_alphas(knots, degree, u_hat, span):
    """Interpolation factors a_i for one insertion, indexed by new point i."""
    n_new = len(knots) - degree  # new control point count
    alphas = np.empty(n_new)
    for i in range(n_new):
        if i <= span - degree:
            alphas[i] = 1.0
        elif i > span:
            alphas[i] = 0.0
        else:
            alphas[i] = (u_hat - knots[i]) / (knots[i + degree] - knots[i])
    return alphas


def _insert_knot_array(knots, degree, ctrl, u_hat):
    """One Boehm insertion on raw arrays; ctrl may carry trailing axes."""
    span = int(np.searchsorted(knots, u_hat, side="right")) - 1
    alphas = _insertion_alphas(knots, degree, u_hat, span)
    shape = (len(alphas),) + ctrl.shape[1:]
    new_ctrl = np.empty(shape)
    a = alphas.reshape((-1,) + (1,) * (ctrl.ndim - 1))
    new_ctrl[0] = ctrl[0]
    new_ctrl[-1] = ctrl[-1]
    new_ctrl[1:-1] = a[1:-1] * ctrl[1:] + (1.0 - a[1:-1]) * ctrl[:-1]
    new_knots = np.insert(knots, span + 1, u_hat)
    return new_knots, new_ctrl


def insert_knot(curve, u_hat):
    """Insert u_hat once; the returned curve evaluates identically.

    u_hat must lie strictly inside the evaluation domain and the resulting
    multiplicity must not exceed the degree.
    """
    lo, hi = curve.domain
    u_hat = float(u_hat)
    tol = curve.knots.tolerance
    if not (lo + tol < u_hat < hi - tol):
        raise DomainError(f"insertion parameter {u_hat} must lie strictly inside ({lo}, {hi})")
    if curve.knots.multiplicity(u_hat) >= curve.degree:
        raise MultiplicityError(
            f"inserting {u_hat} would raise its multiplicity beyond the degree")
    new_knots, new_ctrl = _insert_knot_array(
        curve.knots.knots, curve.degree, curve.control_points, u_hat)
    return NurbsCurve(curve.degree, KnotVector(new_knots, curve.degree), new_ctrl)


def _fully_inserted(knots, degree, ctrl, extra_values=()):
    """Raise every distinct interior knot (and extras) to multiplicity == degree."""
    kv = KnotVector(knots, degree)
    targets = {}
    values, counts = kv.interior_knots()
    for u, c in zip(values, counts):
        targets[u] = c
    tol = kv.tolerance
    lo, hi = kv.domain
    for u in extra_values:
        u = float(u)
        if u <= lo + tol or u >= hi - tol:
            continue
        for known in targets:
            if abs(known - u) <= tol:
                u = known
                break
        targets.setdefault(u, 0)
    knots = np.asarray(knots, dtype=np.float64)
    for u in sorted(targets):
        for _ in range(degree - targets[u]):
            knots, ctrl = _insert_knot_array(knots, degree, ctrl, u)
    return knots, ctrl


def _bezier_windows(knots, degree):
    """Control-point offsets and parameter intervals of the Bezier pieces."""
    kv = KnotVector(knots, degree)
    values, _ = kv.interior_knots()
    lo, hi = kv.domain
    breaks = [lo] + values + [hi]
    return [(i * degree, (breaks[i], breaks[i + 1])) for i in range(len(breaks) - 1)]


def curve_to_bezier_segments(curve, entity_id=None):
    """Split a clamped NURBS curve into rational Bezier segments.

    Yields one segment per distinct interior knot value plus one; adjacent
    segments share their junction control point exactly.
    """
    knots, ctrl = _fully_inserted(curve.knots.knots, curve.degree, curve.control_points)
    segments = []
    for offset, interval in _bezier_windows(knots, curve.degree):
        segments.append(BezierSegment(
            degree=curve.degree,
            control_points=ctrl[offset:offset + curve.degree + 1].copy(),
            source_span=(entity_id, interval)))
    return segments


def extract_curve_region(curve, t0, t1, entity_id=None):
    """Bezier segments of the curve restricted to [t0, t1] (within domain)."""
    lo, hi = curve.domain
    tol = curve.knots.tolerance
    if t0 < lo - tol or t1 > hi + tol or t0 >= t1:
        raise DomainError(f"region [{t0}, {t1}] not inside domain [{lo}, {hi}]")
    knots, ctrl = _fully_inserted(curve.knots.knots, curve.degree, curve.control_points,
                                  extra_values=(t0, t1))
    segments = []
    for offset, (a, b) in _bezier_windows(knots, curve.degree):
        if a >= t0 - tol and b <= t1 + tol:
            segments.append(BezierSegment(
                degree=curve.degree,
                control_points=ctrl[offset:offset + curve.degree + 1].copy(),
                source_span=(entity_id, (a, b))))
    return segments


# ---------------------------------------------------------------------------
# Degree elevation
# ---------------------------------------------------------------------------

def _elevate_once(ctrl):
    """One homogeneous Bezier elevation step: degree p -> p + 1."""
    p = len(ctrl) - 1
    out = np.empty((p + 2, ctrl.shape[1]))
    out[0] = ctrl[0]
    out[-1] = ctrl[-1]
    i = np.arange(1, p + 1)[:, None]
    out[1:-1] = (i / (p + 1)) * ctrl[:-1] + (1.0 - i / (p + 1)) * ctrl[1:]
    return out


def elevate_segment_degree(seg, target_degree):
    """Shape-preserving degree elevation of a Bezier segment."""
    target_degree = int(target_degree)
    if target_degree < seg.degree:
        raise ArgumentError(
            f"target degree {target_degree} is below the segment degree {seg.degree}")
    if target_degree == seg.degree:
        return seg
    ctrl = seg.control_points
    for _ in range(target_degree - seg.degree):
        ctrl = _elevate_once(ctrl)
    return BezierSegment(target_degree, ctrl, seg.source_span)


def elevate_triangle_degree(tri, target_degree):
    """Elevate a Bezier triangle: V'_{ij} = (i V_{i-1,j} + j V_{i,j-1} + k V_{ij}) / (d+1)."""
    target_degree = int(target_degree)
    if target_degree < tri.degree:
        raise ArgumentError(
            f"target degree {target_degree} is below the triangle degree {tri.degree}")
    ctrl = tri.control_points
    d = tri.degree
    while d < target_degree:
        index = {ij: k for k, ij in enumerate(triangle_indices(d))}
        out = np.zeros((triangle_point_count(d + 1), 4))
        for k, (i, j) in enumerate(triangle_indices(d + 1)):
            acc = np.zeros(4)
            if i > 0:
                acc += i * ctrl[index[(i - 1, j)]]
            if j > 0:
                acc += j * ctrl[index[(i, j - 1)]]
            if i + j <= d:
                acc += (d + 1 - i - j) * ctrl[index[(i, j)]]
            out[k] = acc / (d + 1)
        ctrl = out
        d += 1
    return BezierTriangle(target_degree, ctrl, tri.source)


# ---------------------------------------------------------------------------
# Surface splitting
# ---------------------------------------------------------------------------

def _surface_fully_inserted(surface, extra_u=(), extra_v=()):
    p, q = surface.degrees
    ku, net = _fully_inserted(surface.knots_u.knots, p, surface.control_net, extra_u)
    net_t = np.swapaxes(net, 0, 1)
    kv, net_t = _fully_inserted(surface.knots_v.knots, q, net_t, extra_v)
    return ku, kv, np.swapaxes(net_t, 0, 1)


def surface_to_bezier_rectangles(surface, entity_id=None):
    """Grid of Bezier patches covering the full surface domain.

    Grid shape is (#distinct interior u-knots + 1, #distinct interior
    v-knots + 1); each patch evaluates identically to the source surface
    on its cell.
    """
    p, q = surface.degrees
    ku, kv, net = _surface_fully_inserted(surface)
    rows = []
    for off_u, span_u in _bezier_windows(ku, p):
        row = []
        for off_v, span_v in _bezier_windows(kv, q):
            patch = net[off_u:off_u + p + 1, off_v:off_v + q + 1].copy()
            row.append(BezierRectangle((p, q), patch, (entity_id, span_u, span_v)))
        rows.append(row)
    return rows


def restrict_surface(surface, u_interval, v_interval, entity_id=None):
    """Bezier patches covering only the given parametric rectangle."""
    (u0, u1), (v0, v1) = u_interval, v_interval
    p, q = surface.degrees
    tol_u = surface.knots_u.tolerance
    tol_v = surface.knots_v.tolerance
    ku, kv, net = _surface_fully_inserted(surface, extra_u=(u0, u1), extra_v=(v0, v1))
    patches = []
    for off_u, span_u in _bezier_windows(ku, p):
        if span_u[0] < u0 - tol_u or span_u[1] > u1 + tol_u:
            continue
        for off_v, span_v in _bezier_windows(kv, q):
            if span_v[0] < v0 - tol_v or span_v[1] > v1 + tol_v:
                continue
            patch = net[off_u:off_u + p + 1, off_v:off_v + q + 1].copy()
            patches.append(BezierRectangle((p, q), patch, (entity_id, span_u, span_v)))
    return patches


@lru_cache(maxsize=None)
def _rect_to_tri_matrix(p, q):
    """Change-of-basis matrix M with V_flat = M @ P_flat for the lower triangle.

    M[(i,j), (a,b)] = C(p,a) C(q,b) C(p-a, j-b) C(q-b, i-a) i! j! (d-i-j)! / d!
    with d = p + q and C(n, k) = 0 outside 0 <= k <= n.
    """
    d = p + q
    tri = triangle_indices(d)
    m = np.zeros((len(tri), (p + 1) * (q + 1)))
    fact_d = math.factorial(d)
    for row, (i, j) in enumerate(tri):
        scale = (math.factorial(i) * math.factorial(j) * math.factorial(d - i - j)) / fact_d
        for a in range(p + 1):
            for b in range(q + 1):
                jb = j - b
                ia = i - a
                if jb < 0 or jb > p - a or ia < 0 or ia > q - b:
                    continue
                coeff = (math.comb(p, a) * math.comb(q, b)
                         * math.comb(p - a, jb) * math.comb(q - b, ia))
                m[row, a * (q + 1) + b] = coeff * scale
    return m


def rectangle_to_triangles(rect):
    """Split a tensor-product patch along u + v = 1 into two Bezier triangles.

    Both triangles have total degree d = p + q; the upper half comes from
    applying the same conversion to the patch reparameterized by
    (u, v) -> (1-u, 1-v).
    """
    p, q = rect.degrees
    m = _rect_to_tri_matrix(p, q)
    flat = rect.control_net.reshape(-1, 4)
    lower = BezierTriangle(p + q, m @ flat,
                           (rect.source_cell[0],
                            (rect.source_cell[1], rect.source_cell[2]), "lower"))
    flipped = rect.control_net[::-1, ::-1].reshape(-1, 4)
    upper = BezierTriangle(p + q, m @ flipped,
                           (rect.source_cell[0],
                            (rect.source_cell[1], rect.source_cell[2]), "upper"))
    return lower, upper


# ---------------------------------------------------------------------------
# Model-level standardization
# ---------------------------------------------------------------------------

@dataclass
class ModelPrimitives:
    """Standardized primitives for one model, aligned with its entity lists."""

    face_triangles: list  # per face: list of BezierTriangle (standard degree)
    edge_segments: list   # per edge: list of BezierSegment (standard degree)
    face_cells: list = field(default_factory=list)    # per face: list of QuadCell
    face_reports: list = field(default_factory=list)  # per face: BoundaryErrorReport
    tau: float = 0.995
    max_depth: int = 8

    @property
    def curve_degree(self):
        return CURVE_STANDARD_DEGREE

    @property
    def triangle_degree(self):
        return TRIANGLE_STANDARD_DEGREE


def standardize_segments(segments):
    """Elevate segments to the standard cubic degree, rejecting higher input."""
    out = []
    for seg in segments:
        if seg.degree > CURVE_STANDARD_DEGREE:
            raise ArgumentError(
                f"curve degree {seg.degree} exceeds the standard degree "
                f"{CURVE_STANDARD_DEGREE}; cannot standardize")
        out.append(elevate_segment_degree(seg, CURVE_STANDARD_DEGREE))
    return out


def standardize_triangles(triangles):
    """Elevate triangles to the standard total degree, rejecting higher input."""
    out = []
    for tri in triangles:
        if tri.degree > TRIANGLE_STANDARD_DEGREE:
            raise ArgumentError(
                f"triangle degree {tri.degree} exceeds the standard degree "
                f"{TRIANGLE_STANDARD_DEGREE}; cannot standardize")
        out.append(elevate_triangle_degree(tri, TRIANGLE_STANDARD_DEGREE))
    return out


def decompose_model(model, tau=0.995, max_depth=8):
    """Decompose every entity of a model into standardized primitives."""
    from .quadtree import quadtree_decompose  # local import to avoid a cycle

    face_triangles, face_cells, face_reports = [], [], []
    for face in model.faces:
        tris, cells, report = quadtree_decompose(
            face.surface, tau=tau, max_depth=max_depth, entity_id=face.id)
        face_triangles.append(standardize_triangles(tris))
        face_cells.append(cells)
        face_reports.append(report)
    edge_segments = []
    for edge in model.edges:
        segs = curve_to_bezier_segments(edge.curve, entity_id=edge.id)
        edge_segments.append(standardize_segments(segs))
    return ModelPrimitives(face_triangles, edge_segments, face_cells, face_reports,
                           tau=tau, max_depth=max_depth)
