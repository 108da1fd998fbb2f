"""Adaptive quadtree decomposition of (possibly trimmed) surfaces.

The parametric domain is subdivided dyadically: cells fully inside the
trimmed region are kept as-is, cells fully outside are discarded, and
cells crossed by a trim curve are split until every local curve piece is
flat enough (chord-to-arc ratio >= tau) or the depth cap is reached.
Retained leaves are restricted to Bezier patches by knot insertion and
split into triangles, so the primitive set stays watertight in parameter
space; unconverged cells are flagged in the report, never dropped.

Cell classification follows the polyline route: each trim loop is
flattened once at the same chord-to-arc tolerance, a cell is "boundary"
when any polyline chord intersects its rectangle, and interior/exterior
is decided by even-odd ray casting from the cell center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryErrorReport, arc_length, boundary_rmse, \
    chord_arc_ratio, curvature_estimate
from .decompose import rectangle_to_triangles, restrict_surface, \
    surface_to_bezier_rectangles
from .validation import check_in_range, check_positive_int

FLATTEN_MAX_BISECT = 24


@dataclass(frozen=True)
class TrimPiece:
    """One trim-curve piece local to a boundary cell."""

    loop_index: int
    pcurve_index: int
    t0: float
    t1: float
    chord: float
    arc: float
    ratio: float
    curvature: float


@dataclass
class QuadCell:
    """Dyadic leaf cell of the quadtree over the surface's knot domain."""

    depth: int
    ix: int
    iy: int
    bounds: tuple  # (u0, u1, v0, v1) in surface parameters
    classification: str  # interior | exterior | boundary
    converged: bool = True
    pieces: tuple = ()

    @property
    def dyadic(self):
        return (self.depth, self.ix, self.iy)


def flatten_pcurve(pcurve, tau, max_bisect=FLATTEN_MAX_BISECT):
    """Breakpoints such that every piece has chord-to-arc ratio >= tau.

    Starts from the distinct knot values and bisects; smooth spans of a
    rational quadratic reach tau = 0.995 within a handful of levels.
    """
    lo, hi = pcurve.domain
    values, _ = pcurve.knots.interior_knots()
    breaks = [lo] + values + [hi]
    out = [lo]
    for a, b in zip(breaks[:-1], breaks[1:]):
        stack = [(a, b, 0)]
        acc = []
        while stack:
            t0, t1, depth = stack.pop()
            if depth >= max_bisect or chord_arc_ratio(pcurve, t0, t1) >= tau:
                acc.append((t0, t1))
            else:
                mid = 0.5 * (t0 + t1)
                stack.append((mid, t1, depth + 1))
                stack.append((t0, mid, depth + 1))
        acc.sort()
        out.extend(t1 for _, t1 in acc)
    return np.asarray(out)


def segments_intersect_rect(p0, p1, rect):
    """Liang-Barsky test of chords (p0 -> p1) against a closed rectangle."""
    xmin, xmax, ymin, ymax = rect
    p0 = np.atleast_2d(p0)
    p1 = np.atleast_2d(p1)
    d = p1 - p0
    n = len(p0)
    t0 = np.zeros(n)
    t1 = np.ones(n)
    ok = np.ones(n, dtype=bool)
    for p, q in ((-d[:, 0], p0[:, 0] - xmin), (d[:, 0], xmax - p0[:, 0]),
                 (-d[:, 1], p0[:, 1] - ymin), (d[:, 1], ymax - p0[:, 1])):
        zero = p == 0.0
        ok &= ~(zero & (q < 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(zero, 0.0, q / np.where(zero, 1.0, p))
        t0 = np.where(p < 0.0, np.maximum(t0, r), t0)
        t1 = np.where(p > 0.0, np.minimum(t1, r), t1)
    return ok & (t0 <= t1)


def ray_crossings(point, chain):
    """Crossing count of the +u horizontal ray from point against a closed chain."""
    x, y = point
    x0, y0 = chain[:, 0], chain[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    crosses = (y0 <= y) != (y1 <= y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = x0 + (y - y0) / np.where(y1 == y0, 1.0, y1 - y0) * (x1 - x0)
    return int(np.count_nonzero(crosses & (xs > x)))


class _TrimmedDomain:
    """Flattened trim loops of one surface, shared across the recursion."""

    def __init__(self, surface, tau):
        self.loops = []
        self.chains = []
        for loop in surface.trim_loops:
            loop._check_closed()  # cheap revalidation; raises TopologyError
            curves = []
            for pc in loop.pcurves:
                ts = flatten_pcurve(pc, tau)
                pts = pc.evaluate(ts)[:, :2]
                curves.append((pc, ts, pts))
            self.loops.append(curves)
            self.chains.append(np.concatenate([pts[:-1] for _, _, pts in curves]))

    def classify(self, rect):
        for curves in self.loops:
            for _, _, pts in curves:
                if segments_intersect_rect(pts[:-1], pts[1:], rect).any():
                    return "boundary"
        cx = 0.5 * (rect[0] + rect[1])
        cy = 0.5 * (rect[2] + rect[3])
        crossings = sum(ray_crossings((cx, cy), chain) for chain in self.chains)
        return "interior" if crossings % 2 == 1 else "exterior"

    def cell_pieces(self, rect):
        """Breakpoint-aligned runs of each pcurve crossing the cell."""
        pieces = []
        for li, curves in enumerate(self.loops):
            for ci, (pc, ts, pts) in enumerate(curves):
                hits = segments_intersect_rect(pts[:-1], pts[1:], rect)
                if not hits.any():
                    continue
                idx = np.flatnonzero(hits)
                run_starts = [idx[0]]
                run_ends = []
                for a, b in zip(idx[:-1], idx[1:]):
                    if b != a + 1:
                        run_ends.append(a)
                        run_starts.append(b)
                run_ends.append(idx[-1])
                for s, e in zip(run_starts, run_ends):
                    t0, t1 = float(ts[s]), float(ts[e + 1])
                    chord = float(np.linalg.norm(pc.evaluate(t1) - pc.evaluate(t0)))
                    arc = arc_length(pc, t0, t1)
                    ratio = min(chord / arc, 1.0) if arc > 0 else 1.0
                    kappa = curvature_estimate(pc, 0.5 * (t0 + t1), t1 - t0)
                    pieces.append(TrimPiece(li, ci, t0, t1, chord, arc, ratio, kappa))
        return pieces


def _cell_bounds(root, depth, ix, iy):
    (u0, u1), (v0, v1) = root
    scale = 1.0 / (1 << depth)
    return (u0 + (u1 - u0) * ix * scale, u0 + (u1 - u0) * (ix + 1) * scale,
            v0 + (v1 - v0) * iy * scale, v0 + (v1 - v0) * (iy + 1) * scale)


def quadtree_decompose(surface, tau=0.995, max_depth=8, entity_id=None):
    """Decompose a surface into Bezier triangles with adaptive trimming.

    Returns (triangles, cells, report). Untrimmed surfaces bypass
    subdivision entirely: one interior root cell and the exact knot-grid
    triangulation. For trimmed surfaces every retained leaf is converted
    by restricting the surface to the cell via knot insertion.
    """
    tau = check_in_range(tau, "tau", 0.9, 1.0, inclusive=False)
    max_depth = check_positive_int(max_depth, "max_depth")

    dom_u, dom_v = surface.domain
    root = (dom_u, dom_v)

    if not surface.is_trimmed:
        triangles = []
        for row in surface_to_bezier_rectangles(surface, entity_id=entity_id):
            for rect in row:
                triangles.extend(rectangle_to_triangles(rect))
        cell = QuadCell(0, 0, 0,
                        (dom_u[0], dom_u[1], dom_v[0], dom_v[1]), "interior")
        report = BoundaryErrorReport(0.0, 0.0, 0.0, np.zeros(0), np.zeros(0), np.zeros(0))
        return triangles, [cell], report

    domain = _TrimmedDomain(surface, tau)
    cells = []

    def recurse(depth, ix, iy):
        rect = _cell_bounds(root, depth, ix, iy)
        classification = domain.classify(rect)
        if classification != "boundary":
            cells.append(QuadCell(depth, ix, iy, rect, classification))
            return
        pieces = domain.cell_pieces(rect)
        converged = all(p.ratio >= tau for p in pieces)
        if converged or depth >= max_depth:
            cells.append(QuadCell(depth, ix, iy, rect, "boundary",
                                  converged=converged, pieces=tuple(pieces)))
            return
        for dy in (0, 1):
            for dx in (0, 1):
                recurse(depth + 1, 2 * ix + dx, 2 * iy + dy)

    recurse(0, 0, 0)

    triangles = []
    for cell in cells:
        if cell.classification == "exterior":
            continue
        u0, u1, v0, v1 = cell.bounds
        for rect in restrict_surface(surface, (u0, u1), (v0, v1), entity_id=entity_id):
            triangles.extend(rectangle_to_triangles(rect))

    report = _build_report(domain, cells)
    return triangles, cells, report


def _build_report(domain, cells):
    unconverged = tuple(i for i, c in enumerate(cells)
                        if c.classification == "boundary" and not c.converged)
    ratios, curvatures, arcs = [], [], []
    breakpoint_sets = {}
    for cell in cells:
        for piece in cell.pieces:
            ratios.append(piece.ratio)
            curvatures.append(piece.curvature)
            arcs.append(piece.arc)
            key = (piece.loop_index, piece.pcurve_index)
            breakpoint_sets.setdefault(key, set()).update((piece.t0, piece.t1))

    total_sq = 0.0
    total_arc = 0.0
    max_step = 0.0
    for (li, ci), ts in breakpoint_sets.items():
        pc = domain.loops[li][ci][0]
        lo, hi = pc.domain
        points = np.array(sorted(ts | {lo, hi}))
        keep = np.concatenate(([True], np.diff(points) > 1e-12 * (hi - lo)))
        points = points[keep]
        if len(points) < 2:
            continue
        rep = boundary_rmse(pc, points)
        total_sq += rep.rmse**2 * rep.total_arc_length
        total_arc += rep.total_arc_length
        max_step = max(max_step, rep.max_step)

    rmse = float(np.sqrt(total_sq / total_arc)) if total_arc > 0 else 0.0
    return BoundaryErrorReport(max_step, total_arc, rmse,
                               np.asarray(ratios), np.asarray(curvatures),
                               np.asarray(arcs), unconverged)
