"""Map-based LOS determination on a 2D building map.

A building map is a set of simple, non-overlapping polygons (walls seen
from above, meters). The direct AP-UE path is LOS when the open segment
between them crosses no polygon edge and the UE is outdoors; grazing
contact with a wall (touching a vertex, running along an edge) counts as
blocked. For indoor UEs the module reports the 2D distance from the AP to
the first outer-wall crossing plus the remaining indoor depth — the
distance substitution the LOS-probability models use.

Heights are ignored: the map is strictly 2D.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .core import ValidationError

# Geometric tolerance in meters: points closer than this to a wall are
# treated as touching it.
GEOM_TOL_M = 1e-9


class Blockage(Enum):
    LOS = "los"
    GEOMETRY_BLOCKED = "geometry-blocked"


class WallDistance(NamedTuple):
    """First-wall crossing split of an AP -> indoor-UE segment."""

    wall_m: float  # AP to the outer-wall intersection
    depth_m: float  # remaining distance inside the building


def _signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_intersect(p1, p2, q1, q2, tol: float = GEOM_TOL_M) -> bool:
    """Inclusive segment intersection: touching or collinear overlap counts."""
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    q1 = np.asarray(q1, float)
    q2 = np.asarray(q2, float)
    r = p2 - p1
    s = q2 - q1
    lp = float(np.hypot(*r))
    lq = float(np.hypot(*s))

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def on_seg(a, b, pt, length):
        if length <= tol:
            return float(np.hypot(*(pt - a))) <= tol
        t = float(np.dot(pt - a, b - a)) / (length * length)
        return -tol / length <= t <= 1.0 + tol / length

    d_q1 = cross(p1, p2, q1)
    d_q2 = cross(p1, p2, q2)
    d_p1 = cross(q1, q2, p1)
    d_p2 = cross(q1, q2, p2)
    zp = tol * max(lp, tol)
    zq = tol * max(lq, tol)
    if ((d_q1 > zp and d_q2 < -zp) or (d_q1 < -zp and d_q2 > zp)) and (
        (d_p1 > zq and d_p2 < -zq) or (d_p1 < -zq and d_p2 > zq)
    ):
        return True
    if abs(d_q1) <= zp and on_seg(p1, p2, q1, lp):
        return True
    if abs(d_q2) <= zp and on_seg(p1, p2, q2, lp):
        return True
    if abs(d_p1) <= zq and on_seg(q1, q2, p1, lq):
        return True
    if abs(d_p2) <= zq and on_seg(q1, q2, p2, lq):
        return True
    return False


def _point_in_polygon(poly: np.ndarray, pt, tol: float = GEOM_TOL_M) -> bool:
    """Winding-number containment test; boundary points count as inside."""
    pt = np.asarray(pt, float)
    a = poly
    b = np.roll(poly, -1, axis=0)
    ex = b[:, 0] - a[:, 0]
    ey = b[:, 1] - a[:, 1]
    lab = np.hypot(ex, ey)
    # isLeft: >0 when pt is left of the directed edge a->b
    is_left = ex * (pt[1] - a[:, 1]) - ey * (pt[0] - a[:, 0])
    on_line = np.abs(is_left) <= tol * np.maximum(lab, tol)
    t = ((pt[0] - a[:, 0]) * ex + (pt[1] - a[:, 1]) * ey) / np.maximum(lab * lab, tol * tol)
    if np.any(on_line & (t >= -tol) & (t <= 1.0 + tol)):
        return True
    upward = (a[:, 1] <= pt[1]) & (b[:, 1] > pt[1]) & (is_left > 0)
    downward = (a[:, 1] > pt[1]) & (b[:, 1] <= pt[1]) & (is_left < 0)
    return int(np.count_nonzero(upward)) - int(np.count_nonzero(downward)) != 0


def _validate_polygon(poly: np.ndarray, index: int) -> np.ndarray:
    if poly.ndim != 2 or poly.shape[1] != 2:
        raise ValidationError(f"polygon {index}: expected an (N, 2) vertex list")
    if len(poly) < 3:
        raise ValidationError(f"polygon {index}: needs at least 3 vertices, got {len(poly)}")
    if not np.all(np.isfinite(poly)):
        raise ValidationError(f"polygon {index}: vertices must be finite")
    b = np.roll(poly, -1, axis=0)
    if np.any(np.hypot(*(b - poly).T) <= GEOM_TOL_M):
        raise ValidationError(f"polygon {index}: repeated or coincident consecutive vertices")
    if abs(_signed_area(poly)) <= GEOM_TOL_M:
        raise ValidationError(f"polygon {index}: degenerate (zero area)")
    n = len(poly)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # adjacent edges share a vertex by construction
            if _segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]):
                raise ValidationError(f"polygon {index}: self-intersecting (edges {i} and {j})")
    # normalize to counterclockwise orientation
    if _signed_area(poly) < 0.0:
        poly = poly[::-1].copy()
    return poly


@dataclass(frozen=True)
class BuildingMap:
    """Immutable set of simple, pairwise non-overlapping building footprints."""

    polygons: tuple

    def __post_init__(self):
        polys = tuple(
            _validate_polygon(np.array(p, dtype=float), i) for i, p in enumerate(self.polygons)
        )
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                if _polygons_overlap(polys[i], polys[j]):
                    raise ValidationError(f"polygons {i} and {j} overlap")
        for p in polys:
            p.setflags(write=False)
        object.__setattr__(self, "polygons", polys)
        if polys:
            edges_a = np.vstack([p for p in polys])
            edges_b = np.vstack([np.roll(p, -1, axis=0) for p in polys])
        else:
            edges_a = np.zeros((0, 2))
            edges_b = np.zeros((0, 2))
        object.__setattr__(self, "_edges_a", edges_a)
        object.__setattr__(self, "_edges_b", edges_b)

    @classmethod
    def from_dict(cls, d: dict) -> "BuildingMap":
        if not isinstance(d, dict) or "polygons" not in d:
            raise ValidationError('map JSON must be an object with a "polygons" key')
        return cls(polygons=tuple(d["polygons"]))

    @classmethod
    def from_json(cls, path) -> "BuildingMap":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"map file {path}: invalid JSON ({exc})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {"polygons": [p.tolist() for p in self.polygons]}

    def __len__(self) -> int:
        return len(self.polygons)


def _polygons_overlap(p: np.ndarray, q: np.ndarray) -> bool:
    for i in range(len(p)):
        for j in range(len(q)):
            if _segments_intersect(p[i], p[(i + 1) % len(p)], q[j], q[(j + 1) % len(q)]):
                return True
    return _point_in_polygon(q, p[0]) or _point_in_polygon(p, q[0])


def load_building_map(path) -> BuildingMap:
    return BuildingMap.from_json(path)


def indoor_polygon_index(bmap: BuildingMap, pt):
    """Index of the polygon containing pt (boundary counts), or None."""
    for i, poly in enumerate(bmap.polygons):
        if _point_in_polygon(poly, pt):
            return i
    return None


def is_indoor(bmap: BuildingMap, pt) -> bool:
    return indoor_polygon_index(bmap, pt) is not None


def _segment_blocked(bmap: BuildingMap, p, q, tol: float = GEOM_TOL_M) -> bool:
    """True when segment p->q touches or crosses any wall edge (vectorized)."""
    a = bmap._edges_a
    b = bmap._edges_b
    if len(a) == 0:
        return False
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    r = q - p
    lpq = float(np.hypot(*r))
    if lpq <= tol:
        # degenerate zero-length segment: blocked only if the point is on a wall
        ex = b[:, 0] - a[:, 0]
        ey = b[:, 1] - a[:, 1]
        lab = np.hypot(ex, ey)
        d = np.abs(ex * (p[1] - a[:, 1]) - ey * (p[0] - a[:, 0])) / np.maximum(lab, tol)
        t = ((p[0] - a[:, 0]) * ex + (p[1] - a[:, 1]) * ey) / np.maximum(lab * lab, tol * tol)
        return bool(np.any((d <= tol) & (t >= -tol) & (t <= 1.0 + tol)))
    ex = b[:, 0] - a[:, 0]
    ey = b[:, 1] - a[:, 1]
    lab = np.hypot(ex, ey)
    # edge endpoints relative to the p->q line
    d_a = r[0] * (a[:, 1] - p[1]) - r[1] * (a[:, 0] - p[0])
    d_b = r[0] * (b[:, 1] - p[1]) - r[1] * (b[:, 0] - p[0])
    # p and q relative to each edge line
    d_p = ex * (p[1] - a[:, 1]) - ey * (p[0] - a[:, 0])
    d_q = ex * (q[1] - a[:, 1]) - ey * (q[0] - a[:, 0])
    zpq = tol * lpq
    zab = tol * np.maximum(lab, tol)
    proper = (((d_a > zpq) & (d_b < -zpq)) | ((d_a < -zpq) & (d_b > zpq))) & (
        ((d_p > zab) & (d_q < -zab)) | ((d_p < -zab) & (d_q > zab))
    )
    if np.any(proper):
        return True

    def on_pq(pts):
        t = ((pts[:, 0] - p[0]) * r[0] + (pts[:, 1] - p[1]) * r[1]) / (lpq * lpq)
        return (t >= -tol / lpq) & (t <= 1.0 + tol / lpq)

    def on_edge(pt):
        t = ((pt[0] - a[:, 0]) * ex + (pt[1] - a[:, 1]) * ey) / np.maximum(lab * lab, tol * tol)
        return (t >= -tol) & (t <= 1.0 + tol)

    touch = (
        ((np.abs(d_a) <= zpq) & on_pq(a))
        | ((np.abs(d_b) <= zpq) & on_pq(b))
        | ((np.abs(d_p) <= zab) & on_edge(p))
        | ((np.abs(d_q) <= zab) & on_edge(q))
    )
    return bool(np.any(touch))


def is_los(bmap: BuildingMap, ap, ue) -> bool:
    """True iff the direct AP-UE segment is unobstructed and the UE is outdoors.

    The AP must be outdoors; grazing contact with a wall counts as blocked.
    """
    if is_indoor(bmap, ap):
        raise ValidationError(f"AP position {tuple(np.asarray(ap, float))} is inside a building")
    if is_indoor(bmap, ue):
        return False
    return not _segment_blocked(bmap, ap, ue)


def classify_blockage(bmap: BuildingMap, ap, ue) -> Blockage:
    """LOS / geometry-blocked label for the direct path (static environment)."""
    return Blockage.LOS if is_los(bmap, ap, ue) else Blockage.GEOMETRY_BLOCKED


def outer_wall_distance(bmap: BuildingMap, ap, ue) -> WallDistance:
    """Split the AP -> indoor-UE segment at its first outer-wall crossing.

    Returns the 2D distance from the AP to that crossing and the indoor
    depth beyond it; the two always sum to the straight-line AP-UE
    distance. The UE must be indoors and the AP outdoors.
    """
    ap = np.asarray(ap, float)
    ue = np.asarray(ue, float)
    if is_indoor(bmap, ap):
        raise ValidationError(f"AP position {tuple(ap)} is inside a building")
    idx = indoor_polygon_index(bmap, ue)
    if idx is None:
        raise ValidationError(f"UE position {tuple(ue)} is not inside any building")
    poly = bmap.polygons[idx]
    r = ue - ap
    total = float(np.hypot(*r))
    if total <= GEOM_TOL_M:
        return WallDistance(wall_m=0.0, depth_m=0.0)
    t_min = None
    n = len(poly)
    for i in range(n):
        a = poly[i]
        b = poly[(i + 1) % n]
        s = b - a
        denom = r[0] * s[1] - r[1] * s[0]
        qp = a - ap
        if abs(denom) > GEOM_TOL_M * total * float(np.hypot(*s)):
            t = (qp[0] * s[1] - qp[1] * s[0]) / denom
            u = (qp[0] * r[1] - qp[1] * r[0]) / denom
            if -GEOM_TOL_M <= u <= 1.0 + GEOM_TOL_M and -GEOM_TOL_M <= t <= 1.0 + GEOM_TOL_M:
                t_min = t if t_min is None else min(t_min, t)
        elif abs(qp[0] * r[1] - qp[1] * r[0]) <= GEOM_TOL_M * total:
            # collinear edge: nearest overlapping point along the segment
            ta = float(np.dot(a - ap, r)) / (total * total)
            tb = float(np.dot(b - ap, r)) / (total * total)
            lo, hi = min(ta, tb), max(ta, tb)
            if hi >= -GEOM_TOL_M and lo <= 1.0 + GEOM_TOL_M:
                t_min = max(lo, 0.0) if t_min is None else min(t_min, max(lo, 0.0))
    if t_min is None:
        # cannot happen for a valid outdoor->indoor segment; guard anyway
        raise ValidationError("no wall crossing found on the AP-UE segment")
    wall = float(max(min(t_min, 1.0), 0.0) * total)
    return WallDistance(wall_m=wall, depth_m=float(total - wall))
