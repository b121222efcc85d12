"""Planar computational-geometry kernel for map features.

All coordinates are meters in a projected CRS (the source data is Swiss
national grid), so every computation here is plain Euclidean math; there is
no geodesic handling. Geometries are immutable values and every function in
this module is pure, so concurrent use needs no locking.

Topological predicates are tolerance-aware: ``relate`` takes an ``eps``
buffer distance that absorbs positional inaccuracy in vectorized features.
Overlap ratios (IoU) are computed by deterministic grid sampling with a
documented 1 m default cell size rather than exact polygon clipping.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import shapely

from .errors import GeometryError, NoDirectionError, UnsupportedGeometryError

Coord = tuple[float, float]
Ring = tuple[Coord, ...]

AREAL_KINDS = ("polygon", "multipolygon")

# Predicate names returned by relate().
INTERSECTS = "intersects"
TOUCHES = "touches"
CONTAINS = "contains"
WITHIN = "within"
CROSSES = "crosses"
OVERLAPS = "overlaps"
DISJOINT = "disjoint"


class CardinalDirection(str, enum.Enum):
    """Eight compass sectors, each covering a half-open 45 degree arc."""

    N = "N"
    NE = "NE"
    E = "E"
    SE = "SE"
    S = "S"
    SW = "SW"
    W = "W"
    NW = "NW"

    @property
    def opposite(self) -> "CardinalDirection":
        return _OPPOSITE[self]


_OPPOSITE = {
    CardinalDirection.N: CardinalDirection.S,
    CardinalDirection.S: CardinalDirection.N,
    CardinalDirection.E: CardinalDirection.W,
    CardinalDirection.W: CardinalDirection.E,
    CardinalDirection.NE: CardinalDirection.SW,
    CardinalDirection.SW: CardinalDirection.NE,
    CardinalDirection.SE: CardinalDirection.NW,
    CardinalDirection.NW: CardinalDirection.SE,
}

# Counterclockwise from East, 45 degrees per sector, lower edge inclusive.
_SECTORS = (
    CardinalDirection.E,
    CardinalDirection.NE,
    CardinalDirection.N,
    CardinalDirection.NW,
    CardinalDirection.W,
    CardinalDirection.SW,
    CardinalDirection.S,
    CardinalDirection.SE,
)


class BBox(NamedTuple):
    """Axis-aligned bounding box in meters."""

    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def expand(self, d: float) -> "BBox":
        return BBox(self.min_x - d, self.min_y - d, self.max_x + d, self.max_y + d)

    def union(self, other: "BBox") -> "BBox":
        return BBox(
            min(self.min_x, other.min_x),
            min(self.min_y, other.min_y),
            max(self.max_x, other.max_x),
            max(self.max_y, other.max_y),
        )

    def intersects(self, other: "BBox") -> bool:
        return not (
            self.max_x < other.min_x
            or other.max_x < self.min_x
            or self.max_y < other.min_y
            or other.max_y < self.min_y
        )

    def distance(self, other: "BBox") -> float:
        dx = max(other.min_x - self.max_x, self.min_x - other.max_x, 0.0)
        dy = max(other.min_y - self.max_y, self.min_y - other.max_y, 0.0)
        return math.hypot(dx, dy)


def _check_coord(pt: Sequence[float]) -> Coord:
    if len(pt) != 2:
        raise GeometryError(f"coordinate must be (x, y), got {pt!r}")
    x, y = float(pt[0]), float(pt[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError(f"non-finite coordinate {pt!r}")
    return (x, y)


def _ring_signed_area(ring: Ring) -> float:
    acc = 0.0
    for (x0, y0), (x1, y1) in zip(ring, ring[1:]):
        acc += x0 * y1 - x1 * y0
    return acc / 2.0


def _normalize_ring(points: Iterable[Sequence[float]], ccw: bool) -> Ring:
    """Close, validate, and orient a ring. Wrong winding is repaired."""
    pts = [_check_coord(p) for p in points]
    if len(pts) >= 2 and pts[0] == pts[-1]:
        pts = pts[:-1]
    if len(pts) < 3:
        raise GeometryError("ring needs at least 3 distinct vertices")
    signed = _ring_signed_area(tuple(pts + [pts[0]]))
    if signed == 0.0:
        raise GeometryError("degenerate ring with zero area")
    if (signed > 0.0) != ccw:
        pts.reverse()
    return tuple(pts + [pts[0]])


def _normalize_polygon(rings: Sequence[Iterable[Sequence[float]]]) -> tuple[Ring, ...]:
    if not rings:
        raise GeometryError("polygon needs an exterior ring")
    exterior = _normalize_ring(rings[0], ccw=True)
    holes = tuple(_normalize_ring(r, ccw=False) for r in rings[1:])
    return (exterior,) + holes


@dataclass(frozen=True)
class Geometry:
    """Immutable point, linestring, polygon, or multipolygon.

    Rings are stored closed (first vertex repeated last), exteriors wound
    counterclockwise and holes clockwise; construction repairs winding
    rather than rejecting it.
    """

    kind: str
    coords: tuple

    @staticmethod
    def point(x: float, y: float) -> "Geometry":
        return Geometry("point", _check_coord((x, y)))

    @staticmethod
    def linestring(points: Iterable[Sequence[float]]) -> "Geometry":
        pts = tuple(_check_coord(p) for p in points)
        if len(pts) < 2:
            raise GeometryError("linestring needs at least 2 points")
        return Geometry("linestring", pts)

    @staticmethod
    def polygon(exterior: Iterable[Sequence[float]], holes: Sequence[Iterable[Sequence[float]]] = ()) -> "Geometry":
        return Geometry("polygon", _normalize_polygon([exterior, *holes]))

    @staticmethod
    def multipolygon(polygons: Sequence[Sequence[Iterable[Sequence[float]]]]) -> "Geometry":
        if not polygons:
            raise GeometryError("multipolygon needs at least one part")
        return Geometry("multipolygon", tuple(_normalize_polygon(p) for p in polygons))

    @property
    def is_areal(self) -> bool:
        return self.kind in AREAL_KINDS

    def polygons(self) -> tuple[tuple[Ring, ...], ...]:
        """Polygon parts as ring tuples; empty for non-areal kinds."""
        if self.kind == "polygon":
            return (self.coords,)
        if self.kind == "multipolygon":
            return self.coords
        return ()

    @cached_property
    def _shp(self):
        if self.kind == "point":
            return shapely.Point(self.coords)
        if self.kind == "linestring":
            return shapely.LineString(self.coords)
        if self.kind == "polygon":
            return shapely.Polygon(self.coords[0], self.coords[1:])
        return shapely.MultiPolygon(
            [(part[0], list(part[1:])) for part in self.coords]
        )


def _from_shapely(obj) -> Geometry:
    if obj.is_empty:
        raise GeometryError("empty geometry")
    t = obj.geom_type
    if t == "Point":
        return Geometry.point(obj.x, obj.y)
    if t == "LineString":
        return Geometry.linestring(list(obj.coords))
    if t == "Polygon":
        return Geometry.polygon(list(obj.exterior.coords), [list(r.coords) for r in obj.interiors])
    if t == "MultiPolygon":
        return Geometry.multipolygon(
            [[list(p.exterior.coords)] + [list(r.coords) for r in p.interiors] for p in obj.geoms]
        )
    raise GeometryError(f"unsupported geometry type {t}")


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

def area(g: Geometry) -> float:
    """Area in square meters; holes subtract, multipolygon parts sum."""
    if not g.is_areal:
        raise UnsupportedGeometryError(f"area undefined for {g.kind}")
    total = 0.0
    for part in g.polygons():
        total += _ring_signed_area(part[0])
        for hole in part[1:]:
            total += _ring_signed_area(hole)  # holes are CW, negative
    return total


def length(g: Geometry) -> float:
    """Sum of segment lengths in meters."""
    if g.kind != "linestring":
        raise UnsupportedGeometryError(f"length undefined for {g.kind}")
    return sum(math.dist(a, b) for a, b in zip(g.coords, g.coords[1:]))


def distance(a: Geometry, b: Geometry) -> float:
    """Minimum Euclidean distance between the two geometries; 0 when they intersect."""
    return float(a._shp.distance(b._shp))


def bbox(g: Geometry) -> BBox:
    if g.kind == "point":
        x, y = g.coords
        return BBox(x, y, x, y)
    if g.kind == "linestring":
        pts = g.coords
    else:
        pts = [pt for part in g.polygons() for pt in part[0]]
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return BBox(min(xs), min(ys), max(xs), max(ys))


def centroid(g: Geometry) -> Geometry:
    """Area-weighted centroid for areal kinds, length-weighted for lines."""
    if g.kind == "point":
        return g
    if g.kind == "linestring":
        total = length(g)
        if total == 0.0:
            return Geometry.point(*g.coords[0])
        cx = cy = 0.0
        for p0, p1 in zip(g.coords, g.coords[1:]):
            seg = math.dist(p0, p1)
            cx += (p0[0] + p1[0]) / 2.0 * seg
            cy += (p0[1] + p1[1]) / 2.0 * seg
        return Geometry.point(cx / total, cy / total)
    a_total = 0.0
    cx = cy = 0.0
    for part in g.polygons():
        for ring in part:
            signed = _ring_signed_area(ring)
            rx = ry = 0.0
            for (x0, y0), (x1, y1) in zip(ring, ring[1:]):
                cross = x0 * y1 - x1 * y0
                rx += (x0 + x1) * cross
                ry += (y0 + y1) * cross
            a_total += signed
            cx += rx / 6.0
            cy += ry / 6.0
    if a_total == 0.0:
        raise GeometryError("centroid of zero-area geometry")
    return Geometry.point(cx / a_total, cy / a_total)


# ---------------------------------------------------------------------------
# Buffering and predicates
# ---------------------------------------------------------------------------

# 8 segments per quadrant = 32 per full circle, the documented minimum.
_QUAD_SEGS = 8

# Stand-in radius for the degenerate r=0 hull of points and lines.
_ZERO_BUFFER = 1e-9


def buffer(g: Geometry, r: float) -> Geometry:
    """Polygonal approximation of all points within distance ``r`` of ``g``.

    The result always contains ``g``. With r=0 an areal geometry is returned
    unchanged; points and lines get a degenerate sliver hull so the result
    stays polygonal.
    """
    if r < 0:
        raise GeometryError(f"negative buffer radius {r}")
    if r < _ZERO_BUFFER:
        # below float resolution GEOS may collapse the result entirely
        if g.is_areal:
            return g
        r = _ZERO_BUFFER
    return _from_shapely(g._shp.buffer(r, quad_segs=_QUAD_SEGS))


def _interior_overlap(a: Geometry, b: Geometry, eps: float) -> bool:
    """Whether the shared region exceeds the eps degeneracy threshold.

    Point operands use an exact interior test; areal pairs compare overlap
    area against eps^2; any pair involving a line compares shared length
    against eps.
    """
    if a.kind == "point" and b.kind == "point":
        return True  # within eps of each other: same location up to tolerance
    if a.kind == "point":
        return bool(b._shp.contains(a._shp))
    if b.kind == "point":
        return bool(a._shp.contains(b._shp))
    inter = a._shp.intersection(b._shp)
    if a.is_areal and b.is_areal:
        return float(inter.area) > eps * eps
    return float(inter.length) > eps


def _covers(a: Geometry, b: Geometry, eps: float) -> bool:
    if eps == 0:
        return bool(a._shp.covers(b._shp))
    return bool(a._shp.buffer(eps, quad_segs=_QUAD_SEGS).covers(b._shp))


def relate(a: Geometry, b: Geometry, eps: float = 0.0) -> frozenset[str]:
    """Tolerance-aware topological predicates between two geometries.

    intersects holds iff distance(a, b) <= eps; touches iff they intersect
    without interior overlap; contains(a, b) iff buffer(a, eps) covers b;
    crosses only for line/line and line/areal pairs. A disjoint result
    excludes every other predicate.
    """
    if eps < 0:
        raise GeometryError(f"negative eps {eps}")
    if distance(a, b) > eps:
        return frozenset({DISJOINT})
    out = {INTERSECTS}
    overlap = _interior_overlap(a, b, eps)
    if not overlap:
        out.add(TOUCHES)
    if _covers(a, b, eps):
        out.add(CONTAINS)
    if _covers(b, a, eps):
        out.add(WITHIN)
    line_pair = (
        (a.kind == "linestring" and (b.kind == "linestring" or b.is_areal))
        or (b.kind == "linestring" and a.is_areal)
    )
    if line_pair and bool(a._shp.crosses(b._shp)):
        out.add(CROSSES)
    same_dim = (a.is_areal and b.is_areal) or (a.kind == b.kind == "linestring")
    if overlap and same_dim and CONTAINS not in out and WITHIN not in out:
        out.add(OVERLAPS)
    return frozenset(out)


def cardinal_between(c1: Coord, c2: Coord) -> CardinalDirection:
    """Compass sector of the vector from point c1 to point c2."""
    if c1 == c2:
        raise NoDirectionError("coincident centroids have no direction")
    theta = math.degrees(math.atan2(c2[1] - c1[1], c2[0] - c1[0]))
    idx = int(((theta + 22.5) % 360.0) // 45.0)
    return _SECTORS[idx]


def cardinal(from_g: Geometry, to_g: Geometry) -> CardinalDirection:
    """Compass sector of the vector between the two centroids.

    Sectors are half-open (lower edge inclusive), which makes
    cardinal(a, b) exactly the 180-degree opposite of cardinal(b, a).
    """
    return cardinal_between(centroid(from_g).coords, centroid(to_g).coords)


# ---------------------------------------------------------------------------
# Grid-sampled overlap
# ---------------------------------------------------------------------------

_MAX_GRID_CELLS = 30_000_000


def _points_in_areal(g: Geometry, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized even-odd test; cell centers on a boundary are not counted."""
    inside = np.zeros(xs.shape, dtype=bool)
    for part in g.polygons():
        for ring in part:
            v = np.asarray(ring)
            x0, y0 = v[:-1, 0], v[:-1, 1]
            x1, y1 = v[1:, 0], v[1:, 1]
            for i in range(len(x0)):
                if y0[i] == y1[i]:
                    continue
                crosses_ray = (y0[i] > ys) != (y1[i] > ys)
                if not crosses_ray.any():
                    continue
                x_int = x0[i] + (ys - y0[i]) * (x1[i] - x0[i]) / (y1[i] - y0[i])
                inside ^= crosses_ray & (xs < x_int)
    return inside


def point_in_areal(g: Geometry, x: float, y: float) -> bool:
    """Even-odd point-in-polygon; boundary points count as inside."""
    if not g.is_areal:
        raise UnsupportedGeometryError(f"point-in test undefined for {g.kind}")
    if g._shp.boundary.distance(shapely.Point(x, y)) <= 1e-12:
        return True
    return bool(_points_in_areal(g, np.asarray([x]), np.asarray([y]))[0])


def grid_overlap(a: Geometry, b: Geometry, cell: float = 1.0) -> tuple[float, float]:
    """Deterministic sampled (intersection, union) areas of two areal geometries.

    Cell centers over the union bounding box are tested against each
    geometry; each inside center contributes one cell area. Cell size is
    1 m unless overridden.
    """
    for g in (a, b):
        if not g.is_areal:
            raise UnsupportedGeometryError(f"overlap undefined for {g.kind}")
    if cell <= 0:
        raise GeometryError(f"invalid cell size {cell}")
    box = bbox(a).union(bbox(b))
    nx = max(1, math.ceil((box.max_x - box.min_x) / cell))
    ny = max(1, math.ceil((box.max_y - box.min_y) / cell))
    if nx * ny > _MAX_GRID_CELLS:
        raise GeometryError(
            f"overlap grid of {nx}x{ny} cells exceeds limit; use a larger cell size"
        )
    xs = box.min_x + (np.arange(nx) + 0.5) * cell
    ys = box.min_y + (np.arange(ny) + 0.5) * cell
    gx, gy = np.meshgrid(xs, ys)
    gx = gx.ravel()
    gy = gy.ravel()
    in_a = _points_in_areal(a, gx, gy)
    in_b = _points_in_areal(b, gx, gy)
    cell_area = cell * cell
    inter = float(np.count_nonzero(in_a & in_b)) * cell_area
    union = float(np.count_nonzero(in_a | in_b)) * cell_area
    return inter, union


def overlap_ratio(a: Geometry, b: Geometry, cell: float = 1.0) -> float:
    """Sampled intersection-over-union of two areal geometries, in [0, 1]."""
    inter, union = grid_overlap(a, b, cell)
    if union == 0.0:
        # Both geometries missed every cell center; fall back to exact equality.
        return 1.0 if a == b else 0.0
    return inter / union


# ---------------------------------------------------------------------------
# WKT / GeoJSON serialization
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    s = repr(float(v))
    if s.endswith(".0"):
        s = s[:-2]
    if "e" in s or "E" in s:
        s = f"{v:.12f}".rstrip("0").rstrip(".")
        if s in ("", "-"):
            s = "0"
    return s


def _fmt_pt(pt: Coord) -> str:
    return f"{_fmt(pt[0])} {_fmt(pt[1])}"


def _fmt_ring(ring: Ring) -> str:
    return "(" + ", ".join(_fmt_pt(p) for p in ring) + ")"


def to_wkt(g: Geometry) -> str:
    """WKT text at full precision, never in scientific notation."""
    if g.kind == "point":
        return f"POINT ({_fmt_pt(g.coords)})"
    if g.kind == "linestring":
        return "LINESTRING (" + ", ".join(_fmt_pt(p) for p in g.coords) + ")"
    if g.kind == "polygon":
        return "POLYGON (" + ", ".join(_fmt_ring(r) for r in g.coords) + ")"
    parts = ", ".join("(" + ", ".join(_fmt_ring(r) for r in part) + ")" for part in g.coords)
    return f"MULTIPOLYGON ({parts})"


def from_wkt(text: str) -> Geometry:
    try:
        obj = shapely.from_wkt(text)
    except Exception as exc:
        raise GeometryError(f"invalid WKT: {exc}") from exc
    return _from_shapely(obj)


def to_geojson(g: Geometry) -> dict:
    if g.kind == "point":
        return {"type": "Point", "coordinates": list(g.coords)}
    if g.kind == "linestring":
        return {"type": "LineString", "coordinates": [list(p) for p in g.coords]}
    if g.kind == "polygon":
        return {"type": "Polygon", "coordinates": [[list(p) for p in r] for r in g.coords]}
    return {
        "type": "MultiPolygon",
        "coordinates": [[[list(p) for p in r] for r in part] for part in g.coords],
    }


_GEOJSON_KINDS = {"Point", "LineString", "Polygon", "MultiPolygon"}


def from_geojson(obj: dict) -> Geometry:
    if not isinstance(obj, dict) or obj.get("type") not in _GEOJSON_KINDS:
        raise GeometryError(f"unsupported GeoJSON geometry: {obj!r:.120}")
    t = obj["type"]
    coords = obj.get("coordinates")
    if coords is None:
        raise GeometryError("GeoJSON geometry without coordinates")
    if t == "Point":
        return Geometry.point(coords[0], coords[1])
    if t == "LineString":
        return Geometry.linestring(coords)
    if t == "Polygon":
        return Geometry.polygon(coords[0], coords[1:])
    return Geometry.multipolygon(coords)
