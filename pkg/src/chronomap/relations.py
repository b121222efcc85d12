"""Precomputation of spatial and temporal relation edges.

All pairwise relations are materialized into the store at build time so
query evaluation never touches geometry. Spatial predicates run through
the tolerance-aware geometry kernel; temporal matching links features in
adjacent map years by overlap (IoU for areal features, buffered-centerline
length share for lines). Every edge is co-materialized with its inverse.

Pair computations are pure and independent; edges are sorted before
materialization so any parallel execution order yields the same store.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from . import geometry as geo
from . import kgstore as kg
from .errors import ChronomapError, ConfigError
from .kgstore import CARDINAL_PREDICATES, CMO, CMR, Store, Triple


@dataclass(frozen=True)
class RelationConfig:
    eps_m: float = 25.0
    near_m: float = 100.0
    cardinal_max_m: float = 2000.0
    change_iou: float = 0.3
    transform_overlap: float = 0.5
    timestamps: tuple[int, ...] = (1877, 1901, 1916, 1930)

    def __post_init__(self):
        for name in ("eps_m", "near_m", "cardinal_max_m"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        for name in ("change_iou", "transform_overlap"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ConfigError(f"{name} must be in (0, 1]")
        ts = tuple(self.timestamps)
        if list(ts) != sorted(set(ts)):
            raise ConfigError("timestamps must be strictly increasing")
        object.__setattr__(self, "timestamps", ts)

    @property
    def config_hash(self) -> str:
        doc = json.dumps(self.__dict__, sort_keys=True, default=list)
        return hashlib.sha256(doc.encode()).hexdigest()[:12]


@dataclass(frozen=True, order=True)
class RelationEdge:
    src: str
    predicate: str
    dst: str
    metric: str = field(compare=False, default="")
    value: float = field(compare=False, default=0.0)


@dataclass(frozen=True)
class FeatureGeom:
    """Minimal per-feature view the relation passes need."""

    iri: str
    feature_type: str
    year: int
    geometry: geo.Geometry


def candidate_pairs(features: list[FeatureGeom], cfg: RelationConfig) -> list[tuple[int, int]]:
    """Index pairs whose bounding boxes, expanded by the largest threshold,
    intersect. A superset of every pair that can produce an edge."""
    reach = max(cfg.eps_m, cfg.near_m, cfg.cardinal_max_m)
    boxes = [geo.bbox(f.geometry).expand(reach) for f in features]
    order = sorted(range(len(features)), key=lambda i: boxes[i].min_x)
    out = []
    active: list[int] = []
    for i in order:
        box = boxes[i]
        still = []
        for j in active:
            if boxes[j].max_x >= box.min_x:
                still.append(j)
                if boxes[j].intersects(box):
                    out.append((min(i, j), max(i, j)))
        active = still + [i]
    out.sort()
    return out


def _topo_edges(a: FeatureGeom, b: FeatureGeom, rels: frozenset[str]) -> Iterable[RelationEdge]:
    for name in ("intersects", "touches", "crosses"):
        if name in rels:
            yield RelationEdge(a.iri, CMR + name, b.iri, "eps_relate", 1.0)
            yield RelationEdge(b.iri, CMR + name, a.iri, "eps_relate", 1.0)
    if "contains" in rels:
        yield RelationEdge(a.iri, CMR + "contains", b.iri, "eps_relate", 1.0)
        yield RelationEdge(b.iri, CMR + "within", a.iri, "eps_relate", 1.0)
    if "within" in rels:
        yield RelationEdge(a.iri, CMR + "within", b.iri, "eps_relate", 1.0)
        yield RelationEdge(b.iri, CMR + "contains", a.iri, "eps_relate", 1.0)


def spatial_pair_edges(
    a: FeatureGeom,
    b: FeatureGeom,
    cfg: RelationConfig,
    centroid_a: tuple[float, float] | None = None,
    centroid_b: tuple[float, float] | None = None,
) -> list[RelationEdge]:
    """All spatial edges (with inverses) for one feature pair."""
    edges: list[RelationEdge] = []
    ca = centroid_a or geo.centroid(a.geometry).coords
    cb = centroid_b or geo.centroid(b.geometry).coords
    if geo.bbox(a.geometry).distance(geo.bbox(b.geometry)) <= max(cfg.eps_m, cfg.near_m):
        d = geo.distance(a.geometry, b.geometry)
        if d <= cfg.eps_m:
            edges.extend(_topo_edges(a, b, geo.relate(a.geometry, b.geometry, cfg.eps_m)))
        elif d <= cfg.near_m:
            edges.append(RelationEdge(a.iri, CMR + "near", b.iri, "distance_m", d))
            edges.append(RelationEdge(b.iri, CMR + "near", a.iri, "distance_m", d))
    cd = math.dist(ca, cb)
    if 0.0 < cd <= cfg.cardinal_max_m:
        direction = geo.cardinal_between(cb, ca)  # sector of a as seen from b
        edges.append(RelationEdge(a.iri, CARDINAL_PREDICATES[direction.value], b.iri, "centroid_distance_m", cd))
        edges.append(
            RelationEdge(b.iri, CARDINAL_PREDICATES[direction.opposite.value], a.iri, "centroid_distance_m", cd)
        )
    return edges


def compute_spatial(features: list[FeatureGeom], cfg: RelationConfig) -> list[RelationEdge]:
    """Spatial edges among features of a single year."""
    years = {f.year for f in features}
    if len(years) > 1:
        raise ChronomapError(f"spatial pass expects one year, got {sorted(years)}")
    centroids = [geo.centroid(f.geometry).coords for f in features]
    edges: list[RelationEdge] = []
    for i, j in candidate_pairs(features, cfg):
        edges.extend(spatial_pair_edges(features[i], features[j], cfg, centroids[i], centroids[j]))
    return sorted(set(edges))


def linear_change_share(a: geo.Geometry, b: geo.Geometry, eps_m: float) -> float:
    """Symmetric buffered-centerline overlap share for two linestrings."""
    la, lb = geo.length(a), geo.length(b)
    if la + lb == 0.0:
        return 0.0
    buf_a = geo.buffer(a, eps_m)._shp
    buf_b = geo.buffer(b, eps_m)._shp
    shared = a._shp.intersection(buf_b).length + b._shp.intersection(buf_a).length
    return float(shared) / (la + lb)


def temporal_pair_edges(a: FeatureGeom, b: FeatureGeom, cfg: RelationConfig) -> list[RelationEdge]:
    """Change/transform edges from feature ``a`` to next-year feature ``b``.

    Same type: changedTo when areal IoU (or linear buffered share) clears
    change_iou. Different type: transformedTo when the intersection covers
    transform_overlap of the smaller area. Point features have no extent
    and never match.
    """
    ga, gb = a.geometry, b.geometry
    edges: list[RelationEdge] = []
    if a.feature_type == b.feature_type:
        if ga.is_areal and gb.is_areal:
            iou = geo.overlap_ratio(ga, gb)
            if iou >= cfg.change_iou:
                edges.append(RelationEdge(a.iri, CMR + "changedTo", b.iri, "iou", iou))
                edges.append(RelationEdge(b.iri, CMR + "changedFrom", a.iri, "iou", iou))
        elif ga.kind == "linestring" and gb.kind == "linestring":
            share = linear_change_share(ga, gb, cfg.eps_m)
            if share >= cfg.change_iou:
                edges.append(RelationEdge(a.iri, CMR + "changedTo", b.iri, "buffered_share", share))
                edges.append(RelationEdge(b.iri, CMR + "changedFrom", a.iri, "buffered_share", share))
    elif ga.is_areal and gb.is_areal:
        inter, _ = geo.grid_overlap(ga, gb)
        floor = cfg.transform_overlap * min(geo.area(ga), geo.area(gb))
        if inter >= floor and inter > 0.0:
            share = inter / min(geo.area(ga), geo.area(gb))
            edges.append(RelationEdge(a.iri, CMR + "transformedTo", b.iri, "overlap_share", share))
            edges.append(RelationEdge(b.iri, CMR + "transformedFrom", a.iri, "overlap_share", share))
    return edges


def compute_temporal(features: list[FeatureGeom], cfg: RelationConfig) -> list[RelationEdge]:
    """Temporal edges across every adjacent configured year pair."""
    by_year: dict[int, list[FeatureGeom]] = {}
    for f in features:
        by_year.setdefault(f.year, []).append(f)
    edges: list[RelationEdge] = []
    for y0, y1 in zip(cfg.timestamps, cfg.timestamps[1:]):
        current, following = by_year.get(y0, []), by_year.get(y1, [])
        if not current or not following:
            continue
        boxes_next = [geo.bbox(f.geometry).expand(cfg.eps_m) for f in following]
        for a in current:
            box_a = geo.bbox(a.geometry).expand(cfg.eps_m)
            for b, box_b in zip(following, boxes_next):
                if box_a.intersects(box_b):
                    edges.extend(temporal_pair_edges(a, b, cfg))
    return sorted(set(edges))


def materialize(
    edges: Iterable[RelationEdge],
    store: Store,
    cfg: RelationConfig,
    provenance_path: str | Path | None = None,
) -> int:
    """Insert edges as triples; returns the number of new triples.

    The provenance log records one JSON line per distinct edge with the
    metric that produced it and the config hash for reproducibility.
    """
    unique = sorted(set(edges))
    before = len(store)
    for edge in unique:
        assert edge.src != edge.dst, "self-edge"
        store.insert(Triple(kg.iri(edge.src), kg.iri(edge.predicate), kg.iri(edge.dst)))
    if provenance_path is not None:
        with open(provenance_path, "w", encoding="utf-8") as fh:
            for edge in unique:
                fh.write(
                    json.dumps(
                        {
                            "from": edge.src,
                            "to": edge.dst,
                            "predicate": edge.predicate,
                            "metric": edge.metric,
                            "value": round(edge.value, 9),
                            "config_hash": cfg.config_hash,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
    return len(store) - before


def features_from_store(store: Store) -> list[FeatureGeom]:
    """Collect per-feature type/year/geometry views from property triples."""
    type_p = kg.iri(CMO + "featureType")
    year_p = kg.iri(CMO + "year")
    geometries = store.geometries
    out = []
    for t in store.match(None, type_p, None):
        iri_ = t.s.value
        years = store.match(t.s, year_p, None)
        if not years or iri_ not in geometries:
            continue
        out.append(
            FeatureGeom(
                iri=iri_,
                feature_type=t.o.value,
                year=years[0].o.value,
                geometry=geometries[iri_],
            )
        )
    return out


def precompute(store: Store, cfg: RelationConfig, provenance_path: str | Path | None = None) -> int:
    """Run both relation passes over everything in the store."""
    features = features_from_store(store)
    edges: list[RelationEdge] = []
    by_year: dict[int, list[FeatureGeom]] = {}
    for f in features:
        by_year.setdefault(f.year, []).append(f)
    for year in sorted(by_year):
        edges.extend(compute_spatial(by_year[year], cfg))
    edges.extend(compute_temporal(features, cfg))
    return materialize(edges, store, cfg, provenance_path)
