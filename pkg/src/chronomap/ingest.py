"""Feature ingestion: GeoJSON files to knowledge-graph triples.

Loads per-(sheet, year) FeatureCollections, derives geometric metrics,
assigns municipalities by tolerance-aware intersection, and enriches
features with current names from a gazetteer client. Ingestion is
deterministic: the same inputs and config always produce byte-identical
store dumps.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from . import geometry as geo
from . import kgstore as kg
from .errors import GeometryError, IngestError
from .kgstore import CMF, CMO, Store, Triple

log = logging.getLogger(__name__)


@dataclass
class IngestConfig:
    type_attribute: str = "feature_type"
    enrich_cap_m: float = 50.0
    eps_m: float = 25.0


@dataclass(frozen=True)
class FeatureRecord:
    local_id: str
    feature_type: str
    year: int
    sheet: str
    geometry: geo.Geometry
    attributes: dict = field(default_factory=dict, hash=False, compare=False)

    @property
    def iri(self) -> str:
        return CMF + f"{_slug(self.sheet)}_{self.year}_{_slug(self.feature_type)}_{self.local_id}"


@dataclass(frozen=True)
class MunicipalityBoundary:
    name: str
    geometry: geo.Geometry


@dataclass(frozen=True)
class GazetteerEntry:
    feature_class: str
    name: str
    external_id: str
    point: geo.Geometry


@dataclass(frozen=True)
class GazetteerMatch:
    name: str
    external_id: str
    match_distance_m: float


class GazetteerClient(Protocol):
    def candidates(self, feature_class: str) -> list[GazetteerEntry]: ...


class FixtureGazetteer:
    """Gazetteer backed by a JSON array of {class, name, external-id, point}."""

    def __init__(self, path: str | Path):
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        self._entries: dict[str, list[GazetteerEntry]] = {}
        for row in raw:
            entry = GazetteerEntry(
                feature_class=row["class"],
                name=row["name"],
                external_id=row["external-id"],
                point=geo.Geometry.point(*row["point"]),
            )
            self._entries.setdefault(entry.feature_class, []).append(entry)

    def candidates(self, feature_class: str) -> list[GazetteerEntry]:
        return self._entries.get(feature_class, [])


@dataclass
class IngestReport:
    ingested: int = 0
    skipped: int = 0
    warnings: list[str] = field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)
        log.warning("%s", message)


def _slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_") or "x"


def ingest_features(
    path: str | Path,
    year: int,
    sheet: str,
    cfg: IngestConfig | None = None,
    report: IngestReport | None = None,
) -> list[FeatureRecord]:
    """Read a GeoJSON FeatureCollection into FeatureRecords.

    Local ids follow input order and are zero-padded, so re-running on the
    same file yields the same IRIs. Features without the configured type
    attribute or with invalid geometry are skipped with a tallied warning;
    a file that is not a FeatureCollection is fatal.
    """
    cfg = cfg or IngestConfig()
    report = report if report is not None else IngestReport()
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestError(f"cannot read feature file {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise IngestError(f"{path}: not a GeoJSON FeatureCollection")
    records = []
    for idx, feature in enumerate(doc.get("features", [])):
        props = feature.get("properties") or {}
        ftype = props.get(cfg.type_attribute)
        if not ftype:
            report.skipped += 1
            report.warn(f"{path}: feature {idx} missing {cfg.type_attribute!r}, skipped")
            continue
        raw_geom = feature.get("geometry")
        try:
            if raw_geom is None:
                raise GeometryError("null geometry")
            geometry = geo.from_geojson(raw_geom)
        except GeometryError as exc:
            report.skipped += 1
            report.warn(f"{path}: feature {idx} has invalid geometry ({exc}), skipped")
            continue
        records.append(
            FeatureRecord(
                local_id=f"{idx:04d}",
                feature_type=str(ftype).strip().lower(),
                year=int(year),
                sheet=str(sheet),
                geometry=geometry,
                attributes={str(k): str(v) for k, v in props.items()},
            )
        )
    report.ingested += len(records)
    return records


def core_triples(record: FeatureRecord) -> list[Triple]:
    subject = kg.iri(record.iri)
    return [
        Triple(subject, kg.iri(CMO + "featureType"), kg.lit_string(record.feature_type)),
        Triple(subject, kg.iri(CMO + "year"), kg.lit_year(record.year)),
        Triple(subject, kg.iri(CMO + "sheet"), kg.lit_string(record.sheet)),
    ]


def derive_metrics(record: FeatureRecord) -> list[Triple]:
    """areaSqm for areal features, lengthM for lines, nothing for points.

    Values are rounded to whole square meters / meters.
    """
    subject = kg.iri(record.iri)
    if record.geometry.is_areal:
        value = float(round(geo.area(record.geometry)))
        return [Triple(subject, kg.iri(CMO + "areaSqm"), kg.lit_decimal(value))]
    if record.geometry.kind == "linestring":
        value = float(round(geo.length(record.geometry)))
        return [Triple(subject, kg.iri(CMO + "lengthM"), kg.lit_decimal(value))]
    return []


def load_boundaries(path: str | Path) -> list[MunicipalityBoundary]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise IngestError(f"{path}: boundaries must be a GeoJSON FeatureCollection")
    out = []
    for feature in doc.get("features", []):
        name = (feature.get("properties") or {}).get("name")
        if not name:
            raise IngestError(f"{path}: boundary feature without a name")
        geometry = geo.from_geojson(feature["geometry"])
        if not geometry.is_areal:
            raise IngestError(f"{path}: boundary {name!r} is not areal")
        out.append(MunicipalityBoundary(name=str(name), geometry=geometry))
    names = [b.name for b in out]
    if len(names) != len(set(names)):
        raise IngestError(f"{path}: duplicate boundary names")
    return out


def assign_municipality(
    record: FeatureRecord,
    boundaries: list[MunicipalityBoundary],
    eps_m: float,
    report: IngestReport | None = None,
) -> list[str]:
    """Names of all boundaries the feature eps-intersects, lowercased.

    Features crossing a boundary get every touched municipality; a feature
    outside all boundaries yields an empty list plus a warning.
    """
    if not boundaries:
        raise IngestError("no municipality boundaries loaded")
    names = []
    for boundary in boundaries:
        rels = geo.relate(record.geometry, boundary.geometry, eps=eps_m)
        if "intersects" in rels:
            names.append(boundary.name.lower())
    if not names and report is not None:
        report.warn(f"feature {record.iri} lies outside all municipality boundaries")
    return sorted(names)


def enrich(
    record: FeatureRecord,
    client: GazetteerClient,
    cap_m: float,
    report: IngestReport | None = None,
) -> GazetteerMatch | None:
    """Best same-class gazetteer match within the distance cap.

    Nearest centroid wins; ties break on the lexicographically smaller
    external id. Client failures degrade to no enrichment, never fatal.
    """
    try:
        candidates = client.candidates(record.feature_type)
    except Exception as exc:
        if report is not None:
            report.warn(f"gazetteer lookup failed for {record.iri}: {exc}")
        return None
    center = geo.centroid(record.geometry)
    best: GazetteerMatch | None = None
    for entry in candidates:
        d = geo.distance(center, entry.point)
        if d > cap_m:
            continue
        if best is None or d < best.match_distance_m or (
            d == best.match_distance_m and entry.external_id < best.external_id
        ):
            best = GazetteerMatch(entry.name, entry.external_id, d)
    return best


@dataclass
class FeatureSource:
    path: str
    year: int
    sheet: str


def build_store(
    sources: list[FeatureSource],
    boundaries_path: str | Path | None = None,
    gazetteer: GazetteerClient | None = None,
    cfg: IngestConfig | None = None,
    store: Store | None = None,
) -> tuple[Store, IngestReport]:
    """Ingest every source file and emit all property triples.

    The returned store is still in build phase so relation precomputation
    can append edges before sealing.
    """
    cfg = cfg or IngestConfig()
    report = IngestReport()
    store = store or Store()
    boundaries = load_boundaries(boundaries_path) if boundaries_path else []
    for source in sources:
        records = ingest_features(source.path, source.year, source.sheet, cfg, report)
        for record in records:
            subject = kg.iri(record.iri)
            for triple in core_triples(record):
                store.insert(triple)
            for triple in derive_metrics(record):
                store.insert(triple)
            store.register_geometry(record.iri, record.geometry)
            if boundaries:
                for name in assign_municipality(record, boundaries, cfg.eps_m, report):
                    store.insert(Triple(subject, kg.iri(CMO + "municipality"), kg.lit_string(name)))
            if gazetteer is not None:
                match = enrich(record, gazetteer, cfg.enrich_cap_m, report)
                if match is not None:
                    store.insert(Triple(subject, kg.iri(CMO + "currentName"), kg.lit_string(match.name)))
                    store.insert(Triple(subject, kg.iri(CMO + "osmId"), kg.lit_string(match.external_id)))
    return store, report
