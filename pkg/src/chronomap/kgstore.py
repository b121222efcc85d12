"""Indexed in-memory triple store with a closed predicate catalog.

The store holds the feature ontology: property triples (type, year, sheet,
municipality, derived metrics, enrichment) and precomputed relation edges.
Three permutation indexes (SPO, POS, OSP) back pattern matching; feature
geometries live in a side table referenced by handle so coordinate arrays
are never duplicated into the triple set.

Lifecycle is two-phase: a single writer inserts during the build phase,
then ``seal()`` freezes the store for unlimited concurrent readers.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

from . import geometry as geo
from .errors import (
    DumpParseError,
    SchemaViolationError,
    SealedStoreError,
    StoreError,
    TypeViolationError,
)

BASE = "http://chronomap.local/"
CMF = BASE + "feature/"
CMO = BASE + "ontology#"
CMR = BASE + "relation#"
XSD = "http://www.w3.org/2001/XMLSchema#"
WKT_DATATYPE = "http://www.opengis.net/ont/geosparql#wktLiteral"

PREFIXES = {"cmf": CMF, "cmo": CMO, "cmr": CMR, "xsd": XSD}

_XSD_BY_TYPE = {
    "string": XSD + "string",
    "integer": XSD + "integer",
    "decimal": XSD + "decimal",
    "boolean": XSD + "boolean",
}


@dataclass(frozen=True)
class Term:
    """IRI, typed literal, or geometry handle.

    ``datatype`` is one of string/integer/decimal/boolean for literals and
    None otherwise. Years are plain integer literals; the 4-digit rule is
    enforced by the schema range, not a separate datatype.
    """

    kind: str  # "iri" | "literal" | "geom"
    value: object
    datatype: str | None = None

    def sort_key(self) -> str:
        if self.kind == "geom":
            return f'"\x01geom:{self.value}"'
        return nt_term(self)

    @property
    def is_iri(self) -> bool:
        return self.kind == "iri"


def iri(value: str) -> Term:
    if "://" not in value:
        raise StoreError(f"IRI must be absolute: {value!r}")
    return Term("iri", value)


def lit_string(value: str) -> Term:
    return Term("literal", str(value), "string")


def lit_int(value: int) -> Term:
    return Term("literal", int(value), "integer")


def lit_decimal(value: float) -> Term:
    v = float(value)
    if not math.isfinite(v):
        raise StoreError(f"non-finite decimal literal {value!r}")
    return Term("literal", v, "decimal")


def lit_bool(value: bool) -> Term:
    return Term("literal", bool(value), "boolean")


def lit_year(value: int) -> Term:
    v = int(value)
    if not 1000 <= v <= 9999:
        raise TypeViolationError(f"year literal must be 4-digit, got {value!r}")
    return lit_int(v)


def geom_ref(handle: str) -> Term:
    return Term("geom", handle)


class Triple(NamedTuple):
    s: Term
    p: Term
    o: Term


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append({"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def _decimal_lexical(v: float) -> str:
    s = repr(float(v))
    if "e" in s or "E" in s:
        s = f"{v:.12f}".rstrip("0").rstrip(".") or "0"
    return s


def nt_term(t: Term, wkt_resolver=None) -> str:
    """N-Triples text for a term; geometry handles need a WKT resolver."""
    if t.kind == "iri":
        return f"<{t.value}>"
    if t.kind == "geom":
        if wkt_resolver is None:
            raise StoreError(f"cannot serialize geometry handle {t.value!r} without a store")
        return f'"{_escape(wkt_resolver(t.value))}"^^<{WKT_DATATYPE}>'
    if t.datatype == "string":
        return f'"{_escape(t.value)}"'
    if t.datatype == "boolean":
        lex = "true" if t.value else "false"
    elif t.datatype == "integer":
        lex = str(t.value)
    else:
        lex = _decimal_lexical(t.value)
    return f'"{lex}"^^<{_XSD_BY_TYPE[t.datatype]}>'


# ---------------------------------------------------------------------------
# Schema
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PropertySpec:
    iri: str
    cardinality: str  # "fixed" | "optional"
    range: str  # string | integer | decimal | boolean | year | wkt


@dataclass(frozen=True)
class RelationSpec:
    iri: str
    inverse: str | None  # own IRI for symmetric relations


class Schema:
    """Closed catalog of property and relation predicates."""

    def __init__(self, properties: Iterable[PropertySpec], relations: Iterable[RelationSpec]):
        self.properties = {p.iri: p for p in properties}
        self.relations = {r.iri: r for r in relations}
        for r in self.relations.values():
            if r.inverse is not None:
                inv = self.relations.get(r.inverse)
                if inv is None or inv.inverse != r.iri:
                    raise StoreError(f"relation {r.iri} lacks a symmetric inverse declaration")

    def __contains__(self, predicate_iri: str) -> bool:
        return predicate_iri in self.properties or predicate_iri in self.relations

    def check(self, triple: Triple) -> None:
        pred = triple.p.value
        if not triple.p.is_iri:
            raise SchemaViolationError("predicate must be an IRI")
        if pred in self.relations:
            if not triple.o.is_iri:
                raise TypeViolationError(f"relation {pred} requires an IRI object")
            return
        spec = self.properties.get(pred)
        if spec is None:
            raise SchemaViolationError(f"predicate not in catalog: {pred}")
        o = triple.o
        if spec.range == "wkt":
            if o.kind != "geom":
                raise TypeViolationError(f"{pred} requires a geometry object")
            return
        if o.kind != "literal":
            raise TypeViolationError(f"{pred} requires a literal object")
        if spec.range == "year":
            if o.datatype != "integer" or not 1000 <= o.value <= 9999:
                raise TypeViolationError(f"{pred} requires a 4-digit year, got {o.value!r}")
            return
        if spec.range == "decimal":
            if o.datatype not in ("decimal", "integer"):
                raise TypeViolationError(f"{pred} requires a numeric literal, got {o.datatype}")
            return
        if o.datatype != spec.range:
            raise TypeViolationError(f"{pred} requires {spec.range}, got {o.datatype}")

    def to_json(self) -> dict:
        return {
            "properties": [
                {"iri": p.iri, "cardinality": p.cardinality, "range": p.range}
                for p in sorted(self.properties.values(), key=lambda p: p.iri)
            ],
            "relations": [
                {"iri": r.iri, "inverse": r.inverse}
                for r in sorted(self.relations.values(), key=lambda r: r.iri)
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Schema":
        return cls(
            [PropertySpec(p["iri"], p["cardinality"], p["range"]) for p in doc["properties"]],
            [RelationSpec(r["iri"], r.get("inverse")) for r in doc["relations"]],
        )


CARDINAL_PREDICATES = {
    "N": CMR + "northOf",
    "NE": CMR + "northEastOf",
    "E": CMR + "eastOf",
    "SE": CMR + "southEastOf",
    "S": CMR + "southOf",
    "SW": CMR + "southWestOf",
    "W": CMR + "westOf",
    "NW": CMR + "northWestOf",
}


def default_schema() -> Schema:
    sym = lambda name: RelationSpec(CMR + name, CMR + name)
    inv = lambda a, b: (RelationSpec(CMR + a, CMR + b), RelationSpec(CMR + b, CMR + a))
    relations = [
        sym("intersects"),
        sym("touches"),
        sym("crosses"),
        sym("near"),
        *inv("contains", "within"),
        *inv("northOf", "southOf"),
        *inv("northEastOf", "southWestOf"),
        *inv("eastOf", "westOf"),
        *inv("southEastOf", "northWestOf"),
        *inv("changedTo", "changedFrom"),
        *inv("transformedTo", "transformedFrom"),
    ]
    properties = [
        PropertySpec(CMO + "featureType", "fixed", "string"),
        PropertySpec(CMO + "year", "fixed", "year"),
        PropertySpec(CMO + "sheet", "fixed", "string"),
        PropertySpec(CMO + "municipality", "optional", "string"),
        PropertySpec(CMO + "areaSqm", "optional", "decimal"),
        PropertySpec(CMO + "lengthM", "optional", "decimal"),
        PropertySpec(CMO + "currentName", "optional", "string"),
        PropertySpec(CMO + "osmId", "optional", "string"),
        PropertySpec(CMO + "wkt", "optional", "wkt"),
    ]
    return Schema(properties, relations)


# ---------------------------------------------------------------------------
# Spatial index
# ---------------------------------------------------------------------------

class BBoxIndex:
    """Uniform-grid index over feature bounding boxes."""

    def __init__(self, entries: dict[str, geo.BBox]):
        self._boxes = dict(entries)
        if entries:
            spans = [max(b.max_x - b.min_x, b.max_y - b.min_y) for b in entries.values()]
            self._cell = max(1.0, 2.0 * (sum(spans) / len(spans) or 1.0))
        else:
            self._cell = 1.0
        self._grid: dict[tuple[int, int], list[str]] = {}
        for key, box in entries.items():
            for cell in self._cells(box):
                self._grid.setdefault(cell, []).append(key)

    def _cells(self, box: geo.BBox) -> Iterator[tuple[int, int]]:
        x0 = math.floor(box.min_x / self._cell)
        x1 = math.floor(box.max_x / self._cell)
        y0 = math.floor(box.min_y / self._cell)
        y1 = math.floor(box.max_y / self._cell)
        for ix in range(x0, x1 + 1):
            for iy in range(y0, y1 + 1):
                yield (ix, iy)

    def query(self, box: geo.BBox) -> list[str]:
        """Keys whose bounding box intersects ``box``, sorted."""
        seen = set()
        for cell in self._cells(box):
            for key in self._grid.get(cell, ()):
                if key not in seen and self._boxes[key].intersects(box):
                    seen.add(key)
        return sorted(seen)


# ---------------------------------------------------------------------------
# Store
# ---------------------------------------------------------------------------

class Store:
    def __init__(self, schema: Schema | None = None):
        self.schema = schema or default_schema()
        self._triples: set[Triple] = set()
        self._spo: dict[Term, dict[Term, set[Term]]] = {}
        self._pos: dict[Term, dict[Term, set[Term]]] = {}
        self._osp: dict[Term, dict[Term, set[Term]]] = {}
        self._geometries: dict[str, geo.Geometry] = {}
        self._sealed = False
        self._bbox_index: BBoxIndex | None = None

    def __len__(self) -> int:
        return len(self._triples)

    @property
    def sealed(self) -> bool:
        return self._sealed

    def insert(self, triple: Triple) -> None:
        if self._sealed:
            raise SealedStoreError("store is sealed")
        self.schema.check(triple)
        if triple in self._triples:
            return
        self._triples.add(triple)
        s, p, o = triple
        self._spo.setdefault(s, {}).setdefault(p, set()).add(o)
        self._pos.setdefault(p, {}).setdefault(o, set()).add(s)
        self._osp.setdefault(o, {}).setdefault(s, set()).add(p)

    def register_geometry(self, feature_iri: str, geometry: geo.Geometry) -> None:
        """Store a feature geometry and link it via cmo:wkt."""
        if self._sealed:
            raise SealedStoreError("store is sealed")
        self._geometries[feature_iri] = geometry
        self.insert(Triple(iri(feature_iri), iri(CMO + "wkt"), geom_ref(feature_iri)))

    def geometry(self, handle: str) -> geo.Geometry:
        try:
            return self._geometries[handle]
        except KeyError:
            raise StoreError(f"no geometry registered for {handle}") from None

    @property
    def geometries(self) -> dict[str, geo.Geometry]:
        return dict(self._geometries)

    def wkt(self, handle: str) -> str:
        return geo.to_wkt(self.geometry(handle))

    def seal(self) -> None:
        """Freeze the store; repeated seals are no-ops."""
        if self._sealed:
            return
        self._sealed = True
        self._bbox_index = BBoxIndex({k: geo.bbox(g) for k, g in self._geometries.items()})

    def bbox_query(self, box: geo.BBox) -> list[str]:
        if self._bbox_index is None:
            self._bbox_index = BBoxIndex({k: geo.bbox(g) for k, g in self._geometries.items()})
        return self._bbox_index.query(box)

    def match(self, s: Term | None = None, p: Term | None = None, o: Term | None = None) -> list[Triple]:
        """All triples matching the bound positions, in canonical order.

        The index whose key prefix matches the bound positions serves the
        scan; results are sorted lexicographically by term serialization.
        """
        found = self._match_unsorted(s, p, o)
        return sorted(found, key=lambda t: (t.s.sort_key(), t.p.sort_key(), t.o.sort_key()))

    def _match_unsorted(self, s, p, o) -> list[Triple]:
        if s is not None:
            by_p = self._spo.get(s)
            if not by_p:
                return []
            preds = [p] if p is not None else list(by_p)
            out = []
            for pred in preds:
                for obj in by_p.get(pred, ()):
                    if o is None or obj == o:
                        out.append(Triple(s, pred, obj))
            return out
        if p is not None:
            by_o = self._pos.get(p)
            if not by_o:
                return []
            objs = [o] if o is not None else list(by_o)
            return [Triple(subj, p, obj) for obj in objs for subj in by_o.get(obj, ())]
        if o is not None:
            by_s = self._osp.get(o)
            if not by_s:
                return []
            return [Triple(subj, pred, o) for subj, preds in by_s.items() for pred in preds]
        return list(self._triples)

    def iter_triples(self) -> Iterator[Triple]:
        return iter(self._triples)

    # -- persistence --------------------------------------------------------

    def dump(self, path: str | Path) -> None:
        """Write sorted N-Triples plus a schema JSON document alongside."""
        if not self._sealed:
            raise StoreError("dump requires a sealed store")
        path = Path(path)
        lines = sorted(
            f"{nt_term(t.s)} {nt_term(t.p)} {nt_term(t.o, self.wkt)} ."
            for t in self._triples
        )
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        schema_path = Path(str(path) + ".schema.json")
        schema_path.write_text(
            json.dumps(self.schema.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path, schema: Schema | None = None) -> "Store":
        """Rebuild a store (in build phase) from a dump file."""
        path = Path(path)
        if schema is None:
            schema_path = Path(str(path) + ".schema.json")
            if schema_path.exists():
                schema = Schema.from_json(json.loads(schema_path.read_text(encoding="utf-8")))
        store = cls(schema)
        for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            s, p, o = _parse_nt_line(line, line_no)
            if o.kind == "geom":
                # object carries parsed WKT text; intern under the subject IRI
                geometry = geo.from_wkt(o.value)
                store._geometries[s.value] = geometry
                o = geom_ref(s.value)
            try:
                store.insert(Triple(s, p, o))
            except StoreError as exc:
                raise DumpParseError(str(exc), line_no) from exc
        return store


_IRI_RE = re.compile(r"<([^<>]*)>")


def _parse_nt_line(line: str, line_no: int) -> tuple[Term, Term, Term]:
    if not line.endswith("."):
        raise DumpParseError("line does not end with '.'", line_no)
    body = line[:-1].rstrip()
    m = _IRI_RE.match(body)
    if not m:
        raise DumpParseError("subject must be an IRI", line_no)
    s = iri(m.group(1))
    rest = body[m.end():].lstrip()
    m = _IRI_RE.match(rest)
    if not m:
        raise DumpParseError("predicate must be an IRI", line_no)
    p = iri(m.group(1))
    rest = rest[m.end():].lstrip()
    o = _parse_nt_object(rest, line_no)
    return s, p, o


def _parse_nt_object(text: str, line_no: int) -> Term:
    if text.startswith("<"):
        m = _IRI_RE.match(text)
        if not m or text[m.end():].strip():
            raise DumpParseError("malformed IRI object", line_no)
        return iri(m.group(1))
    if not text.startswith('"'):
        raise DumpParseError("object must be an IRI or literal", line_no)
    i = 1
    while i < len(text):
        if text[i] == "\\":
            i += 2
            continue
        if text[i] == '"':
            break
        i += 1
    else:
        raise DumpParseError("unterminated literal", line_no)
    lexical = _unescape(text[1:i])
    suffix = text[i + 1:].strip()
    if not suffix:
        return lit_string(lexical)
    if not suffix.startswith("^^"):
        raise DumpParseError(f"malformed literal suffix {suffix!r}", line_no)
    m = _IRI_RE.match(suffix[2:])
    if not m:
        raise DumpParseError("malformed datatype IRI", line_no)
    dt = m.group(1)
    if dt == WKT_DATATYPE:
        return Term("geom", lexical)  # placeholder; interned by the loader
    if dt == XSD + "integer":
        return lit_int(int(lexical))
    if dt == XSD + "decimal":
        return lit_decimal(float(lexical))
    if dt == XSD + "boolean":
        return lit_bool(lexical == "true")
    if dt == XSD + "string":
        return lit_string(lexical)
    raise DumpParseError(f"unsupported datatype {dt}", line_no)
