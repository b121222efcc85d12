"""Exception hierarchy shared across the package.

Every error raised by chronomap code derives from ChronomapError so callers
can catch domain failures without swallowing programming errors.
"""

from __future__ import annotations


class ChronomapError(Exception):
    """Base class for all chronomap failures."""

    code = "internal"


class GeometryError(ChronomapError):
    """Invalid or degenerate geometry input."""

    code = "geometry_error"


class UnsupportedGeometryError(GeometryError):
    """Operation applied to a geometry kind it does not support."""

    code = "unsupported_geometry"


class NoDirectionError(GeometryError):
    """Cardinal direction requested between coincident centroids."""

    code = "no_direction"


class StoreError(ChronomapError):
    code = "store_error"


class SchemaViolationError(StoreError):
    """Triple uses a predicate outside the closed catalog."""

    code = "schema_violation"


class TypeViolationError(StoreError):
    """Literal object does not match the predicate's declared range."""

    code = "type_violation"


class SealedStoreError(StoreError):
    """Write attempted after the store was sealed."""

    code = "sealed_store"


class DumpParseError(StoreError):
    """Malformed line in a store dump file."""

    code = "dump_parse_error"

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class IngestError(ChronomapError):
    code = "ingest_error"


class QuerySyntaxError(ChronomapError):
    """Query text rejected by the parser, with source position."""

    code = "parse_error"

    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        detail = f"{message} at line {line}, column {column}"
        if expected:
            detail += f" (expected one of: {', '.join(expected)})"
        super().__init__(detail)
        self.line = line
        self.column = column
        self.expected = expected


class UnknownPrefixError(QuerySyntaxError):
    code = "unknown_prefix"


class GatewayError(ChronomapError):
    code = "gateway_error"


class TransportError(GatewayError):
    """Network-level failure talking to a live backend; retryable by callers."""

    code = "transport_error"


class ReplayMissError(GatewayError):
    """Replay backend has no recorded response for the request digest."""

    code = "replay_miss"

    def __init__(self, digest: str):
        super().__init__(f"no recorded response for request digest {digest}")
        self.digest = digest


class ScriptedNoMatchError(GatewayError):
    """Scripted backend has no rule matching the request."""

    code = "scripted_no_match"


class ConfigError(ChronomapError):
    code = "config_error"
