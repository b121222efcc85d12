"""Application configuration loaded from one JSON document.

Paths referenced by the config must exist at load time (except the store
dump, which build commands create). Gateway roles each resolve to exactly
one backend; scripted and replay backends make the whole service runnable
offline and deterministically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..ingest import FeatureSource, IngestConfig
from ..qapipeline import QaConfig
from ..relations import RelationConfig

GATEWAY_ROLES = ("generator", "validator", "composer", "judge")
CHAT_BACKENDS = ("scripted", "replay", "live", "record", "null")
SEARCH_BACKENDS = ("fixture", "live", "null")


@dataclass
class GatewayConfig:
    backend: str
    rules: str | None = None  # scripted
    transcript: str | None = None  # replay / record
    inner: "GatewayConfig | None" = None  # record wraps another backend
    base_url: str | None = None  # live
    model: str | None = None
    api_key: str | None = None
    max_in_flight: int = 4

    @classmethod
    def from_json(cls, doc: dict, role: str) -> "GatewayConfig":
        backend = doc.get("backend")
        if backend not in CHAT_BACKENDS:
            raise ConfigError(f"gateway {role}: unknown backend {backend!r}")
        inner = None
        if backend == "record":
            if "inner" not in doc:
                raise ConfigError(f"gateway {role}: record backend needs an inner backend")
            inner = cls.from_json(doc["inner"], f"{role}.inner")
        cfg = cls(
            backend=backend,
            rules=doc.get("rules"),
            transcript=doc.get("transcript"),
            inner=inner,
            base_url=doc.get("base_url"),
            model=doc.get("model"),
            api_key=doc.get("api_key"),
            max_in_flight=int(doc.get("max_in_flight", 4)),
        )
        if backend == "scripted" and not cfg.rules:
            raise ConfigError(f"gateway {role}: scripted backend needs a rules file")
        if backend in ("replay", "record") and not cfg.transcript:
            raise ConfigError(f"gateway {role}: {backend} backend needs a transcript path")
        return cfg


@dataclass
class SearchConfig:
    backend: str = "null"
    path: str | None = None  # fixture
    endpoint: str | None = None  # live

    @classmethod
    def from_json(cls, doc: dict) -> "SearchConfig":
        backend = doc.get("backend", "null")
        if backend not in SEARCH_BACKENDS:
            raise ConfigError(f"search: unknown backend {backend!r}")
        cfg = cls(backend=backend, path=doc.get("path"), endpoint=doc.get("endpoint"))
        if backend == "fixture" and not cfg.path:
            raise ConfigError("search: fixture backend needs a path")
        if backend == "live" and not cfg.endpoint:
            raise ConfigError("search: live backend needs an endpoint")
        return cfg


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8099
    cors_origins: tuple[str, ...] = ()
    qa_timeout_s: float = 120.0


@dataclass
class AppConfig:
    sources: list[FeatureSource] = field(default_factory=list)
    boundaries: str | None = None
    gazetteer: str | None = None
    fewshot: str | None = None
    tiles_dir: str | None = None
    store_dump: str | None = None
    provenance: str | None = None
    ingest: IngestConfig = field(default_factory=IngestConfig)
    relations: RelationConfig = field(default_factory=RelationConfig)
    qa: QaConfig = field(default_factory=QaConfig)
    gateways: dict[str, GatewayConfig] = field(default_factory=dict)
    search: SearchConfig = field(default_factory=SearchConfig)
    server: ServerConfig = field(default_factory=ServerConfig)
    base_dir: Path = field(default_factory=Path)

    def resolve(self, path: str | None) -> str | None:
        if path is None:
            return None
        p = Path(path)
        return str(p if p.is_absolute() else self.base_dir / p)

    @classmethod
    def load(cls, path: str | Path) -> "AppConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        base = path.parent.resolve()
        data = doc.get("data", {})
        cfg = cls(base_dir=base)
        cfg.sources = [
            FeatureSource(path=cfg.resolve(s["path"]), year=int(s["year"]), sheet=str(s["sheet"]))
            for s in data.get("features", [])
        ]
        cfg.boundaries = cfg.resolve(data.get("boundaries"))
        cfg.gazetteer = cfg.resolve(data.get("gazetteer"))
        cfg.fewshot = cfg.resolve(data.get("fewshot"))
        cfg.tiles_dir = cfg.resolve(data.get("tiles_dir"))
        cfg.store_dump = cfg.resolve(data.get("store_dump"))
        cfg.provenance = cfg.resolve(data.get("provenance"))
        if "ingest" in doc:
            d = doc["ingest"]
            cfg.ingest = IngestConfig(
                type_attribute=d.get("type_attribute", "feature_type"),
                enrich_cap_m=float(d.get("enrich_cap_m", 50.0)),
                eps_m=float(d.get("eps_m", 25.0)),
            )
        if "relations" in doc:
            d = doc["relations"]
            cfg.relations = RelationConfig(
                eps_m=float(d.get("eps_m", 25.0)),
                near_m=float(d.get("near_m", 100.0)),
                cardinal_max_m=float(d.get("cardinal_max_m", 2000.0)),
                change_iou=float(d.get("change_iou", 0.3)),
                transform_overlap=float(d.get("transform_overlap", 0.5)),
                timestamps=tuple(int(y) for y in d.get("timestamps", (1877, 1901, 1916, 1930))),
            )
        if "qa" in doc:
            d = doc["qa"]
            cfg.qa = QaConfig(
                retry_max=int(d.get("retry_max", 2)),
                parallel_width=int(d.get("parallel_width", 4)),
                facts_cap_chars=int(d.get("facts_cap_chars", 6000)),
                tiles_dir=cfg.tiles_dir,
                search_k=int(d.get("search_k", 5)),
            )
        else:
            cfg.qa = QaConfig(tiles_dir=cfg.tiles_dir)
        for role, gdoc in doc.get("gateways", {}).items():
            if role == "search":
                cfg.search = SearchConfig.from_json(gdoc)
                continue
            if role not in GATEWAY_ROLES:
                raise ConfigError(f"unknown gateway role {role!r}")
            cfg.gateways[role] = GatewayConfig.from_json(gdoc, role)
        if "server" in doc:
            d = doc["server"]
            cfg.server = ServerConfig(
                host=d.get("host", "127.0.0.1"),
                port=int(d.get("port", 8099)),
                cors_origins=tuple(d.get("cors_origins", ())),
                qa_timeout_s=float(d.get("qa_timeout_s", 120.0)),
            )
        cfg._resolve_gateway_paths()
        cfg.validate_paths()
        return cfg

    def _resolve_gateway_paths(self) -> None:
        def fix(g: GatewayConfig):
            g.rules = self.resolve(g.rules)
            g.transcript = self.resolve(g.transcript)
            if g.inner is not None:
                fix(g.inner)

        for g in self.gateways.values():
            fix(g)
        self.search.path = self.resolve(self.search.path)

    def validate_paths(self) -> None:
        """Referenced input files must exist (the store dump may not yet)."""
        missing = []
        for source in self.sources:
            if not Path(source.path).exists():
                missing.append(source.path)
        for p in (self.boundaries, self.gazetteer, self.fewshot):
            if p and not Path(p).exists():
                missing.append(p)
        for g in self.gateways.values():
            if g.rules and not Path(g.rules).exists():
                missing.append(g.rules)
            if g.backend == "replay" and g.transcript and not Path(g.transcript).exists():
                missing.append(g.transcript)
        if self.search.path and not Path(self.search.path).exists():
            missing.append(self.search.path)
        if missing:
            raise ConfigError("missing input files: " + ", ".join(sorted(set(missing))))
