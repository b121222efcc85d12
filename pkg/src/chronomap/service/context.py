"""Application wiring: store, prompt bundle, and gateway construction."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError
from ..ingest import FixtureGazetteer, build_store
from ..kgstore import Store
from ..llmgate import (
    ChatClient,
    FixtureSearchClient,
    LiveChatClient,
    LiveSearchClient,
    NullSearchClient,
    RecordingChatClient,
    ReplayChatClient,
    ScriptedChatClient,
    SearchClient,
)
from ..qapipeline import GatewaySet, PromptBundle, build_prompt
from ..relations import precompute
from .config import AppConfig, GatewayConfig

log = logging.getLogger(__name__)


def make_chat_client(cfg: GatewayConfig | None) -> ChatClient | None:
    if cfg is None or cfg.backend == "null":
        return None
    if cfg.backend == "scripted":
        return ScriptedChatClient.from_file(cfg.rules)
    if cfg.backend == "replay":
        return ReplayChatClient.from_file(cfg.transcript)
    if cfg.backend == "live":
        return LiveChatClient(
            base_url=cfg.base_url, model=cfg.model, api_key=cfg.api_key, max_in_flight=cfg.max_in_flight
        )
    if cfg.backend == "record":
        inner = make_chat_client(cfg.inner)
        if inner is None:
            raise ConfigError("record backend needs a non-null inner backend")
        return RecordingChatClient(inner, cfg.transcript)
    raise ConfigError(f"unknown chat backend {cfg.backend!r}")


def make_search_client(cfg: AppConfig) -> SearchClient:
    search = cfg.search
    if search.backend == "fixture":
        return FixtureSearchClient(search.path)
    if search.backend == "live":
        return LiveSearchClient(search.endpoint)
    return NullSearchClient()


def make_gateways(cfg: AppConfig) -> GatewaySet:
    generator = make_chat_client(cfg.gateways.get("generator"))
    composer = make_chat_client(cfg.gateways.get("composer"))
    if generator is None or composer is None:
        raise ConfigError("generator and composer gateway roles must be configured")
    return GatewaySet(
        generator=generator,
        composer=composer,
        validator=make_chat_client(cfg.gateways.get("validator")),
        judge=make_chat_client(cfg.gateways.get("judge")),
        search=make_search_client(cfg),
    )


def build_store_from_config(cfg: AppConfig, with_relations: bool = True) -> Store:
    """Ingest the configured sources (and optionally precompute relations)."""
    if not cfg.sources:
        raise ConfigError("no feature sources configured")
    gazetteer = FixtureGazetteer(cfg.gazetteer) if cfg.gazetteer else None
    store, report = build_store(
        cfg.sources, boundaries_path=cfg.boundaries, gazetteer=gazetteer, cfg=cfg.ingest
    )
    for warning in report.warnings:
        log.warning("ingest: %s", warning)
    if with_relations:
        precompute(store, cfg.relations, provenance_path=cfg.provenance)
    return store


def load_or_build_store(cfg: AppConfig) -> Store:
    """Prefer the configured dump; fall back to a full in-memory build."""
    if cfg.store_dump and Path(cfg.store_dump).exists():
        store = Store.load(cfg.store_dump)
    else:
        store = build_store_from_config(cfg)
    store.seal()
    return store


@dataclass
class AppContext:
    config: AppConfig
    store: Store
    bundle: PromptBundle
    gateways: GatewaySet

    @classmethod
    def from_config(cls, cfg: AppConfig) -> "AppContext":
        store = load_or_build_store(cfg)
        if not cfg.fewshot:
            raise ConfigError("config needs a few-shot examples file for QA")
        bundle = build_prompt(store, store.schema, cfg.fewshot)
        return cls(config=cfg, store=store, bundle=bundle, gateways=make_gateways(cfg))
