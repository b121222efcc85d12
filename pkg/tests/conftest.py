import json
from pathlib import Path

import pytest

import datagen
from chronomap.ingest import FeatureSource, FixtureGazetteer, IngestConfig, build_store
from chronomap.relations import RelationConfig, precompute


@pytest.fixture(scope="session")
def dataset(tmp_path_factory) -> dict:
    """Canonical fixture dataset written to disk once per session."""
    root = tmp_path_factory.mktemp("dataset")
    manifest = datagen.write_dataset(root)
    manifest["root"] = str(root)
    return manifest


@pytest.fixture(scope="session")
def relation_config() -> RelationConfig:
    return RelationConfig()


@pytest.fixture(scope="session")
def fixture_store(dataset, relation_config):
    """Fully built and sealed store over the canonical dataset."""
    sources = [FeatureSource(**src) for src in dataset["sources"]]
    store, report = build_store(
        sources,
        boundaries_path=dataset["boundaries"],
        gazetteer=FixtureGazetteer(dataset["gazetteer"]),
        cfg=IngestConfig(),
    )
    precompute(store, relation_config)
    store.seal()
    assert not report.warnings
    return store


@pytest.fixture()
def fresh_store(dataset, relation_config):
    """Unsealed rebuild for tests that need to mutate or re-seal."""
    sources = [FeatureSource(**src) for src in dataset["sources"]]
    store, _ = build_store(
        sources,
        boundaries_path=dataset["boundaries"],
        gazetteer=FixtureGazetteer(dataset["gazetteer"]),
        cfg=IngestConfig(),
    )
    precompute(store, relation_config)
    return store


@pytest.fixture(scope="session")
def fewshot_path(dataset) -> str:
    return dataset["fewshot"]


def write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload, indent=1), encoding="utf-8")
    return path


def rules_to_json(rules) -> list[dict]:
    return [{"pattern": r.pattern, "response": r.response, "tag": r.tag} for r in rules]


def make_service_env(root: Path, dataset: dict, items=None, extra_rules=None, server=None) -> dict:
    """Write a runnable config dir: scripted rules, tiles, config.json."""
    import scripted_fixtures as sf

    root.mkdir(parents=True, exist_ok=True)
    rules = (extra_rules or []) + sf.standard_rules(items or [])
    rules_path = root / "rules.json"
    write_json(rules_path, rules_to_json(rules))
    tiles = root / "tiles"
    tiles.mkdir(exist_ok=True)
    # minimal valid PNG (1x1, generated once via PIL and frozen here)
    png = bytes.fromhex(
        "89504e470d0a1a0a0000000d49484452000000010000000108060000001f15c489"
        "0000000d4944415478da63fccff0bf1e000557027aea614d1a0000000049454e44ae426082"
    )
    (tiles / "aarberg_1901.png").write_bytes(png)
    config = {
        "data": {
            "features": [
                {"path": s["path"], "year": s["year"], "sheet": s["sheet"]}
                for s in dataset["sources"]
            ],
            "boundaries": dataset["boundaries"],
            "gazetteer": dataset["gazetteer"],
            "fewshot": dataset["fewshot"],
            "tiles_dir": str(tiles),
            "store_dump": str(root / "store.nt"),
        },
        "relations": {"timestamps": [1877, 1901, 1916, 1930]},
        "qa": {"retry_max": 2, "parallel_width": 4},
        "gateways": {
            "generator": {"backend": "scripted", "rules": str(rules_path)},
            "validator": {"backend": "scripted", "rules": str(rules_path)},
            "composer": {"backend": "scripted", "rules": str(rules_path)},
            "judge": {"backend": "scripted", "rules": str(rules_path)},
            "search": {"backend": "fixture", "path": dataset["search"]},
        },
        "server": dict(server or {"host": "127.0.0.1", "port": 8099, "qa_timeout_s": 30}),
    }
    config_path = root / "config.json"
    write_json(config_path, config)
    return {"config": str(config_path), "root": root, "rules": str(rules_path), "tiles": str(tiles)}


@pytest.fixture(scope="session")
def bench_items(fixture_store):
    from chronomap.evalkit import generate_benchmark

    items, warnings = generate_benchmark(
        fixture_store, {"yesno": 10, "numeric": 10, "overview": 0}, seed=13
    )
    assert len(items) == 20 and not warnings
    return items


@pytest.fixture(scope="session")
def service_env(tmp_path_factory, dataset, bench_items):
    import scripted_fixtures as sf

    from chronomap.llmgate import ScriptedRule

    extra = [
        ScriptedRule(".*", sf.FOREST_QUESTION + "\n" + sf.WETLAND_QUESTION, "decompose"),
        ScriptedRule(".*", sf.PAPER_SENTENCE, "compose"),
    ]
    root = tmp_path_factory.mktemp("service")
    return make_service_env(root, dataset, items=bench_items, extra_rules=extra)
