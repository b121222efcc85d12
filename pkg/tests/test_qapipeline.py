import json

import pytest

from chronomap import kgstore as kg
from chronomap.errors import ConfigError
from chronomap.kgstore import CMF, CMO, Store, Triple, default_schema
from chronomap.llmgate import ChatResponse, ImagePart, ScriptedChatClient, ScriptedRule, TextPart
from chronomap.qapipeline import (
    DescriptiveResult,
    FactualResult,
    GatewaySet,
    QaConfig,
    answer_descriptive,
    answer_factual,
    build_prompt,
    decompose,
    extract_place_year,
    extract_query,
    fallback_subquestions,
    results_to_text,
)

COUNT_QUERY = (
    'SELECT (COUNT(?f) AS ?n) WHERE { ?f cmo:featureType "lake" . '
    '?f cmo:municipality "bargen" . ?f cmo:year 1916 }'
)


def scripted(rules):
    return ScriptedChatClient([ScriptedRule(*r) for r in rules])


def accept_validator():
    return scripted([(".*", "ACCEPT", "validate")])


class Sabotage:
    """Returns garbage for ``fail`` calls out of every fail+1."""

    def __init__(self, inner, fail=2):
        self.inner = inner
        self.fail = fail
        self.calls = 0

    def complete(self, req):
        self.calls += 1
        if (self.calls - 1) % (self.fail + 1) < self.fail:
            return ChatResponse(text="THIS IS NOT A QUERY ((")
        return self.inner.complete(req)


@pytest.fixture()
def bundle(fixture_store, fewshot_path):
    return build_prompt(fixture_store, fixture_store.schema, fewshot_path)


class TestBuildPrompt:
    def test_choice_lists_from_store(self, bundle):
        assert bundle.years == (1877, 1901, 1916, 1930)
        assert "aarberg" in bundle.municipalities
        assert "lake" in bundle.feature_types

    def test_serialization_deterministic(self, fixture_store, fewshot_path):
        a = build_prompt(fixture_store, fixture_store.schema, fewshot_path)
        b = build_prompt(fixture_store, fixture_store.schema, fewshot_path)
        assert a.system_prompt() == b.system_prompt()

    def test_missing_fewshot_file(self, fixture_store, tmp_path):
        with pytest.raises(OSError):
            build_prompt(fixture_store, fixture_store.schema, tmp_path / "nope.json")

    def test_empty_fewshot_file(self, fixture_store, tmp_path):
        p = tmp_path / "fewshot.json"
        p.write_text("[]")
        with pytest.raises(ConfigError):
            build_prompt(fixture_store, fixture_store.schema, p)


class TestExtractQuery:
    def test_plain(self):
        assert extract_query("  ASK { ?s ?p ?o }\n") == "ASK { ?s ?p ?o }"

    def test_fenced(self):
        text = "Here you go:\n```sparql\nASK { ?s ?p ?o }\n```"
        assert extract_query(text) == "ASK { ?s ?p ?o }"


class TestAnswerFactual:
    def test_delivered_count(self, fixture_store, bundle):
        gateways = GatewaySet(
            generator=scripted([("How many lakes.*Bargen.*1916", COUNT_QUERY, "generate")]),
            composer=scripted([("How many lakes", "There were 2 lakes in Bargen in 1916.", "answer")]),
            validator=accept_validator(),
        )
        result = answer_factual(
            "How many lakes were there in Bargen in 1916?", bundle, gateways, fixture_store
        )
        assert result.delivered
        assert "2" in result.answer_text
        assert result.attempts == 1
        assert result.verdict.kind == "accepted"

    def test_sabotage_delivers_on_third_attempt(self, fixture_store, bundle):
        gateways = GatewaySet(
            generator=Sabotage(scripted([(".*", COUNT_QUERY, "generate")])),
            composer=scripted([(".*", "There were 2 lakes.", "answer")]),
            validator=accept_validator(),
        )
        result = answer_factual(
            "How many lakes were there in Bargen in 1916?", bundle, gateways, fixture_store
        )
        assert result.delivered
        assert result.attempts == 3

    def test_always_garbage_fails_at_parse(self, fixture_store, bundle):
        gateways = GatewaySet(
            generator=scripted([(".*", "garbage òç", "generate")]),
            composer=scripted([(".*", "unused", "answer")]),
            validator=accept_validator(),
        )
        result = answer_factual("How many lakes?", bundle, gateways, fixture_store)
        assert not result.delivered
        assert result.failed_stage == "parse"
        assert result.attempts == 3

    def test_schema_violation_stage(self, fixture_store, bundle):
        gateways = GatewaySet(
            generator=scripted([(".*", "ASK { ?f cmo:population 5 }", "generate")]),
            composer=scripted([(".*", "unused", "answer")]),
            validator=accept_validator(),
        )
        result = answer_factual("Population?", bundle, gateways, fixture_store)
        assert not result.delivered
        assert result.failed_stage == "schema"

    def test_validator_revision_used(self, fixture_store, bundle):
        bad = 'ASK { ?f cmo:featureType "lake" . ?f cmo:year 1877 }'
        gateways = GatewaySet(
            generator=scripted([(".*", bad, "generate")]),
            composer=scripted([(".*", "Yes.", "answer")]),
            validator=scripted(
                [
                    ("1877", f"REVISE\n{COUNT_QUERY}", "validate"),
                    (".*", "ACCEPT", "validate"),
                ]
            ),
        )
        result = answer_factual("How many lakes in 1916?", bundle, gateways, fixture_store)
        assert result.delivered
        assert result.verdict.kind == "revised"
        assert "1916" in result.query_text

    def test_validator_reject_fails_validate_stage(self, fixture_store, bundle):
        gateways = GatewaySet(
            generator=scripted([(".*", COUNT_QUERY, "generate")]),
            composer=scripted([(".*", "unused", "answer")]),
            validator=scripted([(".*", "REJECT: wrong municipality", "validate")]),
        )
        result = answer_factual("How many lakes?", bundle, gateways, fixture_store)
        assert not result.delivered
        assert result.failed_stage == "validate"
        assert "municipality" in result.failure_reason

    def test_delivered_query_always_parses(self, fixture_store, bundle):
        gateways = GatewaySet(
            generator=scripted([(".*", COUNT_QUERY, "generate")]),
            composer=scripted([(".*", "Two.", "answer")]),
            validator=accept_validator(),
        )
        result = answer_factual("How many lakes?", bundle, gateways, fixture_store)
        from chronomap.query import parse, validate_against_schema

        ast = parse(result.query_text)
        assert validate_against_schema(ast, fixture_store.schema) == []


def two_type_store() -> Store:
    store = Store()
    rows = [
        ("lake0", "lake", 1901, 500.0, "areaSqm"),
        ("lake1", "lake", 1916, 900.0, "areaSqm"),
        ("s0", "stream", 1901, 120.0, "lengthM"),
        ("s1", "stream", 1916, 150.0, "lengthM"),
    ]
    for name, ftype, year, value, metric in rows:
        s = kg.iri(CMF + name)
        store.insert(Triple(s, kg.iri(CMO + "featureType"), kg.lit_string(ftype)))
        store.insert(Triple(s, kg.iri(CMO + "year"), kg.lit_year(year)))
        store.insert(Triple(s, kg.iri(CMO + "municipality"), kg.lit_string("aarberg")))
        store.insert(Triple(s, kg.iri(CMO + metric), kg.lit_decimal(value)))
    store.seal()
    return store


def two_type_bundle(store, tmp_path):
    fewshot = tmp_path / "fewshot.json"
    fewshot.write_text(json.dumps([{"question": "q", "query": "ASK { ?s ?p ?o }"}]))
    return build_prompt(store, store.schema, fewshot)


class TestDecompose:
    def test_scripted_decomposer_verbatim(self, fixture_store, bundle):
        canned = "How many forests were there in Aarberg in 1901?\nHow many wetlands were there in Aarberg in 1901?"
        gateways = GatewaySet(
            generator=scripted([]),
            composer=scripted([("overview about Aarberg", canned, "decompose")]),
        )
        subs = decompose(
            "Please provide an overview about Aarberg in 1901.", gateways, bundle, fixture_store
        )
        assert subs == canned.splitlines()

    def test_fallback_on_failure(self, tmp_path):
        store = two_type_store()
        bundle = two_type_bundle(store, tmp_path)
        gateways = GatewaySet(generator=scripted([]), composer=scripted([]))
        subs = decompose("Overview of Aarberg in 1916?", gateways, bundle, store)
        assert subs
        assert subs == fallback_subquestions("Overview of Aarberg in 1916?", bundle, store)

    def test_fallback_template_arithmetic(self, tmp_path):
        store = two_type_store()
        bundle = two_type_bundle(store, tmp_path)
        subs = fallback_subquestions("Overview of Aarberg in 1916?", bundle, store)
        # 2 feature types x (count, total metric, largest) + 2 change questions
        assert len(subs) == 2 * 3 + 2
        assert any("changed from 1901 to 1916" in s for s in subs)
        assert any("total length of streams" in s for s in subs)

    def test_numbered_list_markers_stripped(self, fixture_store, bundle):
        gateways = GatewaySet(
            generator=scripted([]),
            composer=scripted([(".*", "1. First question?\n2. Second question?", "decompose")]),
        )
        subs = decompose("overview", gateways, bundle, fixture_store)
        assert subs == ["First question?", "Second question?"]


class TestResultsToText:
    def _delivered(self, q, a):
        return FactualResult(question=q, answer_text=a, status="delivered")

    def test_failed_omitted(self):
        subs = [
            self._delivered("Q1?", "A1"),
            FactualResult(question="Q2?", status="failed", failed_stage="parse"),
            self._delivered("Q3?", "A3"),
        ]
        text = results_to_text(subs)
        assert text.count("\n") == 1
        assert "Q2?" not in text

    def test_empty(self):
        assert results_to_text([]) == ""

    def test_cap_truncates_at_line_boundary(self):
        subs = [self._delivered(f"Question {i}?", "word " * 30) for i in range(10)]
        text = results_to_text(subs, cap_chars=400)
        assert len(text) <= 400
        assert all(line.startswith("Q: ") for line in text.splitlines())
        # earlier lines have priority; later ones drop first
        assert "Question 0?" in text
        assert "Question 9?" not in text


class TestAnswerDescriptive:
    def _gateways(self, search=None):
        composed = "Aarberg in 1901 was dominated by forests and a single wetland."
        return GatewaySet(
            generator=scripted(
                [("How many forests", 'SELECT (COUNT(?f) AS ?n) WHERE { ?f cmo:featureType "forest" . ?f cmo:year 1901 }', "generate")]
            ),
            composer=scripted(
                [
                    ("overview about Aarberg", "How many forests were there in Aarberg in 1901?", "decompose"),
                    (".*", "There were 18 forests.", "answer"),
                    (".*", composed, "compose"),
                ]
            ),
            validator=accept_validator(),
            search=search,
        )

    def test_kg_only_deterministic(self, fixture_store, bundle):
        question = "Please provide an overview about Aarberg in 1901."
        r1 = answer_descriptive(question, bundle, self._gateways(), fixture_store)
        r2 = answer_descriptive(question, bundle, self._gateways(), fixture_store)
        assert r1.delivered and r2.delivered
        assert r1.answer_text == r2.answer_text
        assert r1.contexts_used == ("kg",)
        assert r1.facts_text == r2.facts_text

    def test_search_snippets_in_compose_parts(self, fixture_store, bundle, dataset):
        from chronomap.llmgate import FixtureSearchClient

        gateways = self._gateways(search=FixtureSearchClient(dataset["search"]))
        result = answer_descriptive(
            "Please provide an overview about Aarberg in 1901.",
            bundle,
            gateways,
            fixture_store,
            use_search=True,
        )
        assert result.delivered
        assert "search" in result.contexts_used
        compose_calls = [c for c in gateways.composer.calls if c.tag == "compose"]
        texts = [p.text for p in compose_calls[0].parts if isinstance(p, TextPart)]
        assert any("Web search results" in t for t in texts)

    def test_map_image_attached(self, fixture_store, bundle, tmp_path):
        tile = tmp_path / "aarberg_1901.png"
        tile.write_bytes(b"\x89PNG\r\n\x1a\nfakepng")
        cfg = QaConfig(tiles_dir=str(tmp_path))
        gateways = self._gateways()
        result = answer_descriptive(
            "Please provide an overview about Aarberg in 1901.",
            bundle,
            gateways,
            fixture_store,
            cfg=cfg,
            use_map_image=True,
        )
        assert "map-image" in result.contexts_used
        compose_calls = [c for c in gateways.composer.calls if c.tag == "compose"]
        assert any(isinstance(p, ImagePart) for p in compose_calls[0].parts)

    def test_missing_tile_degrades(self, fixture_store, bundle, tmp_path):
        cfg = QaConfig(tiles_dir=str(tmp_path))
        result = answer_descriptive(
            "Please provide an overview about Aarberg in 1901.",
            bundle,
            self._gateways(),
            fixture_store,
            cfg=cfg,
            use_map_image=True,
        )
        assert result.delivered
        assert "map-image" not in result.contexts_used
        assert any("tile" in w for w in result.warnings)

    def test_all_subs_failing_still_composes(self, fixture_store, bundle):
        gateways = GatewaySet(
            generator=scripted([(".*", "garbage", "generate")]),
            composer=scripted(
                [
                    (".*", "What was there?", "decompose"),
                    (".*", "A composed answer from context alone.", "compose"),
                ]
            ),
            validator=accept_validator(),
        )
        result = answer_descriptive("Overview of Aarberg?", bundle, gateways, fixture_store)
        assert result.delivered
        assert result.facts_text == ""
        assert result.warnings

    def test_subquestion_order_independent_of_parallelism(self, fixture_store, bundle):
        canned = "\n".join(f"How many lakes were there in {y}?" for y in (1877, 1901, 1916, 1930))
        def gateways():
            return GatewaySet(
                generator=scripted(
                    [
                        (
                            r"in (\d{4})\?",
                            'SELECT (COUNT(?f) AS ?n) WHERE { ?f cmo:featureType "lake" }',
                            "generate",
                        )
                    ]
                ),
                composer=scripted(
                    [
                        (".*", canned, "decompose"),
                        (".*", "Some lakes.", "answer"),
                        (".*", "Overview.", "compose"),
                    ]
                ),
                validator=accept_validator(),
            )
        wide = answer_descriptive(
            "Overview?", bundle, gateways(), fixture_store, cfg=QaConfig(parallel_width=4)
        )
        narrow = answer_descriptive(
            "Overview?", bundle, gateways(), fixture_store, cfg=QaConfig(parallel_width=1)
        )
        assert [r.question for r in wide.sub_results] == [r.question for r in narrow.sub_results]
        assert wide.facts_text == narrow.facts_text


class TestExtractPlaceYear:
    def test_both(self, bundle):
        assert extract_place_year("Overview about Aarberg in 1901.", bundle) == ("aarberg", 1901)

    def test_neither(self, bundle):
        assert extract_place_year("Tell me about water.", bundle) == (None, None)
