import json

import pytest
from fastapi.testclient import TestClient

from chronomap.service import AppConfig, AppContext, create_app


@pytest.fixture(scope="module")
def client(service_env):
    ctx = AppContext.from_config(AppConfig.load(service_env["config"]))
    with TestClient(create_app(ctx), raise_server_exceptions=False) as c:
        c.ctx = ctx
        yield c


class TestHealth:
    def test_ok(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert body["triples"] > 0
        assert body["years"] == [1877, 1901, 1916, 1930]
        assert body["municipalities"] == ["aarberg", "bargen"]


class TestSparqlEndpoint:
    def test_select_results_shape(self, client):
        response = client.post(
            "/sparql",
            json={"query": 'SELECT ?f ?a WHERE { ?f cmo:featureType "lake" . ?f cmo:areaSqm ?a } LIMIT 3'},
        )
        assert response.status_code == 200
        body = response.json()
        assert set(body) == {"head", "results"}
        assert body["head"]["vars"] == ["f", "a"]
        for row in body["results"]["bindings"]:
            assert row["f"]["type"] == "uri"
            assert row["a"]["type"] == "literal"
            assert "datatype" in row["a"]

    def test_ask_shape(self, client):
        body = client.post("/sparql", json={"query": "ASK { ?s ?p ?o }"}).json()
        assert body == {"head": {}, "boolean": True}

    def test_syntax_error(self, client):
        response = client.post("/sparql", json={"query": "SELECT ?f WHERE {\n ?f cmo:areaSqm }"})
        assert response.status_code == 400
        body = response.json()
        assert body["code"] == "parse_error"
        assert "line 2" in body["message"]
        assert "column" in body["message"]

    def test_schema_violation(self, client):
        response = client.post("/sparql", json={"query": "ASK { ?f cmo:population 5 }"})
        assert response.status_code == 400
        assert response.json()["code"] == "schema_violation"

    def test_no_stack_traces_leak(self, client):
        response = client.post("/sparql", json={"query": "???"})
        assert "Traceback" not in response.text


class TestQaEndpoints:
    def test_factual_deterministic(self, client, bench_items):
        question = bench_items[0].question
        first = client.post("/qa/factual", json={"question": question})
        second = client.post("/qa/factual", json={"question": question})
        assert first.status_code == 200
        assert first.json() == second.json()
        body = first.json()
        assert body["status"] == "delivered"
        assert body["attempts"] == 1
        assert body["query"]
        assert body["solution"] is not None

    def test_descriptive_with_search(self, client):
        response = client.post(
            "/qa/descriptive",
            json={
                "question": "Please provide an overview about Aarberg in 1901.",
                "use_search": True,
            },
        )
        body = response.json()
        assert response.status_code == 200
        assert body["status"] == "delivered"
        assert "kg" in body["contexts_used"]
        assert "search" in body["contexts_used"]
        assert body["answer_text"]

    def test_descriptive_with_map_image(self, client):
        response = client.post(
            "/qa/descriptive",
            json={
                "question": "Please provide an overview about Aarberg in 1901.",
                "use_map_image": True,
            },
        )
        body = response.json()
        assert "map-image" in body["contexts_used"]

    def test_store_not_mutated_by_requests(self, client):
        before = client.get("/health").json()["triples"]
        client.post("/qa/factual", json={"question": "How many lakes were there in Bargen in 1916?"})
        client.post("/sparql", json={"query": "ASK { ?s ?p ?o }"})
        assert client.get("/health").json()["triples"] == before


class TestFeatures:
    def test_filters_and_properties(self, client):
        response = client.get("/features", params={"municipality": "bargen", "year": 1916, "type": "lake"})
        body = response.json()
        assert body["type"] == "FeatureCollection"
        assert len(body["features"]) == 2
        for feature in body["features"]:
            props = feature["properties"]
            assert props["type"] == "lake"
            assert props["year"] == 1916
            assert "areaSqm" in props
            assert props["iri"].startswith("http://chronomap.local/feature/")
            assert feature["geometry"]["type"] == "Polygon"

    def test_current_name_surfaces(self, client):
        body = client.get("/features", params={"type": "lake", "year": 1877}).json()
        names = [f["properties"].get("currentName") for f in body["features"]]
        assert "Lobsigensee" in names

    def test_empty_filter_empty_collection(self, client):
        body = client.get("/features", params={"municipality": "zurich"}).json()
        assert body["features"] == []


class TestSchemaAndTiles:
    def test_schema_catalog(self, client):
        body = client.get("/schema").json()
        assert {"properties", "relations"} == set(body)
        iris = {p["iri"] for p in body["properties"]}
        assert any(iri.endswith("featureType") for iri in iris)

    def test_tile_present(self, client):
        response = client.get("/tiles/aarberg/1901")
        assert response.status_code == 200
        assert response.headers["content-type"] == "image/png"

    def test_tile_missing(self, client):
        response = client.get("/tiles/bargen/1877")
        assert response.status_code == 404
        assert response.json()["code"] == "not_found"
