"""Benchmark-set generation from store contents.

Question templates are instantiated with types, municipalities, years, and
value thresholds actually present in the store; gold queries are
hand-written templates evaluated directly, so gold answers never depend on
the model-generation path. Generation is seeded and deterministic; an
optional gateway can paraphrase question surfaces without touching gold
data.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path

from .. import kgstore as kg
from ..errors import GatewayError
from ..kgstore import CMO, Store
from ..llmgate import ChatClient, chat_request
from ..query import evaluate, parse

CATEGORIES = (
    "property",
    "relationship",
    "qualifier",
    "aggregate",
    "superlative",
    "spatial-temporal",
    "overview",
)


@dataclass
class BenchmarkItem:
    id: str
    question: str
    category: str
    answer_kind: str  # yesno | numeric | open
    gold_query: str | None
    gold_answer: str | None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "BenchmarkItem":
        return cls(**doc)


def save_benchmark(items: list[BenchmarkItem], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps([i.to_dict() for i in items], indent=1, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def load_benchmark(path: str | Path) -> list[BenchmarkItem]:
    return [BenchmarkItem.from_dict(d) for d in json.loads(Path(path).read_text(encoding="utf-8"))]


# ---------------------------------------------------------------------------
# Store inventory
# ---------------------------------------------------------------------------


def _store_values(store: Store):
    types = sorted({t.o.value for t in store.match(None, kg.iri(CMO + "featureType"), None)})
    munis = sorted({t.o.value for t in store.match(None, kg.iri(CMO + "municipality"), None)})
    years = sorted({t.o.value for t in store.match(None, kg.iri(CMO + "year"), None)})
    areas: dict[str, list[float]] = {}
    for t in store.match(None, kg.iri(CMO + "areaSqm"), None):
        ftypes = store.match(t.s, kg.iri(CMO + "featureType"), None)
        if ftypes:
            areas.setdefault(ftypes[0].o.value, []).append(float(t.o.value))
    for vals in areas.values():
        vals.sort()
    return types, munis, years, areas


def _quantile(values: list[float], q: float) -> float:
    if not values:
        return 0.0
    idx = min(len(values) - 1, max(0, int(q * (len(values) - 1))))
    return values[idx]


# ---------------------------------------------------------------------------
# Templates
# ---------------------------------------------------------------------------


def _yesno_instances(types, munis, years, areas, rng):
    out = []
    for t in types:
        for m in munis:
            for y in years:
                out.append(
                    (
                        "property",
                        f"Were there {t}s in {m.capitalize()} in {y}?",
                        f'ASK {{ ?f cmo:featureType "{t}" . ?f cmo:municipality "{m}" . ?f cmo:year {y} }}',
                    )
                )
    for t in types:
        for t2 in types:
            for y in years:
                out.append(
                    (
                        "relationship",
                        f"Was any {t} near a {t2} in {y}?",
                        f'ASK {{ ?a cmo:featureType "{t}" . ?a cmo:year {y} . ?a cmr:near ?b . '
                        f'?b cmo:featureType "{t2}" . ?b cmo:year {y} }}',
                    )
                )
    for t, values in areas.items():
        for y in years:
            v = int(_quantile(values, rng.choice((0.25, 0.5, 0.75))))
            out.append(
                (
                    "qualifier",
                    f"Were there {t}s larger than {v} square meters in {y}?",
                    f'ASK {{ ?f cmo:featureType "{t}" . ?f cmo:year {y} . '
                    f"?f cmo:areaSqm ?a FILTER(?a > {v}) }}",
                )
            )
    for t in types:
        for y0, y1 in zip(years, years[1:]):
            out.append(
                (
                    "spatial-temporal",
                    f"Did any {t} change between {y0} and {y1}?",
                    f'ASK {{ ?a cmo:featureType "{t}" . ?a cmo:year {y0} . '
                    f"?a cmr:changedTo ?b . ?b cmo:year {y1} }}",
                )
            )
    return out


def _numeric_instances(types, munis, years, areas, rng):
    out = []
    for t in types:
        for m in munis:
            for y in years:
                out.append(
                    (
                        "aggregate",
                        f"How many {t}s were there in {m.capitalize()} in {y}?",
                        f'SELECT (COUNT(?f) AS ?n) WHERE {{ ?f cmo:featureType "{t}" . '
                        f'?f cmo:municipality "{m}" . ?f cmo:year {y} }}',
                    )
                )
    for t in areas:
        for m in munis:
            for y in years:
                out.append(
                    (
                        "superlative",
                        f"What was the area in square meters of the largest {t} in {m.capitalize()} in {y}?",
                        f'SELECT ?a WHERE {{ ?f cmo:featureType "{t}" . ?f cmo:municipality "{m}" . '
                        f"?f cmo:year {y} . ?f cmo:areaSqm ?a }} ORDER BY DESC(?a) LIMIT 1",
                    )
                )
    for t, values in areas.items():
        for y in years:
            v = int(_quantile(values, rng.choice((0.25, 0.5, 0.75))))
            out.append(
                (
                    "qualifier",
                    f"How many {t}s were larger than {v} square meters in {y}?",
                    f'SELECT (COUNT(?f) AS ?n) WHERE {{ ?f cmo:featureType "{t}" . '
                    f"?f cmo:year {y} . ?f cmo:areaSqm ?a FILTER(?a > {v}) }}",
                )
            )
    for t in types:
        for t2 in types:
            for y in years:
                out.append(
                    (
                        "spatial-temporal",
                        f"How many {t}s were near a {t2} in {y}?",
                        f'SELECT (COUNT(?a) AS ?n) WHERE {{ ?a cmo:featureType "{t}" . ?a cmo:year {y} . '
                        f'?a cmr:near ?b . ?b cmo:featureType "{t2}" . ?b cmo:year {y} }}',
                    )
                )
    return out


def render_gold(result, kind: str) -> str | None:
    """Gold answer string per answer kind; None when the query had no rows."""
    if kind == "yesno":
        return "yes" if result else "no"
    if not result.rows or result.rows[0][0] is None:
        return None
    value = result.rows[0][0].value
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


def _paraphrase(question: str, gateway: ChatClient | None) -> str:
    if gateway is None:
        return question
    try:
        reply = gateway.complete(
            chat_request(
                "Rephrase the question, keeping its meaning, entities, years, and "
                "numbers exactly. Reply with the rephrased question only.",
                question,
                tag="paraphrase",
            )
        )
    except GatewayError:
        return question
    text = reply.text.strip()
    return text or question


def generate_benchmark(
    store: Store,
    counts: dict[str, int],
    gateway: ChatClient | None = None,
    seed: int = 0,
) -> tuple[list[BenchmarkItem], list[str]]:
    """Instantiate benchmark items from store values.

    ``counts`` maps yesno/numeric/overview to target sizes. When a pool
    cannot satisfy its target on a small store, all instances are emitted
    and a warning is returned.
    """
    rng = random.Random(seed)
    types, munis, years, areas = _store_values(store)
    warnings: list[str] = []
    if not munis or len(years) < 2:
        raise kg.StoreError("benchmark generation needs >=1 municipality and >=2 timestamps")
    items: list[BenchmarkItem] = []

    def fill(kind: str, pool: list[tuple[str, str, str]], target: int):
        rng.shuffle(pool)
        taken = 0
        for category, question, query in pool:
            if taken >= target:
                break
            gold = render_gold(evaluate(parse(query), store), kind)
            if gold is None:
                continue  # no defined gold (e.g. superlative over empty set)
            items.append(
                BenchmarkItem(
                    id=f"{kind}-{taken:03d}",
                    question=_paraphrase(question, gateway),
                    category=category,
                    answer_kind=kind,
                    gold_query=query,
                    gold_answer=gold,
                )
            )
            taken += 1
        if taken < target:
            warnings.append(f"only {taken} of {target} {kind} items could be generated")

    fill("yesno", _yesno_instances(types, munis, years, areas, rng), counts.get("yesno", 0))
    fill("numeric", _numeric_instances(types, munis, years, areas, rng), counts.get("numeric", 0))

    overview_target = counts.get("overview", 0)
    phrasings = (
        "Please provide an overview about {m} in {y}.",
        "What was {m} like in {y}?",
        "How were the water bodies distributed in {m} in {y}?",
    )
    overview_pool = [(p, m, y) for p in phrasings for m in munis for y in years]
    rng.shuffle(overview_pool)
    for idx, (phrasing, m, y) in enumerate(overview_pool[:overview_target]):
        items.append(
            BenchmarkItem(
                id=f"overview-{idx:03d}",
                question=_paraphrase(phrasing.format(m=m.capitalize(), y=y), gateway),
                category="overview",
                answer_kind="open",
                gold_query=None,
                gold_answer=None,
            )
        )
    if len(overview_pool) < overview_target:
        warnings.append(
            f"only {len(overview_pool)} of {overview_target} overview items could be generated"
        )
    return items, warnings
