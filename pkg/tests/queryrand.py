"""Seeded random stores and queries for the evaluator-equivalence harness."""

from __future__ import annotations

import random

from chronomap import kgstore as kg
from chronomap.kgstore import CMF, CMO, CMR, Store, Triple
from chronomap.query import ast

TYPES = ["lake", "river", "forest", "wetland", "stream"]
YEARS = [1877, 1901, 1916, 1930]
MUNIS = ["aarberg", "bargen", "seedorf"]
AREAS = [100.0, 250.0, 500.0, 1500.0, 2000.0, 4500.0]
RELS = ["near", "intersects", "contains", "within", "changedTo", "northOf"]


def random_store(rng: random.Random, max_triples: int = 200) -> Store:
    store = Store()
    subjects = [kg.iri(CMF + f"s{i}") for i in range(rng.randint(3, 10))]
    n = rng.randint(10, max_triples)
    attempts = 0
    while len(store) < n and attempts < n * 4:
        attempts += 1
        s = rng.choice(subjects)
        roll = rng.random()
        if roll < 0.25:
            t = Triple(s, kg.iri(CMO + "featureType"), kg.lit_string(rng.choice(TYPES)))
        elif roll < 0.45:
            t = Triple(s, kg.iri(CMO + "year"), kg.lit_year(rng.choice(YEARS)))
        elif roll < 0.6:
            t = Triple(s, kg.iri(CMO + "areaSqm"), kg.lit_decimal(rng.choice(AREAS)))
        elif roll < 0.7:
            t = Triple(s, kg.iri(CMO + "municipality"), kg.lit_string(rng.choice(MUNIS)))
        elif roll < 0.78:
            t = Triple(s, kg.iri(CMO + "sheet"), kg.lit_string(rng.choice(["TA_110", "TA_111"])))
        else:
            o = rng.choice(subjects)
            if o == s:
                continue
            t = Triple(s, kg.iri(CMR + rng.choice(RELS)), o)
        store.insert(t)
    return store


def _some_object(rng: random.Random, store: Store):
    triples = store.match()
    return rng.choice(triples).o if triples else kg.lit_int(1)


def _predicates(store: Store) -> list[kg.Term]:
    return sorted({t.p for t in store.match()}, key=lambda t: t.value)


def random_pattern(rng: random.Random, store: Store, var_names: list[str]) -> ast.TriplePattern:
    triples = store.match()
    base = rng.choice(triples) if triples else None

    def subject():
        if rng.random() < 0.6:
            return ast.Var(rng.choice(var_names))
        return base.s if base is not None else kg.iri(CMF + "s0")

    def predicate():
        if rng.random() < 0.15:
            return ast.Var(rng.choice(var_names))
        if base is not None and rng.random() < 0.8:
            return base.p
        preds = _predicates(store)
        return rng.choice(preds) if preds else kg.iri(CMO + "year")

    def obj():
        roll = rng.random()
        if roll < 0.45:
            return ast.Var(rng.choice(var_names))
        if base is not None and roll < 0.85:
            return base.o
        return _some_object(rng, store)

    return ast.TriplePattern(subject(), predicate(), obj())


def random_filter(rng: random.Random, var_names: list[str]) -> ast.Filter:
    var = ast.Var(rng.choice(var_names))
    roll = rng.random()
    if roll < 0.5:
        op = rng.choice(["<", "<=", ">", ">=", "=", "!="])
        threshold = kg.lit_int(rng.choice([150, 500, 1500, 1901, 1916]))
        expr: ast.Expr = ast.Comparison(op, var, threshold)
    elif roll < 0.75:
        expr = ast.Comparison("=", var, kg.lit_string(rng.choice(TYPES + MUNIS)))
    else:
        left = ast.Comparison(">", var, kg.lit_int(100))
        right = ast.Comparison("<", var, kg.lit_int(2000))
        expr = ast.AndExpr((left, right)) if rng.random() < 0.5 else ast.OrExpr((left, right))
    if rng.random() < 0.15:
        expr = ast.NotExpr(expr)
    return ast.Filter(expr)


def random_group(rng: random.Random, store: Store, var_names: list[str], depth: int = 0) -> ast.Group:
    items: list = []
    for _ in range(rng.randint(1, 3)):
        items.append(random_pattern(rng, store, var_names))
    if rng.random() < 0.4:
        items.append(random_filter(rng, var_names))
    if depth == 0 and rng.random() < 0.3:
        items.append(ast.OptionalGroup(random_group(rng, store, var_names, depth=1)))
    rng.shuffle(items)
    return ast.Group(tuple(items))


def random_query(rng: random.Random, store: Store) -> ast.Query:
    var_names = ["a", "b", "c"][: rng.randint(2, 3)]
    group = random_group(rng, store, var_names)
    bound = ast.pattern_vars(group)
    if not bound:
        group = ast.Group(group.items + (ast.TriplePattern(ast.Var("a"), kg.iri(CMO + "year"), ast.Var("b")),))
        bound = ast.pattern_vars(group)
    if rng.random() < 0.25:
        return ast.AskQuery(where=group)
    roll = rng.random()
    if roll < 0.3:
        agg_fn = rng.choice(["COUNT", "SUM", "AVG", "MIN", "MAX"])
        arg = None if (agg_fn == "COUNT" and rng.random() < 0.5) else ast.Var(rng.choice(bound))
        group_by = ()
        projection: tuple = (ast.Aggregate(agg_fn, arg, ast.Var("agg")),)
        if rng.random() < 0.5 and len(bound) > 1:
            gvar = rng.choice(bound)
            group_by = (ast.Var(gvar),)
            projection = (ast.Var(gvar),) + projection
        order_by: tuple = ()
        if rng.random() < 0.4:
            order_by = ((ast.Var("agg"), rng.random() < 0.5),)
        return ast.SelectQuery(
            distinct=False,
            projection=projection,
            where=group,
            group_by=group_by,
            order_by=order_by,
            limit=rng.choice([None, 2, 5]),
            offset=rng.choice([None, None, 1]),
        )
    if roll < 0.4:
        projection = None  # SELECT *
    else:
        k = rng.randint(1, len(bound))
        projection = tuple(ast.Var(v) for v in rng.sample(bound, k))
    order_by = ()
    if rng.random() < 0.4:
        order_by = ((ast.Var(rng.choice(bound)), rng.random() < 0.5),)
    return ast.SelectQuery(
        distinct=rng.random() < 0.4,
        projection=projection,
        where=group,
        order_by=order_by,
        limit=rng.choice([None, None, 1, 3, 10]),
        offset=rng.choice([None, None, 2]),
    )
