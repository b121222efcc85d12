"""SPARQL 1.1 Query Results JSON serialization."""

from __future__ import annotations

from .. import kgstore as kg
from .evaluator import SolutionTable

_XSD = kg.XSD


def term_to_json(term: kg.Term, store: kg.Store | None = None) -> dict:
    if term.kind == "iri":
        return {"type": "uri", "value": term.value}
    if term.kind == "geom":
        value = store.wkt(term.value) if store is not None else str(term.value)
        return {"type": "literal", "value": value, "datatype": kg.WKT_DATATYPE}
    if term.datatype == "string":
        return {"type": "literal", "value": term.value}
    if term.datatype == "boolean":
        lexical = "true" if term.value else "false"
    elif term.datatype == "integer":
        lexical = str(term.value)
    else:
        lexical = repr(term.value)
    return {
        "type": "literal",
        "value": lexical,
        "datatype": _XSD + term.datatype,
    }


def to_results_json(result: SolutionTable | bool, store: kg.Store | None = None) -> dict:
    """SPARQL 1.1 JSON results document (``boolean`` form for ASK)."""
    if isinstance(result, bool):
        return {"head": {}, "boolean": result}
    bindings = []
    for row in result.rows:
        binding = {}
        for var, term in zip(result.variables, row):
            if term is not None:
                binding[var] = term_to_json(term, store)
        bindings.append(binding)
    return {"head": {"vars": list(result.variables)}, "results": {"bindings": bindings}}
