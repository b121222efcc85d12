"""Parser and evaluator for the query subset served over the store."""

from .ast import AskQuery, SelectQuery
from .parser import parse, to_text, validate_against_schema
from .evaluator import SolutionTable, evaluate
from .results import to_results_json

__all__ = [
    "AskQuery",
    "SelectQuery",
    "SolutionTable",
    "parse",
    "to_text",
    "validate_against_schema",
    "evaluate",
    "to_results_json",
]
