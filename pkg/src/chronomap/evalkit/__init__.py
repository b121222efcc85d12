"""Benchmark generation and the evaluation metric suite."""

from .benchmark import BenchmarkItem, generate_benchmark, load_benchmark, save_benchmark
from .factcheck import ExtractedFact, FactReport, fact_check
from .metrics import (
    AccuracyCheck,
    OutcomeItem,
    OutcomeLog,
    SemanticCheck,
    answer_accuracy,
    content_quality,
    delivery_rate,
    sparql_semantic_check,
)
from .report import build_report, format_rates, load_report, render_report, save_report
from .runner import run_benchmark

__all__ = [
    "AccuracyCheck",
    "BenchmarkItem",
    "ExtractedFact",
    "FactReport",
    "OutcomeItem",
    "OutcomeLog",
    "SemanticCheck",
    "answer_accuracy",
    "build_report",
    "content_quality",
    "delivery_rate",
    "fact_check",
    "format_rates",
    "generate_benchmark",
    "load_benchmark",
    "load_report",
    "render_report",
    "run_benchmark",
    "save_benchmark",
    "save_report",
    "sparql_semantic_check",
]
