"""Evaluation report assembly and rendering.

The JSON document carries raw counts plus pre-rendered metric rows; the
text rendering lays the same numbers out in the two-table shape used for
factual and descriptive evaluation (delivery rate / accuracy / query
accuracy auto / manual, then fact accuracy and content-quality columns).
All ratios render at two decimals; mean factual-question counts at one;
perplexity is out of scope and renders n/a.
"""

from __future__ import annotations

import json
from pathlib import Path

from .metrics import OutcomeLog, delivery_rate


def format_rates(values: list[float | None]) -> str:
    """Slash-joined 2-decimal rendering with n/a for missing values."""
    return " / ".join("n/a" if v is None else f"{v:.2f}" for v in values)


def _ratio(numerator: int, denominator: int) -> float | None:
    return None if denominator == 0 else numerator / denominator


def build_report(
    log: OutcomeLog,
    descriptive: list[dict] | None = None,
    label: str = "run",
) -> dict:
    """Aggregate an outcome log (and optional descriptive rows) into a report.

    Denominators follow the metric definitions: accuracy over delivered
    items, query-accuracy auto over non-error auto verdicts, manual over
    items with a manual verdict set.
    """
    items = log.items
    delivered = [i for i in items if i.delivered]
    judged = [i for i in items if i.correct is not None]
    auto = [i for i in items if isinstance(i.sparql_ok_auto, bool)]
    auto_errors = sum(1 for i in items if i.sparql_ok_auto == "error")
    manual = [i for i in items if i.sparql_ok_manual is not None]
    rates = [
        delivery_rate(log),
        _ratio(sum(1 for i in judged if i.correct), len(judged)),
        _ratio(sum(1 for i in auto if i.sparql_ok_auto), len(auto)),
        _ratio(sum(1 for i in manual if i.sparql_ok_manual), len(manual)),
    ]
    report = {
        "label": label,
        "factual": {
            "n": len(items),
            "delivered": len(delivered),
            "delivery_rate": rates[0],
            "accuracy": rates[1],
            "sparql_accuracy_auto": rates[2],
            "sparql_accuracy_manual": rates[3],
            "sparql_auto_errors": auto_errors,
            "row": format_rates(rates),
        },
        "descriptive": None,
    }
    if descriptive:
        fa_auto = [d["fact_accuracy_auto"] for d in descriptive if d.get("fact_accuracy_auto") is not None]
        fa_manual = [d["fact_accuracy_manual"] for d in descriptive if d.get("fact_accuracy_manual") is not None]
        n_questions = [d["n_factual_questions"] for d in descriptive]
        quality: dict[str, list[float]] = {"relevance": [], "fluency": [], "informativeness": []}
        for d in descriptive:
            for criterion, scores in quality.items():
                value = d.get("quality", {}).get(criterion)
                if isinstance(value, (int, float)):
                    scores.append(float(value))
        mean = lambda xs: (sum(xs) / len(xs)) if xs else None
        mean_q = mean([float(n) for n in n_questions])
        desc_rates = {
            "n": len(descriptive),
            "fact_accuracy_auto": mean(fa_auto),
            "fact_accuracy_manual": mean(fa_manual),
            "mean_factual_questions": mean_q,
            "perplexity": None,  # requires token log-probabilities; not measured
            "relevance": mean(quality["relevance"]),
            "fluency": mean(quality["fluency"]),
            "informativeness": mean(quality["informativeness"]),
        }
        desc_rates["row"] = " / ".join(
            [
                format_rates([desc_rates["fact_accuracy_auto"], desc_rates["fact_accuracy_manual"]]),
                "n/a" if mean_q is None else f"{mean_q:.1f}",
                "n/a",  # perplexity column
                format_rates([desc_rates["relevance"], desc_rates["fluency"], desc_rates["informativeness"]]),
            ]
        )
        report["descriptive"] = desc_rates
    return report


def render_report(report: dict) -> str:
    """Plain-text tables mirroring the JSON report."""
    lines = [
        f"== Factual QA ({report['label']}) ==",
        "generator | delivery rate / accuracy / sparql acc (auto) / sparql acc (manual)",
        f"{report['label']} | {report['factual']['row']}",
        f"items: {report['factual']['n']}  delivered: {report['factual']['delivered']}"
        + (
            f"  judge errors: {report['factual']['sparql_auto_errors']}"
            if report["factual"].get("sparql_auto_errors")
            else ""
        ),
    ]
    desc = report.get("descriptive")
    if desc:
        lines += [
            "",
            "== Descriptive QA ==",
            "contexts | fact acc (auto) / fact acc (manual) / factual questions / perplexity / relevance / fluency / informativeness",
            f"{report['label']} | {desc['row']}",
            f"items: {desc['n']}",
        ]
    return "\n".join(lines) + "\n"


def save_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def load_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
