"""Benchmark execution: items in, outcome log and descriptive rows out.

Items run sequentially in list order (descriptive sub-questions already
parallelize internally), so two runs over the same deterministic gateways
produce identical logs.
"""

from __future__ import annotations

from ..kgstore import Store
from ..qapipeline import GatewaySet, PromptBundle, QaConfig, answer_descriptive, answer_factual
from .benchmark import BenchmarkItem
from .factcheck import fact_check
from .metrics import OutcomeItem, OutcomeLog, answer_accuracy, content_quality, sparql_semantic_check


def run_benchmark(
    items: list[BenchmarkItem],
    bundle: PromptBundle,
    gateways: GatewaySet,
    store: Store,
    cfg: QaConfig | None = None,
    check_sparql: bool = True,
    use_map_image: bool = False,
    use_search: bool = False,
) -> tuple[OutcomeLog, list[dict]]:
    """Run factual items through the factual pipeline and overview items
    through the descriptive one (plus fact-check and quality judging)."""
    cfg = cfg or QaConfig()
    log = OutcomeLog()
    descriptive_rows: list[dict] = []
    for item in items:
        if item.answer_kind == "open":
            descriptive_rows.append(
                _run_descriptive(item, bundle, gateways, store, cfg, use_map_image, use_search)
            )
            continue
        result = answer_factual(item.question, bundle, gateways, store, cfg)
        outcome = OutcomeItem(
            item_id=item.id,
            question=item.question,
            category=item.category,
            answer_kind=item.answer_kind,
            delivered=result.delivered,
            attempts=result.attempts,
            generated_query=result.query_text,
            answer_text=result.answer_text,
            failed_stage=result.failed_stage,
            gold_answer=item.gold_answer,
        )
        if result.delivered and item.gold_answer is not None:
            check = answer_accuracy(result.answer_text, item.gold_answer, item.answer_kind)
            outcome.correct = check.ok
            outcome.accuracy_reason = check.reason
        if check_sparql and result.query_text:
            check = sparql_semantic_check(
                item.question,
                result.query_text,
                store.schema,
                gateways.judge,
                municipalities=bundle.municipalities,
            )
            outcome.sparql_ok_auto = check.verdict
            outcome.sparql_rationale = check.rationale
        log.items.append(outcome)
    return log, descriptive_rows


def _run_descriptive(
    item: BenchmarkItem,
    bundle: PromptBundle,
    gateways: GatewaySet,
    store: Store,
    cfg: QaConfig,
    use_map_image: bool,
    use_search: bool,
) -> dict:
    result = answer_descriptive(
        item.question,
        bundle,
        gateways,
        store,
        cfg,
        use_map_image=use_map_image,
        use_search=use_search,
    )
    row: dict = {
        "item_id": item.id,
        "question": item.question,
        "delivered": result.delivered,
        "answer_text": result.answer_text,
        "contexts_used": list(result.contexts_used),
        "n_factual_questions": 0,
        "fact_accuracy_auto": None,
        "fact_accuracy_manual": None,
        "fact_report": None,
        "quality": {},
    }
    if not result.delivered or gateways.judge is None:
        return row
    report = fact_check(
        result.answer_text,
        gateways.judge,
        lambda q: answer_factual(q, bundle, gateways, store, cfg),
    )
    row["fact_report"] = report.to_dict()
    row["n_factual_questions"] = len(report.facts)
    row["fact_accuracy_auto"] = report.fact_accuracy_auto
    row["fact_accuracy_manual"] = report.fact_accuracy_manual
    row["quality"] = content_quality(item.question, result.answer_text, gateways.judge)
    return row
