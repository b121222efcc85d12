"""Factual and descriptive question-answering workflows.

Factual: generate a query from a structured prompt, parse and
schema-validate it, run a model validation pass (accept / revise once /
reject), evaluate against the store, and synthesize an answer from the
rows. Parse, schema, and evaluation failures regenerate with the error
text appended, up to the configured retry budget.

Descriptive: decompose into sub-questions (template fallback when the
model yields none), answer each through the factual workflow, fold the
delivered answers into plain-text facts, then compose a final answer with
optional map-image and web-search context. Context sources that cannot be
resolved degrade to a warning, never an error.

The validator reply protocol is one token on the first line: ``ACCEPT``,
``REVISE`` (revised query follows), or ``REJECT: reason``. Anything else
counts as acceptance so a sloppy validator cannot take the pipeline down.
"""

from __future__ import annotations

import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import kgstore as kg
from .errors import ChronomapError, ConfigError, GatewayError, QuerySyntaxError
from .kgstore import CMO, Schema, Store
from .llmgate import ChatClient, ChatRequest, ImagePart, SearchClient, TextPart, chat_request
from .query import evaluate, parse, to_results_json, to_text, validate_against_schema
from .query.evaluator import SolutionTable


@dataclass
class QaConfig:
    retry_max: int = 2
    parallel_width: int = 4
    facts_cap_chars: int = 6000
    tiles_dir: str | None = None
    search_k: int = 5


@dataclass
class GatewaySet:
    """One chat client per pipeline role; roles may share an instance."""

    generator: ChatClient
    composer: ChatClient
    validator: ChatClient | None = None
    judge: ChatClient | None = None
    search: SearchClient | None = None


# ---------------------------------------------------------------------------
# Prompt bundle
# ---------------------------------------------------------------------------

BASE_CONSTRAINTS = (
    "Use only predicates from the catalog; never invent properties or relations.",
    "When the question names a year, always bind cmo:year to that year.",
    "Municipality names are lowercase string literals matched via cmo:municipality.",
    "Feature types are lowercase singular nouns matched via cmo:featureType.",
    "Return exactly one query and nothing else.",
)


@dataclass(frozen=True)
class PromptBundle:
    municipalities: tuple[str, ...]
    feature_types: tuple[str, ...]
    years: tuple[int, ...]
    schema_json: str
    constraints: tuple[str, ...]
    fewshot: tuple[tuple[str, str], ...]

    def system_prompt(self) -> str:
        lines = [
            "You translate questions about historical map features into queries.",
            "",
            "Known municipalities: " + ", ".join(self.municipalities),
            "Known feature types: " + ", ".join(self.feature_types),
            "Known years: " + ", ".join(str(y) for y in self.years),
            "",
            "Predicate catalog (fixed vs optional properties, relations):",
            self.schema_json,
            "",
            "Rules:",
        ]
        lines += [f"- {c}" for c in self.constraints]
        lines.append("")
        lines.append("Examples:")
        for question, query in self.fewshot:
            lines.append(f"Q: {question}")
            lines.append(f"A: {query}")
        return "\n".join(lines)


def build_prompt(store: Store, schema: Schema, fewshot_path: str | Path) -> PromptBundle:
    """Derive choice lists from the store and load few-shot examples.

    Serialization is deterministic: same store and file give a byte-equal
    system prompt.
    """
    raw = json.loads(Path(fewshot_path).read_text(encoding="utf-8"))
    fewshot = tuple((row["question"], row["query"]) for row in raw)
    if not fewshot:
        raise ConfigError(f"few-shot file {fewshot_path} is empty")
    municipalities = sorted(
        {t.o.value for t in store.match(None, kg.iri(CMO + "municipality"), None)}
    )
    feature_types = sorted(
        {t.o.value for t in store.match(None, kg.iri(CMO + "featureType"), None)}
    )
    years = sorted({t.o.value for t in store.match(None, kg.iri(CMO + "year"), None)})
    return PromptBundle(
        municipalities=tuple(municipalities),
        feature_types=tuple(feature_types),
        years=tuple(years),
        schema_json=json.dumps(schema.to_json(), sort_keys=True),
        constraints=BASE_CONSTRAINTS,
        fewshot=fewshot,
    )


# ---------------------------------------------------------------------------
# Factual workflow
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationVerdict:
    kind: str  # accepted | revised | rejected
    query: str | None = None
    reason: str | None = None


@dataclass
class FactualResult:
    question: str
    query_text: str | None = None
    verdict: ValidationVerdict | None = None
    solution: SolutionTable | bool | None = None
    answer_text: str | None = None
    status: str = "failed"  # delivered | failed
    failed_stage: str | None = None
    failure_reason: str | None = None
    attempts: int = 0

    @property
    def delivered(self) -> bool:
        return self.status == "delivered"

    def solution_json(self, store: Store | None = None):
        if self.solution is None:
            return None
        return to_results_json(self.solution, store)

    def to_dict(self, store: Store | None = None) -> dict:
        return {
            "question": self.question,
            "query": self.query_text,
            "validation": None
            if self.verdict is None
            else {"verdict": self.verdict.kind, "query": self.verdict.query, "reason": self.verdict.reason},
            "solution": self.solution_json(store),
            "answer_text": self.answer_text,
            "status": self.status,
            "failed_stage": self.failed_stage,
            "failure_reason": self.failure_reason,
            "attempts": self.attempts,
        }


_FENCE_RE = re.compile(r"```[a-zA-Z]*\s*(.*?)```", re.DOTALL)


def extract_query(text: str) -> str:
    """Query text from a model reply, unwrapping one code fence if present."""
    m = _FENCE_RE.search(text)
    return (m.group(1) if m else text).strip()


def _generation_request(question: str, bundle: PromptBundle, feedback: str | None) -> ChatRequest:
    user = f"Question: {question}"
    if feedback:
        user += (
            f"\n\nYour previous query failed with: {feedback}\n"
            "Return a corrected query."
        )
    return chat_request(bundle.system_prompt(), user, tag="generate")


def _run_validation(
    question: str, query_text: str, gateways: GatewaySet, schema: Schema
) -> ValidationVerdict:
    if gateways.validator is None:
        return ValidationVerdict("accepted", query=query_text)
    def ask(text: str):
        return gateways.validator.complete(
            chat_request(
                "You check whether a query faithfully answers the question. "
                "Reply ACCEPT, or REVISE followed by a corrected query, or REJECT: reason.",
                f"Question: {question}\nQuery:\n{text}",
                tag="validate",
            )
        )

    try:
        reply = ask(query_text)
    except GatewayError as exc:
        return ValidationVerdict("accepted", query=query_text, reason=f"validator unavailable: {exc}")
    head, _, tail = reply.text.strip().partition("\n")
    word = head.strip().split(":")[0].strip().upper()
    if word == "REJECT":
        return ValidationVerdict("rejected", reason=head.partition(":")[2].strip() or "rejected")
    if word != "REVISE":
        return ValidationVerdict("accepted", query=query_text)
    revised = extract_query(head.partition(":")[2].strip() + "\n" + tail)
    try:
        revised_ast = parse(revised)
    except QuerySyntaxError as exc:
        return ValidationVerdict("rejected", reason=f"revision does not parse: {exc}")
    if validate_against_schema(revised_ast, schema):
        return ValidationVerdict("rejected", reason="revision violates the schema")
    # a revised query is re-validated once
    try:
        second = ask(revised)
    except GatewayError:
        return ValidationVerdict("revised", query=revised)
    second_word = second.text.strip().split(":")[0].split("\n")[0].strip().upper()
    if second_word == "REJECT":
        return ValidationVerdict("rejected", reason="validator rejected the revision")
    if second_word == "REVISE":
        return ValidationVerdict("rejected", reason="validator revised twice")
    return ValidationVerdict("revised", query=revised)


def _compact_rows(solution: SolutionTable | bool, store: Store) -> str:
    doc = to_results_json(solution, store)
    return json.dumps(doc, sort_keys=True, ensure_ascii=False)


def answer_factual(
    question: str,
    bundle: PromptBundle,
    gateways: GatewaySet,
    store: Store,
    cfg: QaConfig | None = None,
) -> FactualResult:
    """Run the factual pipeline; never raises, failures land in status."""
    cfg = cfg or QaConfig()
    result = FactualResult(question=question)
    feedback: str | None = None
    for _ in range(1 + cfg.retry_max):
        result.attempts += 1
        try:
            reply = gateways.generator.complete(_generation_request(question, bundle, feedback))
        except GatewayError as exc:
            result.failed_stage, result.failure_reason = "generate", str(exc)
            continue
        query_text = extract_query(reply.text)
        result.query_text = query_text
        try:
            query_ast = parse(query_text)
        except QuerySyntaxError as exc:
            result.failed_stage, result.failure_reason = "parse", str(exc)
            feedback = f"parse error: {exc}"
            continue
        violations = validate_against_schema(query_ast, store.schema)
        if violations:
            result.failed_stage, result.failure_reason = "schema", "; ".join(violations)
            feedback = f"schema violations: {'; '.join(violations)}"
            continue
        verdict = _run_validation(question, query_text, gateways, store.schema)
        result.verdict = verdict
        if verdict.kind == "rejected":
            result.failed_stage, result.failure_reason = "validate", verdict.reason
            return result
        if verdict.kind == "revised":
            result.query_text = query_text = verdict.query
            query_ast = parse(query_text)
        try:
            solution = evaluate(query_ast, store)
        except ChronomapError as exc:
            result.failed_stage, result.failure_reason = "evaluate", str(exc)
            feedback = f"evaluation error: {exc}"
            continue
        result.solution = solution
        try:
            answer = gateways.composer.complete(
                chat_request(
                    "Answer the question in one short sentence grounded only in the "
                    "query results. Lead with Yes/No for yes-no questions and with "
                    "the number for counts.",
                    f"Question: {question}\nQuery:\n{query_text}\nResults:\n"
                    f"{_compact_rows(solution, store)}",
                    tag="answer",
                )
            )
        except GatewayError as exc:
            result.failed_stage, result.failure_reason = "answer", str(exc)
            return result
        result.answer_text = answer.text.strip()
        result.status = "delivered"
        result.failed_stage = result.failure_reason = None
        return result
    return result


# ---------------------------------------------------------------------------
# Descriptive workflow
# ---------------------------------------------------------------------------

_YEAR_RE = re.compile(r"\b(1[0-9]{3}|20[0-9]{2})\b")


def extract_place_year(question: str, bundle: PromptBundle) -> tuple[str | None, int | None]:
    """Municipality (lowercased) and year mentioned in the question text."""
    lowered = question.lower()
    muni = next((m for m in bundle.municipalities if m in lowered), None)
    year = None
    for match in _YEAR_RE.findall(question):
        year = int(match)
        break
    return muni, year


def _metric_noun(store: Store, feature_type: str) -> str:
    """'area' for areal types, 'length' for linear ones."""
    for t in store.match(None, kg.iri(CMO + "featureType"), kg.lit_string(feature_type)):
        if store.match(t.s, kg.iri(CMO + "lengthM"), None):
            return "length"
        if store.match(t.s, kg.iri(CMO + "areaSqm"), None):
            return "area"
    return "area"


def fallback_subquestions(question: str, bundle: PromptBundle, store: Store) -> list[str]:
    """Template decomposition: count, total metric, and largest feature per
    type, plus change counts from the previous timestamp."""
    muni, year = extract_place_year(question, bundle)
    where = ""
    if muni:
        where += f" in {muni.capitalize()}"
    if year:
        where += f" in {year}"
    out = []
    for ftype in bundle.feature_types:
        noun = _metric_noun(store, ftype)
        out.append(f"How many {ftype}s were there{where}?")
        out.append(f"What was the total {noun} of {ftype}s{where}?")
        out.append(f"What was the {noun} of the largest {ftype}{where}?")
    if year and year in bundle.years:
        idx = bundle.years.index(year)
        if idx > 0:
            prev = bundle.years[idx - 1]
            for ftype in bundle.feature_types:
                out.append(f"How many {ftype}s changed from {prev} to {year}?")
    return out


_LINE_MARKER = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s*")


def decompose(
    question: str,
    gateways: GatewaySet,
    bundle: PromptBundle,
    store: Store,
) -> list[str]:
    """Sub-questions for a descriptive question; template fallback keeps the
    result non-empty even when the decomposer fails."""
    try:
        reply = gateways.composer.complete(
            chat_request(
                "Decompose the descriptive question into independent factual "
                "sub-questions, one per line, each answerable with a number or yes/no.",
                question,
                tag="decompose",
            )
        )
        lines = [_LINE_MARKER.sub("", line).strip() for line in reply.text.splitlines()]
        subs = [line for line in lines if line]
    except GatewayError:
        subs = []
    return subs if subs else fallback_subquestions(question, bundle, store)


def results_to_text(sub_results: list[FactualResult], cap_chars: int = 6000) -> str:
    """One prose line per delivered sub-result, truncated at line boundaries
    (lowest-priority lines are the later ones and drop first)."""
    lines = []
    for r in sub_results:
        if r.delivered:
            answer = " ".join((r.answer_text or "").split())
            lines.append(f"Q: {r.question} A: {answer}")
    while lines and len("\n".join(lines)) > cap_chars:
        lines.pop()
    return "\n".join(lines)


@dataclass
class DescriptiveResult:
    question: str
    sub_results: list[FactualResult] = field(default_factory=list)
    facts_text: str = ""
    contexts_used: tuple[str, ...] = ()
    answer_text: str | None = None
    status: str = "failed"
    failed_stage: str | None = None
    failure_reason: str | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def delivered(self) -> bool:
        return self.status == "delivered"

    def to_dict(self, store: Store | None = None) -> dict:
        return {
            "question": self.question,
            "sub_results": [r.to_dict(store) for r in self.sub_results],
            "facts_text": self.facts_text,
            "contexts_used": list(self.contexts_used),
            "answer_text": self.answer_text,
            "status": self.status,
            "failed_stage": self.failed_stage,
            "failure_reason": self.failure_reason,
            "warnings": list(self.warnings),
        }


def _tile_path(cfg: QaConfig, muni: str | None, year: int | None) -> Path | None:
    if not cfg.tiles_dir or not muni or not year:
        return None
    path = Path(cfg.tiles_dir) / f"{muni}_{year}.png"
    return path if path.exists() else None


def answer_descriptive(
    question: str,
    bundle: PromptBundle,
    gateways: GatewaySet,
    store: Store,
    cfg: QaConfig | None = None,
    use_map_image: bool = False,
    use_search: bool = False,
    progress=None,
) -> DescriptiveResult:
    """Run the descriptive pipeline; composition proceeds even when every
    sub-question failed (extra contexts can still ground an answer).

    ``progress`` (stage-name callback) lets callers report how far a
    timed-out request got.
    """
    cfg = cfg or QaConfig()
    report_stage = progress or (lambda stage: None)
    result = DescriptiveResult(question=question)
    report_stage("decompose")
    subs = decompose(question, gateways, bundle, store)
    report_stage("subquestions")
    width = max(1, min(cfg.parallel_width, len(subs)))
    with ThreadPoolExecutor(max_workers=width) as pool:
        result.sub_results = list(
            pool.map(lambda q: answer_factual(q, bundle, gateways, store, cfg), subs)
        )
    result.facts_text = results_to_text(result.sub_results, cfg.facts_cap_chars)
    if not result.facts_text:
        result.warnings.append("no sub-question delivered; composing from extra contexts only")
    contexts = ["kg"]
    parts: list = [
        TextPart(
            "Known facts from the knowledge graph:\n"
            f"{result.facts_text or '(none)'}\n\nQuestion: {question}"
        )
    ]
    if use_map_image:
        muni, year = extract_place_year(question, bundle)
        tile = _tile_path(cfg, muni, year)
        if tile is None:
            result.warnings.append(f"no map tile for ({muni}, {year}); context dropped")
        else:
            parts.append(ImagePart("image/png", tile.read_bytes()))
            contexts.append("map-image")
    if use_search and gateways.search is not None:
        hits = gateways.search.search(question, k=cfg.search_k)
        if hits:
            blob = "\n".join(f"- {h.title} ({h.url}): {h.snippet}" for h in hits)
            parts.append(TextPart(f"Web search results:\n{blob}"))
            contexts.append("search")
        else:
            result.warnings.append("search returned no results; context dropped")
    report_stage("compose")
    try:
        reply = gateways.composer.complete(
            ChatRequest(
                system=(
                    "Write a grounded descriptive answer to the question using the "
                    "provided facts and any extra context. Do not invent numbers."
                ),
                parts=tuple(parts),
                tag="compose",
            )
        )
    except GatewayError as exc:
        result.failed_stage, result.failure_reason = "compose", str(exc)
        return result
    result.answer_text = reply.text.strip()
    result.status = "delivered"
    result.contexts_used = tuple(contexts)
    return result
