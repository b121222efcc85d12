"""Factual-QA metrics: delivery rate, answer accuracy, query semantics,
and judge-scored content quality."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ChronomapError, GatewayError, QuerySyntaxError
from ..kgstore import Schema
from ..llmgate import ChatClient, chat_request
from ..query import parse, validate_against_schema
from ..query import ast as qast


@dataclass
class OutcomeItem:
    item_id: str
    question: str
    category: str
    answer_kind: str
    delivered: bool
    attempts: int = 0
    generated_query: str | None = None
    answer_text: str | None = None
    failed_stage: str | None = None
    gold_answer: str | None = None
    correct: bool | None = None  # only set when delivered
    accuracy_reason: str | None = None
    sparql_ok_auto: bool | str | None = None  # True | False | "error"
    sparql_rationale: str | None = None
    sparql_ok_manual: bool | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "OutcomeItem":
        return cls(**doc)


@dataclass
class OutcomeLog:
    items: list[OutcomeItem] = field(default_factory=list)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for item in self.items:
                fh.write(json.dumps(item.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "OutcomeLog":
        items = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                items.append(OutcomeItem.from_dict(json.loads(line)))
        return cls(items)


def delivery_rate(log: OutcomeLog) -> float:
    """Fraction of items that delivered any answer (raw ratio; reports
    round to two decimals)."""
    if not log.items:
        raise ChronomapError("delivery rate over an empty outcome log")
    return sum(1 for i in log.items if i.delivered) / len(log.items)


# ---------------------------------------------------------------------------
# Answer accuracy
# ---------------------------------------------------------------------------

AFFIRMATIVE_TOKENS = ("yes", "yeah", "yep", "indeed", "affirmative", "correct", "true")
NEGATIVE_TOKENS = ("no", "none", "nope", "negative", "false", "not")

_WORD_RE = re.compile(r"[a-z']+")
_NUMBER_RE = re.compile(r"[-+]?\d[\d,]*(?:\.\d+)?")


@dataclass(frozen=True)
class AccuracyCheck:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def _leading_polarity(text: str) -> str | None:
    for word in _WORD_RE.findall(text.lower())[:6]:
        if word in AFFIRMATIVE_TOKENS:
            return "yes"
        if word in NEGATIVE_TOKENS:
            return "no"
    return None


def answer_accuracy(answer_text: str | None, gold: str, kind: str) -> AccuracyCheck:
    """Compare an answer against its gold value.

    yesno answers are normalized through leading affirmation/negation
    tokens; numeric answers compare the first extracted number (counts
    exactly, measures within 1e-6 relative).
    """
    if not answer_text:
        return AccuracyCheck(False, "empty answer")
    if kind == "yesno":
        polarity = _leading_polarity(answer_text)
        if polarity is None:
            return AccuracyCheck(False, "unextractable")
        return AccuracyCheck(polarity == gold.strip().lower())
    if kind == "numeric":
        m = _NUMBER_RE.search(answer_text)
        if m is None:
            return AccuracyCheck(False, "unextractable")
        extracted = float(m.group().replace(",", ""))
        gold_value = float(gold)
        if gold_value.is_integer() and "." not in gold:
            return AccuracyCheck(extracted == gold_value, None if extracted == gold_value else "count mismatch")
        if gold_value == 0.0:
            return AccuracyCheck(extracted == 0.0)
        ok = abs(extracted - gold_value) / abs(gold_value) <= 1e-6
        return AccuracyCheck(ok, None if ok else "out of tolerance")
    return AccuracyCheck(False, f"unknown answer kind {kind}")


# ---------------------------------------------------------------------------
# Query semantic check
# ---------------------------------------------------------------------------

_YEAR_IN_TEXT = re.compile(r"\b(1[0-9]{3}|20[0-9]{2})\b")

_NEGATIVE_VERDICTS = ("incorrect", "not correct", "invalid", "wrong", "false")
_POSITIVE_VERDICTS = ("correct", "valid", "true")


@dataclass(frozen=True)
class SemanticCheck:
    verdict: bool | str  # True | False | "error"
    rationale: str


def _ast_integers(query) -> set[int]:
    found: set[int] = set()

    def walk_expr(e):
        if hasattr(e, "datatype") and e.datatype == "integer":
            found.add(e.value)
        for attr in ("left", "right", "inner"):
            if hasattr(e, attr):
                walk_expr(getattr(e, attr))
        if hasattr(e, "parts"):
            for p in e.parts:
                walk_expr(p)

    def walk_group(group):
        for item in group.items:
            if isinstance(item, qast.TriplePattern):
                for part in (item.s, item.p, item.o):
                    if hasattr(part, "datatype") and part.datatype == "integer":
                        found.add(part.value)
            elif isinstance(item, qast.Filter):
                walk_expr(item.expr)
            elif isinstance(item, qast.OptionalGroup):
                walk_group(item.group)

    walk_group(query.where)
    return found


def _ast_strings(query) -> set[str]:
    found: set[str] = set()

    def walk_expr(e):
        if hasattr(e, "datatype") and e.datatype == "string":
            found.add(e.value)
        for attr in ("left", "right", "inner"):
            if hasattr(e, attr):
                walk_expr(getattr(e, attr))
        if hasattr(e, "parts"):
            for p in e.parts:
                walk_expr(p)

    def walk_group(group):
        for item in group.items:
            if isinstance(item, qast.TriplePattern):
                for part in (item.s, item.p, item.o):
                    if hasattr(part, "datatype") and part.datatype == "string":
                        found.add(part.value)
            elif isinstance(item, qast.Filter):
                walk_expr(item.expr)
            elif isinstance(item, qast.OptionalGroup):
                walk_group(item.group)

    walk_group(query.where)
    return found


def sparql_semantic_check(
    question: str,
    query_text: str,
    schema: Schema,
    judge: ChatClient | None,
    municipalities: tuple[str, ...] = (),
) -> SemanticCheck:
    """Structural pre-pass, then a judge verdict.

    The pre-pass fails fast when the query violates the schema or omits a
    year/municipality constraint the question names; only structurally
    sound queries reach the judge. The manual-review verdict lives on the
    outcome item, not here.
    """
    try:
        query = parse(query_text)
    except QuerySyntaxError as exc:
        return SemanticCheck("error", f"query does not parse: {exc}")
    violations = validate_against_schema(query, schema)
    if violations:
        return SemanticCheck(False, "schema violations: " + "; ".join(violations))
    years_named = {int(y) for y in _YEAR_IN_TEXT.findall(question)}
    if years_named and not years_named & _ast_integers(query):
        missing = ", ".join(str(y) for y in sorted(years_named))
        return SemanticCheck(False, f"question names year(s) {missing} but the query binds none of them")
    lowered = question.lower()
    named_munis = {m for m in municipalities if m.lower() in lowered}
    if named_munis and not {m.lower() for m in named_munis} & {s.lower() for s in _ast_strings(query)}:
        return SemanticCheck(False, "question names a municipality the query does not constrain")
    if judge is None:
        return SemanticCheck(True, "structural pre-pass only (no judge configured)")
    try:
        reply = judge.complete(
            chat_request(
                "Judge whether the query faithfully interprets the question given "
                "the predicate catalog. Answer 'correct' or 'incorrect' with a reason.",
                f"Question: {question}\nQuery:\n{query_text}\nCatalog:\n"
                + json.dumps(schema.to_json(), sort_keys=True),
                tag="judge_sparql",
            )
        )
    except GatewayError as exc:
        return SemanticCheck("error", f"judge failure: {exc}")
    text = reply.text.strip().lower()
    for marker in _NEGATIVE_VERDICTS:
        if marker in text:
            return SemanticCheck(False, reply.text.strip())
    for marker in _POSITIVE_VERDICTS:
        if marker in text:
            return SemanticCheck(True, reply.text.strip())
    return SemanticCheck("error", f"unparseable judge reply: {reply.text.strip()[:120]}")


# ---------------------------------------------------------------------------
# Content quality
# ---------------------------------------------------------------------------

_RUBRICS = {
    "relevance": "Score 0 to 1: does the answer address the question? Reply with the score only.",
    "fluency": "Score 0 to 1: is the answer natural, fluent, readable prose? Reply with the score only.",
    "informativeness": "Score 0 to 1: does the answer provide informative content relevant to the question? Reply with the score only.",
}

_FLOAT_RE = re.compile(r"[-+]?\d*\.?\d+")


def content_quality(question: str, answer: str, judge: ChatClient) -> dict[str, float | str]:
    """Three independent judge scores in [0, 1]; unparseable replies score
    the string "error" for that criterion."""
    out: dict[str, float | str] = {}
    for criterion, rubric in _RUBRICS.items():
        try:
            reply = judge.complete(
                chat_request(rubric, f"Question: {question}\nAnswer: {answer}", tag=f"judge_{criterion}")
            )
        except GatewayError:
            out[criterion] = "error"
            continue
        m = _FLOAT_RE.search(reply.text)
        if m is None:
            out[criterion] = "error"
        else:
            out[criterion] = min(1.0, max(0.0, float(m.group())))
    return out
