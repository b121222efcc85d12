"""Descriptive-answer fact checking.

An extraction model labels the KG-related statements in a descriptive
answer and emits one yes/no factual question per statement; each question
runs through the factual pipeline and verifies against the graph. Facts
whose sub-pipeline fails (or whose answer has no readable polarity) get an
``error`` verdict and stay out of the accuracy denominator. Reports
round-trip through JSON so reviewers can fill in manual overrides.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Callable

from ..errors import GatewayError
from ..llmgate import ChatClient, chat_request
from .metrics import answer_accuracy

EXTRACTION_SYSTEM = (
    "Identify the statements in the answer that assert map-feature facts "
    "(counts, areas, lengths, feature types, relations, years). For each, "
    "write one yes/no question that verifies it. Reply with a JSON array of "
    'objects: [{"statement": ..., "question": ...}].'
)


@dataclass
class ExtractedFact:
    statement: str
    question: str
    verdict: str = "error"  # yes | no | error
    manual_override: bool | None = None
    answer_text: str | None = None

    @property
    def effective(self) -> bool | None:
        """Manual override when set, else the automatic verdict (None=error)."""
        if self.manual_override is not None:
            return self.manual_override
        if self.verdict == "yes":
            return True
        if self.verdict == "no":
            return False
        return None

    def to_dict(self) -> dict:
        return {
            "statement": self.statement,
            "question": self.question,
            "verdict": self.verdict,
            "manual_override": self.manual_override,
            "answer_text": self.answer_text,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExtractedFact":
        return cls(
            statement=doc["statement"],
            question=doc["question"],
            verdict=doc.get("verdict", "error"),
            manual_override=doc.get("manual_override"),
            answer_text=doc.get("answer_text"),
        )


@dataclass
class FactReport:
    answer_text: str
    facts: list[ExtractedFact] = field(default_factory=list)
    error: str | None = None

    @property
    def fact_accuracy_auto(self) -> float | None:
        decided = [f for f in self.facts if f.verdict in ("yes", "no")]
        if not decided:
            return None
        return sum(1 for f in decided if f.verdict == "yes") / len(decided)

    @property
    def fact_accuracy_manual(self) -> float | None:
        decided = [f for f in self.facts if f.effective is not None]
        if not decided:
            return None
        return sum(1 for f in decided if f.effective) / len(decided)

    def to_dict(self) -> dict:
        return {
            "answer_text": self.answer_text,
            "facts": [f.to_dict() for f in self.facts],
            "error": self.error,
            "fact_accuracy_auto": self.fact_accuracy_auto,
            "fact_accuracy_manual": self.fact_accuracy_manual,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FactReport":
        return cls(
            answer_text=doc["answer_text"],
            facts=[ExtractedFact.from_dict(f) for f in doc.get("facts", [])],
            error=doc.get("error"),
        )


_ARRAY_RE = re.compile(r"\[.*\]", re.DOTALL)


def _parse_extraction(text: str) -> list[dict]:
    m = _ARRAY_RE.search(text)
    if m is None:
        raise ValueError("no JSON array in extraction reply")
    doc = json.loads(m.group())
    if not isinstance(doc, list):
        raise ValueError("extraction reply is not an array")
    out = []
    for row in doc:
        if not isinstance(row, dict) or "question" not in row:
            raise ValueError(f"malformed extraction row: {row!r}")
        out.append({"statement": str(row.get("statement", "")), "question": str(row["question"])})
    return out


def fact_check(
    answer_text: str,
    extraction_client: ChatClient,
    answer_fn: Callable[[str], "object"],
) -> FactReport:
    """Extract KG-related facts from an answer and verify each one.

    ``answer_fn`` runs one factual question through the QA pipeline and
    returns a FactualResult-shaped object (``delivered``, ``answer_text``).
    """
    report = FactReport(answer_text=answer_text)
    try:
        reply = extraction_client.complete(
            chat_request(EXTRACTION_SYSTEM, answer_text, tag="extract_facts")
        )
        rows = _parse_extraction(reply.text)
    except (GatewayError, ValueError) as exc:
        report.error = f"extraction failed: {exc}"
        return report
    for row in rows:
        fact = ExtractedFact(statement=row["statement"], question=row["question"])
        result = answer_fn(fact.question)
        if getattr(result, "delivered", False):
            fact.answer_text = result.answer_text
            if answer_accuracy(result.answer_text, "yes", "yesno"):
                fact.verdict = "yes"
            elif answer_accuracy(result.answer_text, "no", "yesno"):
                fact.verdict = "no"
            else:
                fact.verdict = "error"  # delivered but no readable polarity
        else:
            fact.verdict = "error"
        report.facts.append(fact)
    return report
