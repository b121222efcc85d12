"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class SparqlRequest(BaseModel):
    query: str


class FactualRequest(BaseModel):
    question: str = Field(min_length=1)


class DescriptiveRequest(BaseModel):
    question: str = Field(min_length=1)
    use_map_image: bool = False
    use_search: bool = False


class HealthResponse(BaseModel):
    status: str
    triples: int
    years: list[int]
    municipalities: list[str]


class ValidationInfo(BaseModel):
    verdict: str
    query: Optional[str] = None
    reason: Optional[str] = None


class FactualResponse(BaseModel):
    question: str
    query: Optional[str] = None
    validation: Optional[ValidationInfo] = None
    solution: Optional[dict[str, Any]] = None
    answer_text: Optional[str] = None
    status: str
    failed_stage: Optional[str] = None
    failure_reason: Optional[str] = None
    attempts: int


class DescriptiveResponse(BaseModel):
    question: str
    sub_results: list[FactualResponse]
    facts_text: str
    contexts_used: list[str]
    answer_text: Optional[str] = None
    status: str
    failed_stage: Optional[str] = None
    failure_reason: Optional[str] = None
    warnings: list[str]


class ErrorBody(BaseModel):
    code: str
    message: str
    stage: Optional[str] = None


ERROR_CODES = (
    "parse_error",
    "unknown_prefix",
    "schema_violation",
    "type_violation",
    "bad_request",
    "not_found",
    "timeout",
    "gateway_error",
    "internal",
)
