"""Uniform gateway to chat models, judge models, and web search.

Three interchangeable chat backends share one contract:

* ``LiveChatClient`` POSTs OpenAI-compatible chat-completions JSON.
* ``ScriptedChatClient`` answers from regex rules, for offline runs.
* ``ReplayChatClient`` looks responses up by request digest, so a recorded
  pipeline replays byte-identically.

Pipelines never hold a concrete backend type, only the ``complete`` /
``search`` contracts, and retry policy belongs to callers. Request digests
hash only the system text, user text parts, and stage tag; image bytes are
excluded so replay stays stable across re-encoding.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Union

import httpx

from .errors import ConfigError, GatewayError, ReplayMissError, ScriptedNoMatchError, TransportError

log = logging.getLogger(__name__)

ENV_BASE_URL = "LLM_BASE_URL"
ENV_MODEL = "LLM_MODEL"
ENV_API_KEY = "LLM_API_KEY"
ENV_SEARCH_KEY = "SEARCH_API_KEY"


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    media_type: str
    data: bytes


Part = Union[TextPart, ImagePart]


@dataclass(frozen=True)
class ChatRequest:
    system: str
    parts: tuple[Part, ...]
    temperature: float = 0.0
    max_output_tokens: int = 2048
    tag: str = ""

    def __post_init__(self):
        if not self.parts:
            raise GatewayError("request needs at least one user part")
        if not 0.0 <= self.temperature <= 2.0:
            raise GatewayError(f"temperature {self.temperature} outside [0, 2]")

    @property
    def user_texts(self) -> tuple[str, ...]:
        return tuple(p.text for p in self.parts if isinstance(p, TextPart))

    @property
    def last_user_text(self) -> str:
        texts = self.user_texts
        return texts[-1] if texts else ""


def chat_request(system: str, text: str, tag: str = "", **kwargs) -> ChatRequest:
    """Single-text-part request helper."""
    return ChatRequest(system=system, parts=(TextPart(text),), tag=tag, **kwargs)


@dataclass(frozen=True)
class ChatResponse:
    text: str
    finish_reason: str = "stop"  # stop | length | error
    latency_ms: float = 0.0


@dataclass(frozen=True)
class SearchResult:
    title: str
    url: str
    snippet: str


def request_digest(req: ChatRequest) -> str:
    payload = json.dumps(
        {"system": req.system, "texts": list(req.user_texts), "tag": req.tag},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ChatClient(Protocol):
    def complete(self, req: ChatRequest) -> ChatResponse: ...


class SearchClient(Protocol):
    def search(self, query: str, k: int) -> list[SearchResult]: ...


# ---------------------------------------------------------------------------
# Live backend
# ---------------------------------------------------------------------------

class LiveChatClient:
    """OpenAI-compatible chat-completions client.

    Credentials come from arguments or the LLM_BASE_URL / LLM_MODEL /
    LLM_API_KEY environment variables. ``max_in_flight`` bounds concurrent
    requests across threads.
    """

    def __init__(
        self,
        base_url: str | None = None,
        model: str | None = None,
        api_key: str | None = None,
        timeout_s: float = 120.0,
        max_in_flight: int = 4,
    ):
        self.base_url = (base_url or os.environ.get(ENV_BASE_URL, "")).rstrip("/")
        self.model = model or os.environ.get(ENV_MODEL, "")
        self.api_key = api_key or os.environ.get(ENV_API_KEY, "")
        if not self.base_url or not self.model:
            raise ConfigError("live chat client needs a base URL and model name")
        self.timeout_s = timeout_s
        self._slots = threading.Semaphore(max_in_flight)

    def _payload(self, req: ChatRequest) -> dict:
        content: list[dict] = []
        for part in req.parts:
            if isinstance(part, TextPart):
                content.append({"type": "text", "text": part.text})
            else:
                data_url = f"data:{part.media_type};base64,{base64.b64encode(part.data).decode()}"
                content.append({"type": "image_url", "image_url": {"url": data_url}})
        return {
            "model": self.model,
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
            "messages": [
                {"role": "system", "content": req.system},
                {"role": "user", "content": content},
            ],
        }

    def complete(self, req: ChatRequest) -> ChatResponse:
        started = time.monotonic()
        try:
            with self._slots:
                response = httpx.post(
                    f"{self.base_url}/chat/completions",
                    json=self._payload(req),
                    headers={"Authorization": f"Bearer {self.api_key}"},
                    timeout=self.timeout_s,
                )
            response.raise_for_status()
            doc = response.json()
            choice = doc["choices"][0]
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise TransportError(f"chat backend failure: {exc}") from exc
        latency = (time.monotonic() - started) * 1000.0
        finish = choice.get("finish_reason") or "stop"
        text = choice.get("message", {}).get("content") or ""
        if finish == "stop" and text is None:
            raise TransportError("backend returned empty text with finish_reason=stop")
        return ChatResponse(text=text, finish_reason="length" if finish == "length" else "stop", latency_ms=latency)


# ---------------------------------------------------------------------------
# Scripted backend
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScriptedRule:
    pattern: str
    response: str
    tag: str | None = None

    def matches(self, req: ChatRequest) -> bool:
        if self.tag is not None and self.tag != req.tag:
            return False
        return re.search(self.pattern, req.last_user_text, re.IGNORECASE | re.DOTALL) is not None


class ScriptedChatClient:
    """Pattern-matching mock: first rule whose regex matches the last user
    text wins. Pure: the same request always gets the same response."""

    def __init__(self, rules: list[ScriptedRule]):
        self.rules = list(rules)
        self.calls: list[ChatRequest] = []

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedChatClient":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls([ScriptedRule(r["pattern"], r["response"], r.get("tag")) for r in raw])

    def complete(self, req: ChatRequest) -> ChatResponse:
        self.calls.append(req)
        for rule in self.rules:
            if rule.matches(req):
                return ChatResponse(text=rule.response)
        raise ScriptedNoMatchError(
            f"no scripted rule matches tag={req.tag!r} text={req.last_user_text[:120]!r}"
        )


# ---------------------------------------------------------------------------
# Record / replay
# ---------------------------------------------------------------------------

class ReplayChatClient:
    """Replays a recorded transcript; unknown requests are an error."""

    def __init__(self, responses: dict[str, ChatResponse]):
        self._responses = dict(responses)

    @classmethod
    def from_file(cls, path: str | Path) -> "ReplayChatClient":
        responses: dict[str, ChatResponse] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            responses[record["digest"]] = ChatResponse(
                text=record["response"]["text"],
                finish_reason=record["response"].get("finish_reason", "stop"),
                latency_ms=record["response"].get("latency_ms", 0.0),
            )
        return cls(responses)

    def complete(self, req: ChatRequest) -> ChatResponse:
        digest = request_digest(req)
        try:
            return self._responses[digest]
        except KeyError:
            raise ReplayMissError(digest) from None


class RecordingChatClient:
    """Wraps a live (or scripted) client and appends a replayable transcript.

    Duplicate identical requests reuse their existing transcript entry.
    """

    def __init__(self, inner: ChatClient, path: str | Path):
        self.inner = inner
        self.path = Path(path)
        self._seen: set[str] = set()
        self._lock = threading.Lock()
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._seen.add(json.loads(line)["digest"])

    def complete(self, req: ChatRequest) -> ChatResponse:
        response = self.inner.complete(req)
        digest = request_digest(req)
        with self._lock:
            if digest not in self._seen:
                self._seen.add(digest)
                record = {
                    "digest": digest,
                    "request": {
                        "system": req.system,
                        "texts": list(req.user_texts),
                        "tag": req.tag,
                        "images": sum(isinstance(p, ImagePart) for p in req.parts),
                    },
                    "response": {
                        "text": response.text,
                        "finish_reason": response.finish_reason,
                        "latency_ms": response.latency_ms,
                    },
                }
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        return response


# ---------------------------------------------------------------------------
# Search clients
# ---------------------------------------------------------------------------

class FixtureSearchClient:
    """Search results from a JSON file keyed by query substring."""

    def __init__(self, path: str | Path):
        self._byrubric = json.loads(Path(path).read_text(encoding="utf-8"))

    def search(self, query: str, k: int) -> list[SearchResult]:
        if k < 1:
            raise GatewayError("k must be >= 1")
        needle = query.lower()
        for key in sorted(self._byrubric):
            if key.lower() in needle:
                rows = self._byrubric[key][:k]
                return [SearchResult(r["title"], r["url"], r["snippet"]) for r in rows]
        return []


class LiveSearchClient:
    """Minimal JSON-POST search backend (agent-search style API)."""

    def __init__(self, endpoint: str, api_key: str | None = None, timeout_s: float = 30.0):
        self.endpoint = endpoint
        self.api_key = api_key or os.environ.get(ENV_SEARCH_KEY, "")
        self.timeout_s = timeout_s

    def search(self, query: str, k: int) -> list[SearchResult]:
        if k < 1:
            raise GatewayError("k must be >= 1")
        try:
            response = httpx.post(
                self.endpoint,
                json={"api_key": self.api_key, "query": query, "max_results": k},
                timeout=self.timeout_s,
            )
            response.raise_for_status()
            doc = response.json()
        except (httpx.HTTPError, ValueError) as exc:
            log.warning("search backend failure, returning no results: %s", exc)
            return []
        out = []
        for row in doc.get("results", [])[:k]:
            out.append(
                SearchResult(
                    title=str(row.get("title", "")),
                    url=str(row.get("url", "")),
                    snippet=str(row.get("content") or row.get("snippet") or ""),
                )
            )
        return out


class NullSearchClient:
    def search(self, query: str, k: int) -> list[SearchResult]:
        return []
