"""Model-provider abstraction.

Two interchangeable providers satisfy the same ``complete`` contract: a live
chat-completions client (OpenAI-compatible wire, streamed internally, whole
turns out) and a replay provider that serves recorded turns keyed by request
fingerprints. A recording wrapper captures live exchanges for later replay.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol, Sequence

import httpx

from .errors import CoderError, ConfigurationError
from .messages import Message, ToolCall

logger = logging.getLogger(__name__)

RETRY_BACKOFF = (0.5, 2.0, 8.0)


class ProviderError(CoderError):
    """Model endpoint failure that survived the bounded retries."""


class ReplayDivergenceError(ProviderError):
    """A replayed request did not match the next recorded exchange."""

    def __init__(self, expected: str, actual: str, index: int):
        super().__init__(
            f"replay divergence at exchange {index}: "
            f"expected fingerprint {expected}, got {actual}"
        )
        self.expected = expected
        self.actual = actual
        self.index = index


@dataclass(frozen=True)
class ToolSchema:
    """One declared tool: wire name, description, JSON-schema parameters."""

    name: str
    description: str
    parameters: dict


@dataclass(frozen=True)
class ModelTurn:
    text: str
    tool_calls: tuple[ToolCall, ...] = ()
    input_tokens: int = 0
    output_tokens: int = 0
    finish_reason: str = "stop"

    def __post_init__(self) -> None:
        if self.input_tokens < 0 or self.output_tokens < 0:
            raise ValueError("token counts must be non-negative")
        ids = [c.call_id for c in self.tool_calls]
        if len(ids) != len(set(ids)):
            raise ValueError("call ids must be unique within a turn")


class Provider(Protocol):
    def complete(
        self, history: Sequence[Message], schemas: Sequence[ToolSchema], model: str
    ) -> ModelTurn: ...


# --------------------------------------------------------------------------
# Fingerprinting
# --------------------------------------------------------------------------

def canonical_json(obj) -> str:
    """Sorted keys, no insignificant whitespace, canonical integers."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _canonical_arguments(arguments: str):
    # Key order inside an argument payload is insignificant; unparsable
    # payloads fingerprint as raw text.
    try:
        return json.loads(arguments)
    except (json.JSONDecodeError, TypeError):
        return arguments


def _message_doc(msg: Message) -> dict:
    doc: dict = {"role": msg.role, "content": msg.content}
    if msg.tool_calls:
        doc["tool_calls"] = [
            {
                "id": call.call_id,
                "name": call.name,
                "arguments": _canonical_arguments(call.arguments),
            }
            for call in msg.tool_calls
        ]
    if msg.tool_call_id is not None:
        doc["tool_call_id"] = msg.tool_call_id
    return doc


def fingerprint(
    history: Sequence[Message], schemas: Sequence[ToolSchema], model: str
) -> str:
    """Deterministic hash of one provider request.

    Insensitive to JSON key order, sensitive to any content change.
    """
    doc = {
        "model": model,
        "messages": [_message_doc(m) for m in history],
        "tools": [
            {"name": s.name, "description": s.description, "parameters": s.parameters}
            for s in schemas
        ],
    }
    return hashlib.sha256(canonical_json(doc).encode("utf-8")).hexdigest()


# --------------------------------------------------------------------------
# Turn serialization (recording wire format)
# --------------------------------------------------------------------------

def turn_to_dict(turn: ModelTurn) -> dict:
    return {
        "text": turn.text,
        "tool_calls": [
            {"call_id": c.call_id, "name": c.name, "arguments": c.arguments}
            for c in turn.tool_calls
        ],
        "input_tokens": turn.input_tokens,
        "output_tokens": turn.output_tokens,
        "finish_reason": turn.finish_reason,
    }


def turn_from_dict(doc: dict) -> ModelTurn:
    return ModelTurn(
        text=doc["text"],
        tool_calls=tuple(
            ToolCall(c["call_id"], c["name"], c["arguments"])
            for c in doc.get("tool_calls", [])
        ),
        input_tokens=doc.get("input_tokens", 0),
        output_tokens=doc.get("output_tokens", 0),
        finish_reason=doc.get("finish_reason", "stop"),
    )


# --------------------------------------------------------------------------
# Replay / record
# --------------------------------------------------------------------------

class ReplayProvider:
    """Serves recorded turns strictly in order, verifying fingerprints."""

    def __init__(self, path: Path | str):
        self.path = Path(path)
        self._records: list[tuple[str, ModelTurn]] = []
        try:
            fh = self.path.open(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read replay store {self.path}: {exc}") from exc
        with fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                doc = json.loads(line)
                self._records.append((doc["fingerprint"], turn_from_dict(doc["turn"])))
        self._next = 0

    def complete(self, history, schemas, model) -> ModelTurn:
        actual = fingerprint(history, schemas, model)
        if self._next >= len(self._records):
            raise ProviderError(
                f"replay store {self.path} exhausted after {self._next} exchanges"
            )
        expected, turn = self._records[self._next]
        if expected != actual:
            raise ReplayDivergenceError(expected, actual, self._next)
        self._next += 1
        return turn

    def remaining(self) -> int:
        return len(self._records) - self._next


class RecordingProvider:
    """Wraps any provider and appends (fingerprint, turn) exchanges to a store."""

    def __init__(self, inner: Provider, path: Path | str):
        self.inner = inner
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        # Truncate: a recording is one session's exchanges, in request order.
        self.path.write_text("", encoding="utf-8")

    def complete(self, history, schemas, model) -> ModelTurn:
        fp = fingerprint(history, schemas, model)
        turn = self.inner.complete(history, schemas, model)
        record = {"fingerprint": fp, "turn": turn_to_dict(turn)}
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        return turn


class ScriptedProvider:
    """Serves a fixed list of turns; the test-side stand-in for a live model."""

    def __init__(self, turns: Sequence[ModelTurn]):
        self._turns = list(turns)
        self._next = 0

    def complete(self, history, schemas, model) -> ModelTurn:
        if self._next >= len(self._turns):
            raise ProviderError("scripted provider exhausted")
        turn = self._turns[self._next]
        self._next += 1
        return turn


# --------------------------------------------------------------------------
# Live client
# --------------------------------------------------------------------------

def _message_to_wire(msg: Message) -> dict:
    if msg.role == "tool-result":
        return {"role": "tool", "tool_call_id": msg.tool_call_id, "content": msg.content}
    doc: dict = {"role": msg.role, "content": msg.content}
    if msg.tool_calls:
        doc["tool_calls"] = [
            {
                "id": c.call_id,
                "type": "function",
                "function": {"name": c.name, "arguments": c.arguments},
            }
            for c in msg.tool_calls
        ]
    return doc


@dataclass
class _PartialCall:
    call_id: str = ""
    name: str = ""
    arguments: str = ""


class OpenRouterProvider:
    """Live chat-completions client (OpenAI-compatible wire over HTTPS).

    Streaming is an internal transport detail: deltas are aggregated and the
    caller receives whole turns with usage populated from the provider's
    reported statistics. The model id is passed through verbatim.
    """

    def __init__(
        self,
        base_url: str = "https://openrouter.ai/api/v1",
        api_key: str | None = None,
        api_key_env: str = "OPENROUTER_API_KEY",
        timeout: float = 120.0,
        http_factory: Callable[..., httpx.Client] | None = None,
        backoff: Sequence[float] = RETRY_BACKOFF,
    ):
        key = api_key if api_key is not None else os.environ.get(api_key_env, "")
        if not key:
            raise ConfigurationError(
                f"no API credential: set {api_key_env} or pass api_key"
            )
        self._key = key
        self._base_url = base_url.rstrip("/")
        self._timeout = timeout
        self._factory = http_factory or httpx.Client
        self._backoff = tuple(backoff)
        self._client: httpx.Client | None = None

    def _http(self) -> httpx.Client:
        if self._client is None:
            self._client = self._factory(
                base_url=self._base_url,
                timeout=self._timeout,
                headers={"Authorization": f"Bearer {self._key}"},
            )
        return self._client

    def close(self) -> None:
        if self._client is not None:
            self._client.close()
            self._client = None

    def complete(self, history, schemas, model) -> ModelTurn:
        payload: dict = {
            "model": model,
            "messages": [_message_to_wire(m) for m in history],
            "stream": True,
            "stream_options": {"include_usage": True},
        }
        if schemas:
            payload["tools"] = [
                {
                    "type": "function",
                    "function": {
                        "name": s.name,
                        "description": s.description,
                        "parameters": s.parameters,
                    },
                }
                for s in schemas
            ]

        last_error: Exception | None = None
        for attempt in range(len(self._backoff) + 1):
            try:
                return self._stream_once(payload)
            except (httpx.TransportError, _TransientHTTPError) as exc:
                last_error = exc
                if attempt < len(self._backoff):
                    delay = self._backoff[attempt]
                    logger.warning("provider attempt %d failed (%s); retrying in %.1fs",
                                   attempt + 1, exc, delay)
                    time.sleep(delay)
            except httpx.HTTPStatusError as exc:
                raise ProviderError(f"provider rejected request: {exc}") from exc
        raise ProviderError(f"provider unreachable after retries: {last_error}")

    def _stream_once(self, payload: dict) -> ModelTurn:
        text_parts: list[str] = []
        calls: dict[int, _PartialCall] = {}
        input_tokens = output_tokens = 0
        finish_reason = "stop"

        with self._http().stream("POST", "/chat/completions", json=payload) as resp:
            if resp.status_code >= 500:
                raise _TransientHTTPError(f"HTTP {resp.status_code}")
            resp.raise_for_status()
            for line in resp.iter_lines():
                if not line.startswith("data:"):
                    continue
                data = line[len("data:"):].strip()
                if data == "[DONE]":
                    break
                chunk = json.loads(data)
                usage = chunk.get("usage")
                if usage:
                    input_tokens = usage.get("prompt_tokens", input_tokens)
                    output_tokens = usage.get("completion_tokens", output_tokens)
                for choice in chunk.get("choices", []):
                    if choice.get("finish_reason"):
                        finish_reason = choice["finish_reason"]
                    delta = choice.get("delta") or {}
                    if delta.get("content"):
                        text_parts.append(delta["content"])
                    for tc in delta.get("tool_calls") or []:
                        slot = calls.setdefault(tc.get("index", 0), _PartialCall())
                        if tc.get("id"):
                            slot.call_id = tc["id"]
                        fn = tc.get("function") or {}
                        if fn.get("name"):
                            slot.name += fn["name"]
                        if fn.get("arguments"):
                            slot.arguments += fn["arguments"]

        tool_calls = tuple(
            ToolCall(c.call_id or f"call_{i}", c.name, c.arguments)
            for i, c in sorted(calls.items())
        )
        return ModelTurn(
            text="".join(text_parts),
            tool_calls=tool_calls,
            input_tokens=input_tokens,
            output_tokens=output_tokens,
            finish_reason=finish_reason,
        )


class _TransientHTTPError(Exception):
    """Server-side failure worth retrying."""
