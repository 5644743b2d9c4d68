import json

import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coder.errors import ConfigurationError
from coder.gateway import (
    ModelTurn,
    OpenRouterProvider,
    ProviderError,
    RecordingProvider,
    ReplayDivergenceError,
    ReplayProvider,
    ScriptedProvider,
    ToolSchema,
    canonical_json,
    fingerprint,
    turn_from_dict,
    turn_to_dict,
)
from coder.messages import ToolCall, assistant, system, tool_result, user

SCHEMAS = (ToolSchema("read_file", "Read a file.", {"type": "object"}),)
HISTORY = [system("sys"), user("do the thing")]
MODEL = "test/model-1"


# -- independent canonicalization oracle -------------------------------------------

def reference_canonical(obj) -> str:
    """Minimal canonical JSON written independently of the implementation."""
    if obj is None or isinstance(obj, (bool, int, float)):
        return json.dumps(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, list):
        return "[" + ",".join(reference_canonical(x) for x in obj) + "]"
    if isinstance(obj, dict):
        parts = [
            reference_canonical(k) + ":" + reference_canonical(obj[k])
            for k in sorted(obj)
        ]
        return "{" + ",".join(parts) + "}"
    raise TypeError(type(obj))


json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**6, 10**6) | st.text(max_size=15),
    lambda children: st.lists(children, max_size=3)
    | st.dictionaries(st.text(max_size=8), children, max_size=3),
    max_leaves=10,
)


@given(json_values)
@settings(max_examples=150, deadline=None)
def test_canonical_json_matches_reference(obj):
    assert canonical_json(obj) == reference_canonical(obj)


# -- fingerprinting -------------------------------------------------------------------

def test_fingerprint_stable_across_processes_shape():
    fp = fingerprint(HISTORY, SCHEMAS, MODEL)
    assert len(fp) == 64
    assert fp == fingerprint(list(HISTORY), list(SCHEMAS), MODEL)


def test_fingerprint_sensitive_to_model_and_content():
    base = fingerprint(HISTORY, SCHEMAS, MODEL)
    assert fingerprint(HISTORY, SCHEMAS, "other/model") != base
    assert fingerprint([system("sys"), user("do another thing")], SCHEMAS, MODEL) != base
    assert fingerprint(HISTORY, (), MODEL) != base


def test_fingerprint_ignores_argument_key_order():
    call_a = ToolCall("c1", "write_file", '{"file_path": "a", "content": "b"}')
    call_b = ToolCall("c1", "write_file", '{"content": "b", "file_path": "a"}')
    hist_a = HISTORY + [assistant("", (call_a,)), tool_result("ok", "c1")]
    hist_b = HISTORY + [assistant("", (call_b,)), tool_result("ok", "c1")]
    assert fingerprint(hist_a, SCHEMAS, MODEL) == fingerprint(hist_b, SCHEMAS, MODEL)


def test_fingerprint_distinguishes_argument_values():
    call_a = ToolCall("c1", "write_file", '{"file_path": "a"}')
    call_b = ToolCall("c1", "write_file", '{"file_path": "B"}')
    hist_a = HISTORY + [assistant("", (call_a,))]
    hist_b = HISTORY + [assistant("", (call_b,))]
    assert fingerprint(hist_a, SCHEMAS, MODEL) != fingerprint(hist_b, SCHEMAS, MODEL)


def test_unparsable_arguments_fingerprint_as_raw_text():
    call = ToolCall("c1", "write_file", "{broken")
    hist = HISTORY + [assistant("", (call,))]
    assert fingerprint(hist, SCHEMAS, MODEL)  # no crash


# -- turn serialization ---------------------------------------------------------------

def test_turn_round_trip():
    turn = ModelTurn(
        text="answer",
        tool_calls=(ToolCall("c1", "read_file", '{"file_path": "x"}'),),
        input_tokens=12,
        output_tokens=3,
        finish_reason="tool_calls",
    )
    assert turn_from_dict(turn_to_dict(turn)) == turn


def test_turn_validation():
    with pytest.raises(ValueError):
        ModelTurn(text="", input_tokens=-1)
    with pytest.raises(ValueError):
        ModelTurn(
            text="",
            tool_calls=(ToolCall("dup", "a", "{}"), ToolCall("dup", "b", "{}")),
        )


# -- record / replay --------------------------------------------------------------------

def scripted_session(path):
    turns = [
        ModelTurn("first", (ToolCall("c1", "read_file", '{"file_path": "f"}'),), 10, 2),
        ModelTurn("done", (), 12, 3),
    ]
    recorder = RecordingProvider(ScriptedProvider(turns), path)
    history = list(HISTORY)
    got1 = recorder.complete(history, SCHEMAS, MODEL)
    history += [assistant(got1.text, got1.tool_calls), tool_result("contents", "c1")]
    got2 = recorder.complete(history, SCHEMAS, MODEL)
    return turns, history, (got1, got2)


def test_record_then_replay_round_trip(tmp_path):
    path = tmp_path / "rec.jsonl"
    turns, _, _ = scripted_session(path)

    replayer = ReplayProvider(path)
    history = list(HISTORY)
    got1 = replayer.complete(history, SCHEMAS, MODEL)
    assert got1 == turns[0]
    history += [assistant(got1.text, got1.tool_calls), tool_result("contents", "c1")]
    got2 = replayer.complete(history, SCHEMAS, MODEL)
    assert got2 == turns[1]
    assert replayer.remaining() == 0


def test_replay_divergence_on_changed_history(tmp_path):
    path = tmp_path / "rec.jsonl"
    scripted_session(path)
    replayer = ReplayProvider(path)
    with pytest.raises(ReplayDivergenceError) as exc:
        replayer.complete([system("sys"), user("different task")], SCHEMAS, MODEL)
    assert exc.value.index == 0


def test_replay_exhaustion_is_provider_error(tmp_path):
    path = tmp_path / "rec.jsonl"
    scripted_session(path)
    replayer = ReplayProvider(path)
    history = list(HISTORY)
    got1 = replayer.complete(history, SCHEMAS, MODEL)
    history += [assistant(got1.text, got1.tool_calls), tool_result("contents", "c1")]
    replayer.complete(history, SCHEMAS, MODEL)
    with pytest.raises(ProviderError, match="exhausted"):
        replayer.complete(history, SCHEMAS, MODEL)


def test_replay_reports_leftovers(tmp_path):
    path = tmp_path / "rec.jsonl"
    scripted_session(path)
    replayer = ReplayProvider(path)
    replayer.complete(HISTORY, SCHEMAS, MODEL)
    assert replayer.remaining() == 1


def test_recording_file_shape(tmp_path):
    path = tmp_path / "rec.jsonl"
    scripted_session(path)
    lines = [json.loads(l) for l in path.read_text().splitlines()]
    assert len(lines) == 2
    for line in lines:
        assert set(line) == {"fingerprint", "turn"}
        assert len(line["fingerprint"]) == 64


def test_scripted_provider_exhaustion():
    provider = ScriptedProvider([ModelTurn("only")])
    provider.complete(HISTORY, SCHEMAS, MODEL)
    with pytest.raises(ProviderError):
        provider.complete(HISTORY, SCHEMAS, MODEL)


# -- live client -----------------------------------------------------------------------

def sse_body(chunks) -> str:
    return "".join(f"data: {json.dumps(c)}\n\n" for c in chunks) + "data: [DONE]\n\n"


def make_provider(handler, **kwargs):
    transport = httpx.MockTransport(handler)

    def factory(**client_kwargs):
        return httpx.Client(transport=transport, **client_kwargs)

    kwargs.setdefault("api_key", "test-key")
    kwargs.setdefault("backoff", (0.0, 0.0, 0.0))
    return OpenRouterProvider(http_factory=factory, **kwargs)


def test_missing_credential_is_configuration_error(monkeypatch):
    monkeypatch.delenv("OPENROUTER_API_KEY", raising=False)
    with pytest.raises(ConfigurationError, match="OPENROUTER_API_KEY"):
        OpenRouterProvider()


def test_streamed_text_and_usage_aggregation():
    chunks = [
        {"choices": [{"delta": {"content": "Hel"}}]},
        {"choices": [{"delta": {"content": "lo"}, "finish_reason": "stop"}]},
        {"choices": [], "usage": {"prompt_tokens": 42, "completion_tokens": 7}},
    ]

    def handler(request):
        assert request.headers["authorization"] == "Bearer test-key"
        body = json.loads(request.content)
        assert body["model"] == MODEL
        assert body["stream"] is True
        assert body["tools"][0]["function"]["name"] == "read_file"
        return httpx.Response(200, text=sse_body(chunks))

    turn = make_provider(handler).complete(HISTORY, SCHEMAS, MODEL)
    assert turn.text == "Hello"
    assert (turn.input_tokens, turn.output_tokens) == (42, 7)
    assert turn.finish_reason == "stop"
    assert turn.tool_calls == ()


def test_streamed_tool_call_delta_aggregation():
    chunks = [
        {"choices": [{"delta": {"tool_calls": [
            {"index": 0, "id": "call_a", "function": {"name": "read_file", "arguments": '{"file'}}
        ]}}]},
        {"choices": [{"delta": {"tool_calls": [
            {"index": 0, "function": {"arguments": '_path": "x"}'}},
            {"index": 1, "id": "call_b", "function": {"name": "write_file", "arguments": "{}"}},
        ]}, "finish_reason": "tool_calls"}]},
    ]

    def handler(request):
        return httpx.Response(200, text=sse_body(chunks))

    turn = make_provider(handler).complete(HISTORY, SCHEMAS, MODEL)
    assert turn.finish_reason == "tool_calls"
    assert turn.tool_calls == (
        ToolCall("call_a", "read_file", '{"file_path": "x"}'),
        ToolCall("call_b", "write_file", "{}"),
    )


def test_tool_result_messages_map_to_tool_role():
    captured = {}

    def handler(request):
        captured["body"] = json.loads(request.content)
        return httpx.Response(200, text=sse_body([{"choices": [{"delta": {"content": "ok"}}]}]))

    history = HISTORY + [
        assistant("", (ToolCall("c9", "read_file", "{}"),)),
        tool_result("file text", "c9"),
    ]
    make_provider(handler).complete(history, SCHEMAS, MODEL)
    wire = captured["body"]["messages"]
    assert wire[-1] == {"role": "tool", "tool_call_id": "c9", "content": "file text"}
    assert wire[-2]["tool_calls"][0]["function"]["name"] == "read_file"


def test_server_errors_retried_until_success():
    attempts = {"n": 0}

    def handler(request):
        attempts["n"] += 1
        if attempts["n"] < 3:
            return httpx.Response(500, text="upstream sad")
        return httpx.Response(200, text=sse_body([{"choices": [{"delta": {"content": "ok"}}]}]))

    turn = make_provider(handler).complete(HISTORY, SCHEMAS, MODEL)
    assert turn.text == "ok"
    assert attempts["n"] == 3


def test_server_errors_exhaust_retries():
    def handler(request):
        return httpx.Response(502, text="bad gateway")

    with pytest.raises(ProviderError, match="after retries"):
        make_provider(handler).complete(HISTORY, SCHEMAS, MODEL)


def test_client_error_fails_immediately():
    attempts = {"n": 0}

    def handler(request):
        attempts["n"] += 1
        return httpx.Response(401, text="bad key")

    with pytest.raises(ProviderError, match="rejected"):
        make_provider(handler).complete(HISTORY, SCHEMAS, MODEL)
    assert attempts["n"] == 1


def test_transport_errors_retried():
    attempts = {"n": 0}

    def handler(request):
        attempts["n"] += 1
        if attempts["n"] == 1:
            raise httpx.ConnectError("refused")
        return httpx.Response(200, text=sse_body([{"choices": [{"delta": {"content": "up"}}]}]))

    turn = make_provider(handler).complete(HISTORY, SCHEMAS, MODEL)
    assert turn.text == "up"
    assert attempts["n"] == 2
