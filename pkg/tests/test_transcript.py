import json

import pytest

from coder.transcript import (
    TranscriptError,
    TranscriptEvent,
    TranscriptWriter,
    parse_transcript,
    persist_transcript,
    read_raw,
)


def events(n):
    return [
        TranscriptEvent("tool_call", {"call_id": f"c{i}", "name": "read_file", "arguments": "{}"})
        for i in range(n)
    ]


def test_three_events_three_lines_sequential(tmp_path):
    path = tmp_path / "t.jsonl"
    persist_transcript(events(3), path)
    lines = path.read_text().splitlines()
    assert len(lines) == 3
    assert [json.loads(l)["seq"] for l in lines] == [0, 1, 2]


def test_empty_event_list_creates_empty_file(tmp_path):
    path = tmp_path / "t.jsonl"
    persist_transcript([], path)
    assert path.exists() and path.read_text() == ""


def test_round_trip_ten_events(tmp_path):
    evs = events(8) + [
        TranscriptEvent("model_turn", {"text": "hi", "tool_calls": []},
                        usage={"input_tokens": 5, "output_tokens": 2}),
        TranscriptEvent("outcome", {"status": "completed"}),
    ]
    path = tmp_path / "t.jsonl"
    persist_transcript(evs, path)
    assert parse_transcript(path) == evs


def test_timestamps_present_but_excluded_from_comparison_form(tmp_path):
    path = tmp_path / "t.jsonl"
    persist_transcript(events(1), path)
    raw = read_raw(path)[0]
    assert "ts" in raw and "T" in raw["ts"]
    parsed = parse_transcript(path)[0]
    assert not hasattr(parsed, "ts")


def test_unknown_kind_rejected():
    with pytest.raises(ValueError, match="unknown event kind"):
        TranscriptEvent("telemetry", {})


def test_read_raw_rejects_broken_sequence(tmp_path):
    path = tmp_path / "t.jsonl"
    records = [
        {"seq": 0, "ts": "x", "kind": "outcome", "payload": {}},
        {"seq": 5, "ts": "x", "kind": "outcome", "payload": {}},
    ]
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n")
    with pytest.raises(TranscriptError, match="bad sequence number"):
        read_raw(path)


def test_writer_open_failure_raises_transcript_error(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    with pytest.raises(TranscriptError, match="cannot open"):
        TranscriptWriter(blocker / "t.jsonl")


def test_usage_field_only_when_given(tmp_path):
    path = tmp_path / "t.jsonl"
    persist_transcript(
        [
            TranscriptEvent("model_turn", {"text": ""}, usage={"input_tokens": 1, "output_tokens": 0}),
            TranscriptEvent("tool_call", {"name": "x"}),
        ],
        path,
    )
    first, second = read_raw(path)
    assert first["usage"] == {"input_tokens": 1, "output_tokens": 0}
    assert "usage" not in second
