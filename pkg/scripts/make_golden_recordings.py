#!/usr/bin/env python3
"""Regenerate the committed golden provider recordings under tests/data/.

The golden session is a scripted five-turn run (todo list, two file writes,
one read-back, final summary) captured through the recording provider. Its
fingerprints bind to the bundled system prompt and the task text below, so
rerun this script whenever either changes:

    python3 scripts/make_golden_recordings.py
"""

from __future__ import annotations

import json
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from coder.config import SessionConfig  # noqa: E402
from coder.gateway import ModelTurn, RecordingProvider, ScriptedProvider  # noqa: E402
from coder.messages import ToolCall  # noqa: E402
from coder.session import run_session  # noqa: E402

DATA_DIR = ROOT / "tests" / "data"

GOLDEN_TASK = (
    "Compute the sum of the squares of the integers 1 through 10. "
    "Write a small script named compute.py that performs the computation, "
    "and store the final number in result.txt."
)
GOLDEN_MODEL = "anthropic/claude-sonnet-4"

COMPUTE_PY = """\
total = sum(i * i for i in range(1, 11))
with open("result.txt", "w", encoding="utf-8") as fh:
    fh.write(f"{total}\\n")
print(total)
"""

RESULT_TXT = "385\n"

TODOS = [
    {"id": "t1", "content": "write compute.py", "status": "in_progress",
     "priority": "high"},
    {"id": "t2", "content": "store the result in result.txt", "status": "pending",
     "priority": "high"},
    {"id": "t3", "content": "verify result.txt contents", "status": "pending",
     "priority": "medium"},
]


def call(call_id: str, name: str, **args) -> ToolCall:
    return ToolCall(call_id, name, json.dumps(args))


GOLDEN_TURNS = [
    ModelTurn(
        text="Small task; I'll track it with a short list.",
        tool_calls=(call("call_1", "todo_write", todos=TODOS),),
        input_tokens=2400, output_tokens=160,
    ),
    ModelTurn(
        text="Writing the computation script.",
        tool_calls=(call("call_2", "write_file",
                         file_path="compute.py", content=COMPUTE_PY),),
        input_tokens=2700, output_tokens=140,
    ),
    ModelTurn(
        text="1^2 + ... + 10^2 = 385. Storing it.",
        tool_calls=(call("call_3", "write_file",
                         file_path="result.txt", content=RESULT_TXT),),
        input_tokens=3000, output_tokens=90,
    ),
    ModelTurn(
        text="Reading the file back to confirm.",
        tool_calls=(call("call_4", "read_file", file_path="result.txt"),),
        input_tokens=3200, output_tokens=45,
    ),
    ModelTurn(
        text=(
            "Done. compute.py derives the sum of squares of 1..10 and "
            "result.txt holds the value 385."
        ),
        input_tokens=3400, output_tokens=65,
    ),
]


def record_golden_session() -> None:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    recording_path = DATA_DIR / "golden_session.jsonl"
    with tempfile.TemporaryDirectory() as workdir:
        provider = RecordingProvider(ScriptedProvider(GOLDEN_TURNS), recording_path)
        outcome = run_session(
            SessionConfig(workdir=workdir, task=GOLDEN_TASK, model=GOLDEN_MODEL),
            provider=provider,
        )
        if outcome.status != "completed":
            raise SystemExit(f"golden session did not complete: {outcome.status}")
        files = {
            "compute.py": (Path(workdir) / "compute.py").read_text("utf-8"),
            "result.txt": (Path(workdir) / "result.txt").read_text("utf-8"),
        }
    if files != {"compute.py": COMPUTE_PY, "result.txt": RESULT_TXT}:
        raise SystemExit("recorded session produced unexpected files")

    meta = {
        "task": GOLDEN_TASK,
        "model": GOLDEN_MODEL,
        "files": files,
        "turns": len(GOLDEN_TURNS),
    }
    (DATA_DIR / "golden_session.meta.json").write_text(
        json.dumps(meta, indent=2) + "\n", "utf-8"
    )
    print(f"wrote {recording_path}")
    print(f"wrote {DATA_DIR / 'golden_session.meta.json'}")


if __name__ == "__main__":
    record_golden_session()
