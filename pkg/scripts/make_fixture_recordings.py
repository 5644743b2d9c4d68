#!/usr/bin/env python3
"""Regenerate the committed benchmark fixture recordings under recordings/.

Each fixture problem gets one scripted session: write solution.py, run it,
summarize. Before recording, every instance is re-verified with independent
brute force, and the node checkers are exercised on good and bad solutions.
After recording, the full benchmark is replayed from the fresh recordings
and must pass 4/4.

Fingerprints bind to the bundled system prompt, the task files, the tool
schemas, and the model id, so rerun this script whenever any of those
change:

    python3 scripts/make_fixture_recordings.py
"""

from __future__ import annotations

import hashlib
import itertools
import json
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from coder.bench import (  # noqa: E402
    BenchConfig,
    ProblemCase,
    _prepare_workdir,
    discover_problems,
    emit_stats_table,
    run_benchmark,
)
from coder.config import SessionConfig  # noqa: E402
from coder.gateway import ModelTurn, RecordingProvider, ScriptedProvider  # noqa: E402
from coder.kernel import KernelRegistry, LaunchConfig  # noqa: E402
from coder.messages import ToolCall  # noqa: E402
from coder.session import run_session  # noqa: E402

PROBLEMS_DIR = ROOT / "problems"
RECORDINGS_DIR = ROOT / "recordings"

# BenchConfig's default model id, so replays need no extra flags
MODEL = "replay"

# assignment keeps the kernel from echoing the module globals, whose repr
# carries process-specific addresses and would break replay fingerprints
RUN_SOLUTION = 'import runpy\n_ = runpy.run_path("solution.py")\n'

NQUEENS_SOLUTION = '''\
import json

N = 6

def solve(queens):
    row = len(queens)
    if row == N:
        return queens
    for col in range(N):
        if all(col != q and row - r != abs(col - q) for r, q in enumerate(queens)):
            found = solve(queens + [col])
            if found:
                return found
    return None

board = solve([])
assert board is not None
with open("solution.json", "w", encoding="utf-8") as fh:
    json.dump({"queens": board}, fh)
print("queens:", board)
'''

KNAPSACK_SOLUTION = '''\
import json
from itertools import combinations

with open("instance.json", encoding="utf-8") as fh:
    instance = json.load(fh)
items = instance["items"]
capacity = instance["capacity"]

best_value = 0
best_subset = []
for r in range(len(items) + 1):
    for subset in combinations(range(len(items)), r):
        weight = sum(items[i][0] for i in subset)
        if weight <= capacity:
            value = sum(items[i][1] for i in subset)
            if value > best_value:
                best_value = value
                best_subset = list(subset)

with open("solution.json", "w", encoding="utf-8") as fh:
    json.dump({"chosen": best_subset, "objective": best_value}, fh)
print("objective:", best_value, "chosen:", best_subset)
'''

SUDOKU_SOLUTION = '''\
import json

with open("puzzle.json", encoding="utf-8") as fh:
    grid = json.load(fh)["givens"]

def candidates(r, c):
    used = set(grid[r]) | {grid[k][c] for k in range(9)}
    br, bc = 3 * (r // 3), 3 * (c // 3)
    used |= {grid[br + i][bc + j] for i in range(3) for j in range(3)}
    return [v for v in range(1, 10) if v not in used]

def solve():
    for r in range(9):
        for c in range(9):
            if grid[r][c] == 0:
                for v in candidates(r, c):
                    grid[r][c] = v
                    if solve():
                        return True
                    grid[r][c] = 0
                return False
    return True

assert solve()
with open("solution.json", "w", encoding="utf-8") as fh:
    json.dump({"grid": grid}, fh)
print("first row:", grid[0])
'''

SUBSET_SUM_SOLUTION = '''\
import json
from itertools import combinations

with open("instance.json", encoding="utf-8") as fh:
    instance = json.load(fh)
items = instance["items"]
target = instance["target"]

found = None
for r in range(len(items) + 1):
    for subset in combinations(range(len(items)), r):
        if sum(items[i] for i in subset) == target:
            found = list(subset)
            break
    if found is not None:
        break

assert found is not None
with open("solution.json", "w", encoding="utf-8") as fh:
    json.dump({"indices": found}, fh)
print("indices:", found, "sum:", sum(items[i] for i in found))
'''


def call(call_id: str, name: str, **args) -> ToolCall:
    return ToolCall(call_id, name, json.dumps(args))


def scripted_turns(problem_id: str, solution: str, read_target: str | None,
                   summary: str) -> list[ModelTurn]:
    turns = []
    tokens_in = 2300
    if read_target is not None:
        turns.append(ModelTurn(
            text=f"Looking at the instance data for {problem_id}.",
            tool_calls=(call("call_1", "read_file", file_path=read_target),),
            input_tokens=tokens_in, output_tokens=40,
        ))
        tokens_in += 600
    turns.append(ModelTurn(
        text="Writing a brute-force solver.",
        tool_calls=(call("call_2", "write_file",
                         file_path="solution.py", content=solution),),
        input_tokens=tokens_in, output_tokens=240,
    ))
    tokens_in += 500
    turns.append(ModelTurn(
        text="Running the script to produce solution.json.",
        tool_calls=(call("call_3", "python_exec", code=RUN_SOLUTION),),
        input_tokens=tokens_in, output_tokens=55,
    ))
    tokens_in += 400
    turns.append(ModelTurn(text=summary, input_tokens=tokens_in, output_tokens=80))
    return turns


FIXTURES = {
    "nqueens": scripted_turns(
        "nqueens", NQUEENS_SOLUTION, None,
        "Placed 6 non-attacking queens; solution.json holds the column list.",
    ),
    "knapsack": scripted_turns(
        "knapsack", KNAPSACK_SOLUTION, "instance.json",
        "Exhaustive search found the optimal packing; solution.json has the "
        "chosen items and objective.",
    ),
    "sudoku": scripted_turns(
        "sudoku", SUDOKU_SOLUTION, "puzzle.json",
        "Backtracking completed the grid; solution.json holds the full board.",
    ),
    "subset_sum": scripted_turns(
        "subset_sum", SUBSET_SUM_SOLUTION, "instance.json",
        "Found a subset hitting the target; solution.json lists the indices.",
    ),
}


# ---------------------------------------------------------------------------
# independent verification, before anything is recorded
# ---------------------------------------------------------------------------


def verify_nqueens() -> None:
    n = 6
    solutions = [
        list(perm) for perm in itertools.permutations(range(n))
        if all(abs(i - j) != abs(perm[i] - perm[j])
               for i in range(n) for j in range(i + 1, n))
    ]
    assert len(solutions) == 4, solutions
    assert [1, 3, 5, 0, 2, 4] in solutions


def verify_knapsack() -> None:
    meta = json.loads((PROBLEMS_DIR / "knapsack" / "meta.json").read_text("utf-8"))
    instance = json.loads((PROBLEMS_DIR / "knapsack" / "instance.json").read_text("utf-8"))
    items, capacity = instance["items"], instance["capacity"]
    assert len(items) <= 20
    best = 0
    for mask in range(1 << len(items)):
        weight = sum(items[i][0] for i in range(len(items)) if mask >> i & 1)
        value = sum(items[i][1] for i in range(len(items)) if mask >> i & 1)
        if weight <= capacity:
            best = max(best, value)
    assert best == meta["reference_objective"], (best, meta["reference_objective"])


def verify_sudoku() -> None:
    puzzle = json.loads((PROBLEMS_DIR / "sudoku" / "puzzle.json").read_text("utf-8"))
    grid = [row[:] for row in puzzle["givens"]]

    def solve(g):
        for r in range(9):
            for c in range(9):
                if g[r][c] == 0:
                    for v in range(1, 10):
                        if (all(g[r][k] != v for k in range(9))
                                and all(g[k][c] != v for k in range(9))
                                and all(g[3 * (r // 3) + i][3 * (c // 3) + j] != v
                                        for i in range(3) for j in range(3))):
                            g[r][c] = v
                            if solve(g):
                                return True
                            g[r][c] = 0
                    return False
        return True

    assert solve(grid)
    for unit in (
        list(grid)
        + [[grid[r][c] for r in range(9)] for c in range(9)]
        + [[grid[3 * br + i][3 * bc + j] for i in range(3) for j in range(3)]
           for br in range(3) for bc in range(3)]
    ):
        assert sorted(unit) == list(range(1, 10))


def verify_subset_sum() -> None:
    instance = json.loads((PROBLEMS_DIR / "subset_sum" / "instance.json").read_text("utf-8"))
    items, target = instance["items"], instance["target"]
    hits = [
        subset
        for r in range(len(items) + 1)
        for subset in itertools.combinations(range(len(items)), r)
        if sum(items[i] for i in subset) == target
    ]
    assert hits, "instance has no solution"


def cross_check_checkers() -> None:
    """The committed node checkers must accept verified solutions and
    reject corrupted ones."""
    good = {
        "nqueens": {"queens": [1, 3, 5, 0, 2, 4]},
        "knapsack": {"chosen": [1, 2, 4, 7], "objective": 110},
        "subset_sum": {"indices": [2, 3]},
    }
    bad = {
        "nqueens": {"queens": [0, 1, 2, 3, 4, 5]},
        "knapsack": {"chosen": [0], "objective": 25},
        "subset_sum": {"indices": [0]},
    }
    with tempfile.TemporaryDirectory() as tmp:
        for problem_id, solution in good.items():
            assert _run_check(problem_id, solution, Path(tmp)) == 0, problem_id
        for problem_id, solution in bad.items():
            assert _run_check(problem_id, solution, Path(tmp)) == 1, problem_id


def _run_check(problem_id: str, solution: dict, tmp: Path) -> int:
    path = tmp / f"{problem_id}.json"
    path.write_text(json.dumps(solution), "utf-8")
    proc = subprocess.run(
        ["node", str(PROBLEMS_DIR / problem_id / "check.js"), str(path)],
        capture_output=True, text=True, timeout=60,
    )
    return proc.returncode


# ---------------------------------------------------------------------------
# recording
# ---------------------------------------------------------------------------


def record_fixture(case: ProblemCase, turns: list[ModelTurn], output_root: Path) -> None:
    workdir = _prepare_workdir(case, output_root)
    provider = RecordingProvider(
        ScriptedProvider(turns), RECORDINGS_DIR / f"{case.problem_id}.jsonl"
    )
    config = SessionConfig(
        workdir=str(workdir), task_file=case.task_file, model=MODEL,
        max_iterations=10,
    )
    registry = KernelRegistry(LaunchConfig())
    try:
        outcome = run_session(config, provider=provider, registry=registry)
    finally:
        registry.shutdown_all()
    assert outcome.status == "completed", (case.problem_id, outcome.status)
    assert (workdir / "solution.json").is_file(), case.problem_id


def main() -> None:
    verify_nqueens()
    verify_knapsack()
    verify_sudoku()
    verify_subset_sum()
    cross_check_checkers()
    print("instance verification: ok")

    RECORDINGS_DIR.mkdir(exist_ok=True)
    cases = {case.problem_id: case for case in discover_problems(PROBLEMS_DIR)}
    assert sorted(cases) == sorted(FIXTURES), sorted(cases)

    with tempfile.TemporaryDirectory() as tmp:
        for problem_id, turns in sorted(FIXTURES.items()):
            record_fixture(cases[problem_id], turns, Path(tmp))
            print(f"recorded {problem_id}")

    # the recordings must drive the benchmark to a clean 4/4
    with tempfile.TemporaryDirectory() as tmp:
        config = BenchConfig(output_root=tmp, replay_dir=str(RECORDINGS_DIR))
        verdicts, stats = run_benchmark(PROBLEMS_DIR, config)
    failures = [v for v in verdicts if v.status != "pass"]
    assert not failures, [v.as_dict() for v in failures]

    # every replayed session must have consumed its whole recording
    for row in stats:
        tallied_in = tallied_out = 0
        for line in (RECORDINGS_DIR / f"{row.problem_id}.jsonl").read_text("utf-8").splitlines():
            turn = json.loads(line)["turn"]
            tallied_in += turn.get("input_tokens", 0)
            tallied_out += turn.get("output_tokens", 0)
        assert (row.input_tokens, row.output_tokens) == (tallied_in, tallied_out), row

    print(emit_stats_table(stats), end="")

    for path in sorted(RECORDINGS_DIR.glob("*.jsonl")):
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        print(f"{digest}  {path.relative_to(ROOT)}")


if __name__ == "__main__":
    main()
