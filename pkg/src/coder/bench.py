"""Benchmark harness: run problems through sessions, validate, tabulate.

Problem layout: problems/<id>/task.md plus meta.json
{kind, checker?, reference_objective?, objective_key?, packages?,
solution_script?}. Checkers are separate processes invoked as
``interpreter check-script solution.json``; exit 0 accepts, 1 rejects,
2 flags malformed input.
"""

from __future__ import annotations

import json
import shutil
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from .config import SessionConfig
from .errors import CoderError
from .kernel import ExecutionContext, KernelRegistry, LaunchConfig
from .session import STATUS_COMPLETED, SessionOutcome, UsageStats, run_session

KIND_SATISFACTION = "satisfaction"
KIND_OPTIMIZATION = "optimization"

FAIL_MALFORMED = "malformed-output"
FAIL_CONSTRAINT = "constraint-violation"
FAIL_SUBOPTIMAL = "suboptimal"
FAIL_RUNTIME = "runtime-error"
FAIL_TIMEOUT = "timeout"

FLOAT_OBJECTIVE_RTOL = 1e-6

# checker extension -> interpreter argv prefix
_INTERPRETERS = {
    ".py": lambda: [sys.executable],
    ".js": lambda: ["node"],
}


class ProblemLayoutError(CoderError):
    """Problem directory is missing required pieces."""


@dataclass(frozen=True)
class ProblemCase:
    problem_id: str
    directory: Path
    kind: str
    task_file: str = "task.md"
    checker: Path | None = None
    reference_objective: int | float | None = None
    objective_key: str = "objective"
    packages: tuple[str, ...] = ()
    solution_script: str = "solution.py"

    @classmethod
    def from_dir(cls, directory: str | Path) -> "ProblemCase":
        directory = Path(directory)
        meta_path = directory / "meta.json"
        if not meta_path.is_file():
            raise ProblemLayoutError(f"{directory}: missing meta.json")
        try:
            meta = json.loads(meta_path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise ProblemLayoutError(f"{meta_path}: invalid JSON: {exc}") from exc

        kind = meta.get("kind")
        if kind not in (KIND_SATISFACTION, KIND_OPTIMIZATION):
            raise ProblemLayoutError(f"{directory}: kind must be satisfaction or optimization")

        task_file = meta.get("task_file", "task.md")
        if not (directory / task_file).is_file():
            raise ProblemLayoutError(f"{directory}: missing {task_file}")

        checker = None
        if meta.get("checker"):
            checker = directory / meta["checker"]
            if not checker.is_file():
                raise ProblemLayoutError(f"{directory}: checker not found: {checker}")

        reference = meta.get("reference_objective")
        if kind == KIND_OPTIMIZATION and reference is None:
            raise ProblemLayoutError(
                f"{directory}: optimization case needs reference_objective"
            )

        return cls(
            problem_id=directory.name,
            directory=directory,
            kind=kind,
            task_file=task_file,
            checker=checker,
            reference_objective=reference,
            objective_key=meta.get("objective_key", "objective"),
            packages=tuple(meta.get("packages", ())),
            solution_script=meta.get("solution_script", "solution.py"),
        )


@dataclass(frozen=True)
class Verdict:
    problem_id: str
    status: str  # pass | fail
    failure_kind: str | None = None
    details: str = ""

    def __post_init__(self) -> None:
        if self.status == "pass" and self.failure_kind is not None:
            raise ValueError("pass verdict cannot carry a failure kind")

    def as_dict(self) -> dict:
        return {
            "problem_id": self.problem_id,
            "status": self.status,
            "failure_kind": self.failure_kind,
            "details": self.details,
        }


@dataclass(frozen=True)
class RunStats:
    problem_id: str
    reads: int = 0
    writes: int = 0
    execs: int = 0
    todos: int = 0
    input_tokens: int = 0
    output_tokens: int = 0

    @classmethod
    def from_usage(cls, problem_id: str, usage: UsageStats) -> "RunStats":
        return cls(
            problem_id=problem_id,
            reads=usage.tool_counts.get("read_file", 0),
            writes=usage.tool_counts.get("write_file", 0),
            execs=usage.tool_counts.get("python_exec", 0),
            todos=usage.tool_counts.get("todo_write", 0),
            input_tokens=usage.input_tokens,
            output_tokens=usage.output_tokens,
        )


@dataclass(frozen=True)
class BenchConfig:
    output_root: str
    model: str = "replay"
    project_prompt: str | None = None
    max_iterations: int = 50
    parallelism: int = 2
    replay_dir: str | None = None
    record_dir: str | None = None
    solution_timeout: float = 300.0
    exec_timeout: float = 120.0
    launch_timeout: float = 30.0
    kernel_cmd: tuple[str, ...] = ()


def thousands(tokens: int) -> int:
    """Token count in thousands, round half up (499 -> 0, 500 -> 1)."""
    return int(
        (Decimal(tokens) / 1000).quantize(Decimal("1"), rounding=ROUND_HALF_UP)
    )


def render_stats_row(stats: RunStats) -> str:
    return (
        f"{stats.reads} {stats.writes} {stats.execs} {stats.todos} "
        f"{thousands(stats.input_tokens)}/{thousands(stats.output_tokens)}"
    )


def emit_stats_table(stats: list[RunStats]) -> str:
    """One row per problem, ordered by id; columns r w ex td in/out."""
    lines = ["problem r w ex td in/out"]
    for row in sorted(stats, key=lambda s: s.problem_id):
        lines.append(f"{row.problem_id} {render_stats_row(row)}")
    return "\n".join(lines) + "\n"


def _objectives_match(claimed, reference) -> bool:
    if isinstance(claimed, bool) or isinstance(reference, bool):
        return False
    if isinstance(claimed, int) and isinstance(reference, int):
        return claimed == reference
    if isinstance(claimed, (int, float)) and isinstance(reference, (int, float)):
        scale = max(abs(float(claimed)), abs(float(reference)), 1e-12)
        return abs(float(claimed) - float(reference)) <= FLOAT_OBJECTIVE_RTOL * scale
    return False


def run_checker(case: ProblemCase, solution_path: Path) -> subprocess.CompletedProcess:
    assert case.checker is not None
    prefix_factory = _INTERPRETERS.get(case.checker.suffix)
    argv = (prefix_factory() if prefix_factory else []) + [
        str(case.checker),
        str(solution_path),
    ]
    return subprocess.run(argv, capture_output=True, text=True, timeout=60)


def validate_solution(
    case: ProblemCase,
    solution_text: str,
    solution_path: Path | None = None,
) -> Verdict:
    """Constraint checking by re-verification, never by comparing to one
    golden assignment; optimization additionally matches the objective."""
    try:
        parsed = json.loads(solution_text)
    except json.JSONDecodeError as exc:
        return Verdict(case.problem_id, "fail", FAIL_MALFORMED, f"invalid JSON: {exc}")
    if not isinstance(parsed, dict):
        return Verdict(case.problem_id, "fail", FAIL_MALFORMED, "solution must be a JSON object")

    if case.checker is not None:
        if solution_path is None or not solution_path.is_file():
            solution_path = case.directory / "solution-under-check.json"
            solution_path.write_text(solution_text, "utf-8")
        try:
            proc = run_checker(case, solution_path)
        except (OSError, subprocess.TimeoutExpired) as exc:
            return Verdict(case.problem_id, "fail", FAIL_RUNTIME, f"checker failed to run: {exc}")
        if proc.returncode == 2:
            return Verdict(
                case.problem_id, "fail", FAIL_MALFORMED,
                f"checker flagged malformed input: {proc.stderr.strip()}",
            )
        if proc.returncode != 0:
            return Verdict(
                case.problem_id, "fail", FAIL_CONSTRAINT,
                proc.stderr.strip() or "checker rejected the solution",
            )

    if case.kind == KIND_OPTIMIZATION:
        if case.objective_key not in parsed:
            return Verdict(
                case.problem_id, "fail", FAIL_MALFORMED,
                f"missing objective key {case.objective_key!r}",
            )
        claimed = parsed[case.objective_key]
        if not _objectives_match(claimed, case.reference_objective):
            return Verdict(
                case.problem_id, "fail", FAIL_SUBOPTIMAL,
                f"objective {claimed!r} != reference {case.reference_objective!r}",
            )

    return Verdict(case.problem_id, "pass")


def discover_problems(problems_dir: str | Path) -> list[ProblemCase]:
    problems_dir = Path(problems_dir)
    if not problems_dir.is_dir():
        return []
    cases = []
    for entry in sorted(problems_dir.iterdir()):
        if entry.is_dir() and (entry / "meta.json").is_file():
            cases.append(ProblemCase.from_dir(entry))
    return cases


def _prepare_workdir(case: ProblemCase, output_root: Path) -> Path:
    workdir = output_root / case.problem_id
    if workdir.exists():
        shutil.rmtree(workdir)
    workdir.mkdir(parents=True)
    skip = {"meta.json"}
    if case.checker is not None:
        skip.add(case.checker.name)
    for item in case.directory.iterdir():
        if item.name in skip:
            continue
        if item.is_dir():
            shutil.copytree(item, workdir / item.name)
        else:
            shutil.copy2(item, workdir / item.name)
    return workdir


def _run_problem(case: ProblemCase, config: BenchConfig) -> tuple[Verdict, RunStats]:
    workdir = _prepare_workdir(case, Path(config.output_root))
    replay_path = (
        str(Path(config.replay_dir) / f"{case.problem_id}.jsonl")
        if config.replay_dir
        else None
    )
    record_path = (
        str(Path(config.record_dir) / f"{case.problem_id}.jsonl")
        if config.record_dir
        else None
    )
    session_config = SessionConfig(
        workdir=str(workdir),
        task_file=case.task_file,
        project_prompt=config.project_prompt,
        model=config.model,
        packages=case.packages,
        max_iterations=config.max_iterations,
        replay_path=replay_path,
        record_path=record_path,
        exec_timeout=config.exec_timeout,
        launch_timeout=config.launch_timeout,
        kernel_cmd=config.kernel_cmd,
    )
    registry = KernelRegistry(
        LaunchConfig(kernel_cmd=config.kernel_cmd, launch_timeout=config.launch_timeout)
    )
    try:
        outcome = run_session(session_config, registry=registry)
        stats = RunStats.from_usage(case.problem_id, outcome.usage)
        verdict = _judge(case, config, workdir, outcome, registry)
        return verdict, stats
    finally:
        registry.shutdown_all()


def _judge(
    case: ProblemCase,
    config: BenchConfig,
    workdir: Path,
    outcome: SessionOutcome,
    registry: KernelRegistry,
) -> Verdict:
    # a pass must come from a session that actually ran to completion;
    # artifacts left behind by a crashed or diverged run do not count
    if outcome.status != STATUS_COMPLETED:
        return Verdict(
            case.problem_id, "fail", FAIL_RUNTIME,
            f"session ended with status {outcome.status}",
        )
    script = workdir / case.solution_script
    if not script.is_file():
        detail = f"session ended with status {outcome.status}; no {case.solution_script}"
        return Verdict(case.problem_id, "fail", FAIL_MALFORMED, detail)

    handle = registry.ensure(ExecutionContext(workdir=str(workdir), packages=case.packages))
    result = handle.execute(script.read_text("utf-8"), timeout=config.solution_timeout)
    if result.status == "error":
        if result.error_name == "ExecutionTimeout":
            return Verdict(
                case.problem_id, "fail", FAIL_TIMEOUT,
                f"{case.solution_script} exceeded {config.solution_timeout}s",
            )
        detail = result.error_message or result.error_name or "execution failed"
        return Verdict(case.problem_id, "fail", FAIL_RUNTIME, f"{case.solution_script}: {detail}")

    solution_path = workdir / "solution.json"
    if solution_path.is_file():
        solution_text = solution_path.read_text("utf-8")
    elif result.stdout.strip():
        solution_text = result.stdout
        solution_path = workdir / "solution-from-stdout.json"
        solution_path.write_text(solution_text, "utf-8")
    else:
        return Verdict(
            case.problem_id, "fail", FAIL_MALFORMED,
            "no solution.json and no JSON on stdout",
        )
    return validate_solution(case, solution_text, solution_path)


def run_benchmark(
    problems_dir: str | Path,
    config: BenchConfig,
) -> tuple[list[Verdict], list[RunStats]]:
    """One isolated session per problem; partial failures never abort the
    batch."""
    cases = discover_problems(problems_dir)
    if not cases:
        return [], []
    Path(config.output_root).mkdir(parents=True, exist_ok=True)

    def safe_run(case: ProblemCase) -> tuple[Verdict, RunStats]:
        try:
            return _run_problem(case, config)
        except Exception as exc:  # noqa: BLE001 - isolation rule
            return (
                Verdict(case.problem_id, "fail", FAIL_RUNTIME, f"harness error: {exc}"),
                RunStats(case.problem_id),
            )

    workers = max(1, config.parallelism)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(safe_run, cases))

    verdicts = sorted((v for v, _ in results), key=lambda v: v.problem_id)
    stats = sorted((s for _, s in results), key=lambda s: s.problem_id)
    return verdicts, stats


def write_report(
    verdicts: list[Verdict],
    stats: list[RunStats],
    report_dir: str | Path,
) -> Path:
    report_dir = Path(report_dir)
    report_dir.mkdir(parents=True, exist_ok=True)
    (report_dir / "stats.txt").write_text(emit_stats_table(stats), "utf-8")
    (report_dir / "verdicts.json").write_text(
        json.dumps([v.as_dict() for v in verdicts], indent=2) + "\n", "utf-8"
    )
    return report_dir
