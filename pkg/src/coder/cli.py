"""Command-line entry points: ``coder run`` and ``coder bench``.

Exit codes: 0 success, 1 session or benchmark failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .bench import BenchConfig, emit_stats_table, run_benchmark, write_report
from .config import SessionConfig, apply_file_defaults, find_config_file, load_config_file
from .errors import ConfigurationError
from .gateway import ProviderError, ReplayDivergenceError
from .session import STATUS_COMPLETED, run_session

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


@dataclass(frozen=True)
class CliInvocation:
    subcommand: str
    task: str | None = None
    project: str | None = None
    workdir: str = "."
    packages: tuple[str, ...] = ()
    model: str | None = None
    max_iterations: int | None = None
    replay: str | None = None
    record: str | None = None
    problems_dir: str | None = None
    output: str | None = None
    parallelism: int | None = None

    def to_argv(self) -> list[str]:
        argv: list[str] = [self.subcommand]
        if self.subcommand == "bench" and self.problems_dir is not None:
            argv.append(self.problems_dir)
        if self.project is not None:
            argv += ["--project", self.project]
        if self.workdir != ".":
            argv += ["--workdir", self.workdir]
        for pkg in self.packages:
            argv += ["--with", pkg]
        if self.model is not None:
            argv += ["--model", self.model]
        if self.max_iterations is not None:
            argv += ["--max-iterations", str(self.max_iterations)]
        if self.subcommand == "run":
            if self.replay is not None:
                argv += ["--replay", self.replay]
            if self.record is not None:
                argv += ["--record", self.record]
            if self.task is not None:
                argv.append(self.task)
        else:
            if self.replay is not None:
                argv += ["--replay-dir", self.replay]
            if self.record is not None:
                argv += ["--record-dir", self.record]
            if self.output is not None:
                argv += ["--output", self.output]
            if self.parallelism is not None:
                argv += ["--parallelism", str(self.parallelism)]
        return argv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coder",
        description="autonomous coding agent driven by a tool-calling model",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    run_p = sub.add_parser("run", help="run one agent session")
    run_p.add_argument("task", nargs="?", default=None,
                       help="inline task text (default: read task.md from the workdir)")
    run_p.add_argument("--project", default=None,
                       help="path to a project prompt markdown file")
    run_p.add_argument("--workdir", default=".", help="working directory")
    run_p.add_argument("--with", dest="packages", action="append", default=[],
                       metavar="PACKAGE", help="package for the kernel environment (repeatable)")
    run_p.add_argument("--model", default=None, help="model identifier")
    run_p.add_argument("--max-iterations", type=int, default=None)
    run_p.add_argument("--replay", default=None,
                       help="replay a recorded provider transcript instead of calling the API")
    run_p.add_argument("--record", default=None,
                       help="record provider turns to this path while running live")

    bench_p = sub.add_parser("bench", help="run a directory of benchmark problems")
    bench_p.add_argument("problems_dir", help="directory of problem subdirectories")
    bench_p.add_argument("--project", default=None,
                         help="path to a project prompt markdown file")
    bench_p.add_argument("--workdir", default=".",
                         help="base directory (coder.toml lookup)")
    bench_p.add_argument("--with", dest="packages", action="append", default=[],
                         metavar="PACKAGE", help="extra package for every problem (repeatable)")
    bench_p.add_argument("--model", default=None)
    bench_p.add_argument("--max-iterations", type=int, default=None)
    bench_p.add_argument("--replay-dir", dest="replay", default=None,
                         help="directory of per-problem recorded transcripts")
    bench_p.add_argument("--record-dir", dest="record", default=None)
    bench_p.add_argument("--output", default=None,
                         help="directory for problem workdirs and the report")
    bench_p.add_argument("--parallelism", type=int, default=None)
    return parser


def parse_args(argv: list[str]) -> CliInvocation:
    ns = _build_parser().parse_args(argv)
    return CliInvocation(
        subcommand=ns.subcommand,
        task=getattr(ns, "task", None),
        project=ns.project,
        workdir=ns.workdir,
        packages=tuple(ns.packages),
        model=ns.model,
        max_iterations=ns.max_iterations,
        replay=ns.replay,
        record=ns.record,
        problems_dir=getattr(ns, "problems_dir", None),
        output=getattr(ns, "output", None),
        parallelism=getattr(ns, "parallelism", None),
    )


def _session_config(inv: CliInvocation) -> SessionConfig:
    kwargs: dict = {
        "workdir": inv.workdir,
        "task": inv.task,
        "project_prompt": inv.project,
        "packages": inv.packages,
        "replay_path": inv.replay,
        "record_path": inv.record,
    }
    if inv.model is not None:
        kwargs["model"] = inv.model
    if inv.max_iterations is not None:
        kwargs["max_iterations"] = inv.max_iterations
    config = SessionConfig(**kwargs)
    config_file = find_config_file(inv.workdir)
    if config_file is not None:
        config = apply_file_defaults(config, load_config_file(config_file))
    return config


def _cmd_run(inv: CliInvocation) -> int:
    config = _session_config(inv)
    outcome = run_session(config)
    if outcome.final_text:
        print(outcome.final_text)
    for warning in outcome.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    usage = outcome.usage
    print(
        f"[{outcome.status}] iterations={outcome.iterations} "
        f"tokens={usage.input_tokens}/{usage.output_tokens} "
        f"transcript={outcome.transcript_path}",
        file=sys.stderr,
    )
    return EXIT_OK if outcome.status == STATUS_COMPLETED else EXIT_FAILURE


def _cmd_bench(inv: CliInvocation) -> int:
    output_root = inv.output or str(Path(inv.workdir) / "bench-out")
    kwargs: dict = {
        "output_root": output_root,
        "project_prompt": inv.project,
        "replay_dir": inv.replay,
        "record_dir": inv.record,
    }
    if inv.model is not None:
        kwargs["model"] = inv.model
    if inv.max_iterations is not None:
        kwargs["max_iterations"] = inv.max_iterations
    if inv.parallelism is not None:
        kwargs["parallelism"] = inv.parallelism
    config = BenchConfig(**kwargs)
    verdicts, stats = run_benchmark(inv.problems_dir, config)
    report_dir = write_report(verdicts, stats, Path(output_root) / "report")
    print(emit_stats_table(stats), end="")
    failures = [v for v in verdicts if v.status != "pass"]
    for verdict in failures:
        print(
            f"FAIL {verdict.problem_id}: {verdict.failure_kind}: {verdict.details}",
            file=sys.stderr,
        )
    print(
        f"{len(verdicts) - len(failures)}/{len(verdicts)} passed; report in {report_dir}",
        file=sys.stderr,
    )
    return EXIT_FAILURE if failures else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        inv = parse_args(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if inv.subcommand == "run":
            return _cmd_run(inv)
        return _cmd_bench(inv)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ProviderError, ReplayDivergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
