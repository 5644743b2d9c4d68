"""The ReAct loop: model turn, tool dispatch, observation, repeat.

A session terminates when the model returns a turn with no tool calls
(task complete) or when the iteration limit is reached. Tool failures are
never raised out of the loop; they become observations the model can react
to.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .config import SessionConfig
from .gateway import (
    ModelTurn,
    OpenRouterProvider,
    Provider,
    ProviderError,
    RecordingProvider,
    ReplayProvider,
)
from .kernel import (
    DeadKernelError,
    ExecutionContext,
    ExecutionResult,
    KernelError,
    KernelRegistry,
    LaunchConfig,
)
from .messages import Message, assistant, tool_result
from .prompts import compose, load_bundle
from .toolkit import TOOL_SCHEMAS, Toolkit, ToolError, ToolResult
from .transcript import TranscriptError, TranscriptEvent, TranscriptWriter

STATUS_COMPLETED = "completed"
STATUS_ITERATION_LIMIT = "iteration-limit"
STATUS_PROVIDER_ERROR = "provider-error"
STATUS_ABORTED = "aborted"


@dataclass
class UsageStats:
    input_tokens: int = 0
    output_tokens: int = 0
    tool_counts: Counter = field(default_factory=Counter)

    def add_turn(self, turn: ModelTurn) -> None:
        self.input_tokens += turn.input_tokens
        self.output_tokens += turn.output_tokens

    def count_call(self, tool_name: str) -> None:
        self.tool_counts[tool_name] += 1

    def total_tool_calls(self) -> int:
        return sum(self.tool_counts.values())

    def as_dict(self) -> dict:
        return {
            "input_tokens": self.input_tokens,
            "output_tokens": self.output_tokens,
            "tool_counts": dict(sorted(self.tool_counts.items())),
        }


@dataclass(frozen=True)
class SessionOutcome:
    status: str
    final_text: str
    usage: UsageStats
    transcript_path: str | None
    iterations: int = 0
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.status == STATUS_COMPLETED and not self.final_text.strip():
            raise ValueError("completed outcome requires non-empty final text")


def step(
    history: Sequence[Message],
    turn: Message,
    dispatch: Callable[..., ToolResult],
) -> list[Message]:
    """Append the assistant turn plus one tool-result per call, in order.

    Tool errors come back as ToolResults, so this never raises on a
    failing tool.
    """
    out = list(history)
    out.append(turn)
    for call in turn.tool_calls:
        result = dispatch(call)
        out.append(tool_result(result.text, call.call_id))
    return out


def format_execution(result: ExecutionResult) -> str:
    """Render a kernel result as observation text for the model."""
    parts: list[str] = []
    if result.stdout:
        parts.append(result.stdout.rstrip("\n"))
    if result.stderr:
        parts.append("[stderr]\n" + result.stderr.rstrip("\n"))
    if result.result is not None:
        parts.append(result.result)
    if result.status == "error":
        detail = "\n".join(result.traceback) if result.traceback else (
            f"{result.error_name}: {result.error_message}"
        )
        parts.append(detail.rstrip("\n"))
    if not parts:
        return "(no output)"
    return "\n".join(parts)


class KernelExecutor:
    """Lazy bridge from the python_exec tool to a kernel handle."""

    def __init__(
        self,
        context: ExecutionContext,
        registry: KernelRegistry,
        timeout: float,
    ):
        self.context = context
        self.registry = registry
        self.timeout = timeout

    def __call__(self, code: str) -> str:
        try:
            handle = self.registry.ensure(self.context)
            result = handle.execute(code, timeout=self.timeout)
        except DeadKernelError as exc:
            raise ToolError("kernel-failure", f"kernel died: {exc}") from exc
        except KernelError as exc:
            raise ToolError("kernel-failure", str(exc)) from exc
        return format_execution(result)


def build_provider(config: SessionConfig) -> Provider:
    provider: Provider
    if config.replay_path:
        provider = ReplayProvider(config.replay_path)
    else:
        provider = OpenRouterProvider(
            base_url=config.base_url,
            api_key_env=config.api_key_env,
            timeout=config.request_timeout,
        )
    if config.record_path:
        provider = RecordingProvider(provider, config.record_path)
    return provider


def run_session(
    config: SessionConfig,
    provider: Provider | None = None,
    registry: KernelRegistry | None = None,
    on_event: Callable[[TranscriptEvent], None] | None = None,
) -> SessionOutcome:
    """Drive one full session. See module docstring for the loop contract."""
    config = config.validate()
    bundle = load_bundle(
        config.workdir,
        task=config.task,
        task_file=config.task_file,
        project_prompt=config.project_prompt,
    )
    if provider is None:
        provider = build_provider(config)

    owns_registry = registry is None
    if registry is None:
        registry = KernelRegistry(
            LaunchConfig(
                kernel_cmd=config.kernel_cmd,
                launch_timeout=config.launch_timeout,
            )
        )
    context = ExecutionContext(workdir=config.workdir, packages=config.packages)
    executor = KernelExecutor(context, registry, config.exec_timeout)
    toolkit = Toolkit(
        config.workdir,
        execute_code=executor,
        truncate_limit=config.truncate_limit,
    )

    transcript_path = config.transcript_path or os.path.join(
        config.workdir, "transcript.jsonl"
    )
    usage = UsageStats()
    warnings: list[str] = []
    history = compose(bundle)
    status = STATUS_ITERATION_LIMIT
    final_text = ""
    iterations = 0

    try:
        writer = TranscriptWriter(transcript_path)
    except TranscriptError as exc:
        return SessionOutcome(
            status=STATUS_ABORTED,
            final_text="",
            usage=usage,
            transcript_path=None,
            warnings=(f"transcript open failed: {exc}",),
        )

    def emit(kind: str, payload: dict, turn_usage: dict | None = None) -> None:
        event = TranscriptEvent(kind=kind, payload=payload, usage=turn_usage)
        writer.append(event)
        if on_event is not None:
            on_event(event)

    try:
        for iterations in range(1, config.max_iterations + 1):
            try:
                turn = provider.complete(history, TOOL_SCHEMAS, config.model)
            except ProviderError as exc:
                status = STATUS_PROVIDER_ERROR
                warnings.append(str(exc))
                break
            usage.add_turn(turn)
            emit(
                "model_turn",
                {
                    "text": turn.text,
                    "tool_calls": [
                        {"id": c.call_id, "name": c.name, "arguments": c.arguments}
                        for c in turn.tool_calls
                    ],
                    "finish_reason": turn.finish_reason,
                },
                {"input_tokens": turn.input_tokens, "output_tokens": turn.output_tokens},
            )

            if not turn.tool_calls:
                status = STATUS_COMPLETED
                final_text = turn.text
                if not final_text.strip():
                    final_text = "(model returned an empty final message)"
                    warnings.append("final model turn was empty")
                break

            assistant_msg = assistant(turn.text, turn.tool_calls)
            final_text = turn.text

            def dispatch_logged(call):
                emit(
                    "tool_call",
                    {"call_id": call.call_id, "name": call.name, "arguments": call.arguments},
                )
                usage.count_call(call.name)
                result = toolkit.dispatch(call)
                emit(
                    "tool_result",
                    {
                        "call_id": result.call_id,
                        "name": call.name,
                        "ok": result.ok,
                        "text": result.text,
                        "error_kind": result.error_kind,
                    },
                )
                return result

            history = step(history, assistant_msg, dispatch_logged)

        if isinstance(provider, ReplayProvider):
            leftover = provider.remaining()
            if leftover:
                warnings.append(f"replay transcript has {leftover} unused turns")

        emit(
            "outcome",
            {
                "status": status,
                "final_text": final_text,
                "iterations": iterations,
                "warnings": list(warnings),
            },
            {"input_tokens": usage.input_tokens, "output_tokens": usage.output_tokens},
        )
    except TranscriptError as exc:
        warnings.append(f"transcript write failed: {exc}")
        status = STATUS_ABORTED
    finally:
        try:
            writer.close()
        except TranscriptError as exc:
            warnings.append(f"transcript close failed: {exc}")
            status = STATUS_ABORTED
        if owns_registry:
            registry.shutdown_all()

    if status == STATUS_ABORTED:
        final_text = ""
    return SessionOutcome(
        status=status,
        final_text=final_text,
        usage=usage,
        transcript_path=transcript_path,
        iterations=iterations,
        warnings=tuple(warnings),
    )


def usage_from_transcript(path: str) -> UsageStats:
    """Independent tally: recompute usage by reading the transcript file."""
    from .transcript import read_raw

    usage = UsageStats()
    for record in read_raw(path):
        if record["kind"] == "model_turn" and record.get("usage"):
            usage.input_tokens += record["usage"]["input_tokens"]
            usage.output_tokens += record["usage"]["output_tokens"]
        elif record["kind"] == "tool_call":
            usage.tool_counts[record["payload"]["name"]] += 1
    return usage
