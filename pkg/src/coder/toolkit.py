"""The agent-facing tool suite behind a dispatch registry.

Six tools: four sandboxed file operations, the in-memory todo list, and
code execution on the persistent kernel. Dispatch never raises: unknown
tools, bad arguments, and tool failures all come back as error results the
loop feeds to the model as observations.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from .errors import CoderError
from .gateway import ToolSchema
from .sandbox import SandboxError, resolve_sandbox_path, validate_glob_pattern
from .messages import ToolCall

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATE_LIMIT = 50_000

TODO_STATUSES = ("pending", "in_progress", "completed")
TODO_PRIORITIES = ("high", "medium", "low")
TODO_FIELDS = ("id", "content", "status", "priority")

STATUS_GLYPHS = {"completed": "✓", "in_progress": "▸", "pending": "☐"}


class ToolError(CoderError):
    """A tool-level failure; becomes an error result, never an exception upstream."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass(frozen=True)
class TodoItem:
    id: str
    content: str
    status: str
    priority: str


@dataclass(frozen=True)
class ToolResult:
    call_id: str
    ok: bool
    text: str
    error_kind: str | None = None

    def __post_init__(self) -> None:
        if self.ok and self.error_kind is not None:
            raise ValueError("successful results carry no error kind")


def truncate_payload(text: str, limit: int) -> str:
    """Cut oversized payloads, appending a marker line with the original length."""
    if len(text) <= limit:
        return text
    return text[:limit] + f"\n[truncated: output was {len(text)} characters]"


def validate_todos(raw) -> list[TodoItem]:
    """Strict validation; raises naming the first violated rule."""
    if not isinstance(raw, list):
        raise ToolError("validation-error", "todos must be a list")
    items: list[TodoItem] = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ToolError("validation-error", f"item {i} is not an object")
        for fld in TODO_FIELDS:
            if fld not in entry:
                raise ToolError("validation-error", f"item {i} missing field '{fld}'")
        unknown = set(entry) - set(TODO_FIELDS)
        if unknown:
            raise ToolError(
                "validation-error", f"item {i} has unknown field '{sorted(unknown)[0]}'"
            )
        for fld in TODO_FIELDS:
            if not isinstance(entry[fld], str):
                raise ToolError("validation-error", f"item {i} field '{fld}' must be a string")
        if not entry["content"]:
            raise ToolError("validation-error", f"item {i} has empty content")
        if entry["status"] not in TODO_STATUSES:
            raise ToolError(
                "validation-error",
                f"item {i} has unknown status '{entry['status']}'",
            )
        if entry["priority"] not in TODO_PRIORITIES:
            raise ToolError(
                "validation-error",
                f"item {i} has unknown priority '{entry['priority']}'",
            )
        items.append(TodoItem(entry["id"], entry["content"], entry["status"], entry["priority"]))

    ids = [it.id for it in items]
    if len(ids) != len(set(ids)):
        dup = next(x for i, x in enumerate(ids) if x in ids[:i])
        raise ToolError("validation-error", f"duplicate id '{dup}'")
    in_progress = [it for it in items if it.status == "in_progress"]
    if len(in_progress) > 1:
        raise ToolError(
            "validation-error",
            f"{len(in_progress)} items marked in_progress; at most one allowed",
        )
    return items


def render_todos(items: list[TodoItem]) -> str:
    if not items:
        return "todo list cleared"
    return "\n".join(
        f"{STATUS_GLYPHS[it.status]} [{it.priority}] {it.content}" for it in items
    )


# Argument specs: name -> (type, required). Checked before the handler runs.
_ARG_SPECS: dict[str, dict[str, tuple[type, bool]]] = {
    "read_file": {"file_path": (str, True)},
    "write_file": {"file_path": (str, True), "content": (str, True)},
    "list_files": {"pattern": (str, False)},
    "delete_file": {"file_path": (str, True)},
    "python_exec": {"code": (str, True)},
    "todo_write": {"todos": (list, True)},
}

TOOL_SCHEMAS: tuple[ToolSchema, ...] = (
    ToolSchema(
        "read_file",
        "Read the content of a file in the working directory.",
        {
            "type": "object",
            "properties": {"file_path": {"type": "string", "description": "Path relative to the working directory."}},
            "required": ["file_path"],
        },
    ),
    ToolSchema(
        "write_file",
        "Write content to a file in the working directory, creating parent directories as needed.",
        {
            "type": "object",
            "properties": {
                "file_path": {"type": "string", "description": "Path relative to the working directory."},
                "content": {"type": "string", "description": "Full file content to write."},
            },
            "required": ["file_path", "content"],
        },
    ),
    ToolSchema(
        "list_files",
        "List files in the working directory, with optional glob pattern filtering.",
        {
            "type": "object",
            "properties": {"pattern": {"type": "string", "description": "Glob pattern.", "default": "*"}},
            "required": [],
        },
    ),
    ToolSchema(
        "delete_file",
        "Remove a file from the working directory.",
        {
            "type": "object",
            "properties": {"file_path": {"type": "string", "description": "Path relative to the working directory."}},
            "required": ["file_path"],
        },
    ),
    ToolSchema(
        "python_exec",
        "Execute code in the persistent interactive kernel. State (variables, imports, functions) is kept across calls.",
        {
            "type": "object",
            "properties": {"code": {"type": "string", "description": "Code to execute."}},
            "required": ["code"],
        },
    ),
    ToolSchema(
        "todo_write",
        "Replace the task list. Each item needs id, content, status (pending|in_progress|completed) and priority (high|medium|low); at most one item may be in_progress.",
        {
            "type": "object",
            "properties": {
                "todos": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "id": {"type": "string"},
                            "content": {"type": "string"},
                            "status": {"type": "string", "enum": list(TODO_STATUSES)},
                            "priority": {"type": "string", "enum": list(TODO_PRIORITIES)},
                        },
                        "required": ["id", "content", "status", "priority"],
                    },
                }
            },
            "required": ["todos"],
        },
    ),
)


class Toolkit:
    """Session-scoped registry; all file effects are confined to the workdir.

    ``execute_code`` is the bridge to the kernel client: a callable taking
    source text and returning observation text, raising ToolError on kernel
    failures. Sessions without a kernel leave it None and python_exec reports
    an error result.
    """

    def __init__(
        self,
        workdir: Path | str,
        execute_code: Callable[[str], str] | None = None,
        truncate_limit: int = DEFAULT_TRUNCATE_LIMIT,
    ):
        self.workdir = Path(workdir).resolve()
        if not self.workdir.is_dir():
            raise ToolError("invalid-path", f"working directory {workdir} does not exist")
        self.todos: list[TodoItem] = []
        self.truncate_limit = truncate_limit
        self._execute_code = execute_code
        self._handlers: dict[str, Callable[..., str]] = {
            "read_file": self.read_file,
            "write_file": self.write_file,
            "list_files": self.list_files,
            "delete_file": self.delete_file,
            "python_exec": self.python_exec,
            "todo_write": self.todo_write,
        }

    def schemas(self) -> tuple[ToolSchema, ...]:
        return TOOL_SCHEMAS

    # -- file tools ---------------------------------------------------------

    def read_file(self, file_path: str) -> str:
        path = resolve_sandbox_path(self.workdir, file_path)
        if path.is_dir():
            raise ToolError("is-a-directory", f"{file_path!r} is a directory")
        if not path.is_file():
            raise ToolError("not-found", f"no such file: {file_path!r}")
        data = path.read_bytes()
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError:
            text = data.decode("utf-8", errors="replace")
            return f"[warning: file is not valid UTF-8; invalid bytes replaced]\n{text}"

    def write_file(self, file_path: str, content: str) -> str:
        path = resolve_sandbox_path(self.workdir, file_path)
        if path == self.workdir or path.is_dir():
            raise ToolError("is-a-directory", f"{file_path!r} is a directory")
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(content, encoding="utf-8")
        except OSError as exc:
            raise ToolError("io-failure", f"cannot write {file_path!r}: {exc}") from exc
        rel = path.relative_to(self.workdir)
        return f"wrote {len(content)} characters to {rel}"

    def list_files(self, pattern: str = "*") -> str:
        validate_glob_pattern(pattern)
        names = []
        for hit in self.workdir.glob(pattern):
            if not hit.is_file():
                continue
            resolved = hit.resolve()
            if resolved != self.workdir and self.workdir not in resolved.parents:
                continue  # symlinked entries pointing outside stay invisible
            names.append(str(hit.relative_to(self.workdir)))
        return "\n".join(sorted(names))

    def delete_file(self, file_path: str) -> str:
        path = resolve_sandbox_path(self.workdir, file_path)
        if path.is_dir():
            raise ToolError("is-a-directory", f"{file_path!r} is a directory")
        if not path.is_file():
            raise ToolError("not-found", f"no such file: {file_path!r}")
        try:
            path.unlink()
        except OSError as exc:
            raise ToolError("io-failure", f"cannot delete {file_path!r}: {exc}") from exc
        return f"deleted {path.relative_to(self.workdir)}"

    # -- todo tool -----------------------------------------------------------

    def todo_write(self, todos) -> str:
        items = validate_todos(todos)
        self.todos = items
        return render_todos(items)

    # -- kernel bridge --------------------------------------------------------

    def python_exec(self, code: str) -> str:
        if self._execute_code is None:
            raise ToolError("kernel-unavailable", "no execution kernel configured")
        return self._execute_code(code)

    # -- dispatch -------------------------------------------------------------

    def dispatch(self, call: ToolCall) -> ToolResult:
        handler = self._handlers.get(call.name)
        if handler is None:
            return ToolResult(call.call_id, False,
                              f"unknown tool {call.name!r}", "unknown-tool")
        try:
            args = json.loads(call.arguments) if call.arguments.strip() else {}
        except json.JSONDecodeError as exc:
            return ToolResult(call.call_id, False,
                              f"arguments are not valid JSON: {exc}", "bad-arguments")
        if not isinstance(args, dict):
            return ToolResult(call.call_id, False,
                              "arguments must be a JSON object", "bad-arguments")

        spec = _ARG_SPECS[call.name]
        for name, (typ, required) in spec.items():
            if name not in args:
                if required:
                    return ToolResult(call.call_id, False,
                                      f"missing required argument '{name}'", "bad-arguments")
                continue
            if not isinstance(args[name], typ):
                return ToolResult(
                    call.call_id, False,
                    f"argument '{name}' must be {typ.__name__}, got {type(args[name]).__name__}",
                    "bad-arguments",
                )
        unknown = set(args) - set(spec)
        if unknown:
            return ToolResult(call.call_id, False,
                              f"unknown argument '{sorted(unknown)[0]}'", "bad-arguments")

        try:
            payload = handler(**args)
        except ToolError as exc:
            return ToolResult(call.call_id, False,
                              truncate_payload(str(exc), self.truncate_limit), exc.kind)
        except SandboxError as exc:
            return ToolResult(call.call_id, False, str(exc), exc.kind)
        except Exception as exc:  # tools must never crash the loop
            logger.exception("tool %s failed unexpectedly", call.name)
            return ToolResult(call.call_id, False,
                              f"{type(exc).__name__}: {exc}", "tool-failure")
        return ToolResult(call.call_id, True,
                          truncate_payload(payload, self.truncate_limit))
