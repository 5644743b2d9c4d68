"""Conversational turn structure exchanged with the model provider.

A session history is an append-only sequence of immutable messages. Tool
calls live on assistant messages; each tool-result message references the
call id it answers.
"""

from __future__ import annotations

from dataclasses import dataclass

ROLE_SYSTEM = "system"
ROLE_USER = "user"
ROLE_ASSISTANT = "assistant"
ROLE_TOOL = "tool-result"

ROLES = (ROLE_SYSTEM, ROLE_USER, ROLE_ASSISTANT, ROLE_TOOL)


@dataclass(frozen=True)
class ToolCall:
    """One tool invocation requested by the model.

    ``arguments`` is kept as the raw JSON text the provider returned; parsing
    happens at dispatch so that malformed payloads become observations rather
    than crashes.
    """

    call_id: str
    name: str
    arguments: str


@dataclass(frozen=True)
class Message:
    role: str
    content: str
    tool_calls: tuple[ToolCall, ...] = ()
    tool_call_id: str | None = None

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}; expected one of {ROLES}")
        if self.tool_calls and self.role != ROLE_ASSISTANT:
            raise ValueError("only assistant messages may carry tool calls")
        if self.tool_call_id is not None and self.role != ROLE_TOOL:
            raise ValueError("tool_call_id is only valid on tool-result messages")
        if self.role == ROLE_TOOL and not self.tool_call_id:
            raise ValueError("tool-result messages must reference a call id")


def system(content: str) -> Message:
    return Message(ROLE_SYSTEM, content)


def user(content: str) -> Message:
    return Message(ROLE_USER, content)


def assistant(content: str, tool_calls: tuple[ToolCall, ...] = ()) -> Message:
    return Message(ROLE_ASSISTANT, content, tool_calls=tool_calls)


def tool_result(content: str, call_id: str) -> Message:
    return Message(ROLE_TOOL, content, tool_call_id=call_id)


def validate_history(history: list[Message]) -> None:
    """Check the tool-result linkage invariant over a whole history.

    Every tool-result must answer a call id introduced by an earlier
    assistant message. Raises ValueError on the first violation.
    """
    seen: set[str] = set()
    for i, msg in enumerate(history):
        if msg.role == ROLE_ASSISTANT:
            seen.update(c.call_id for c in msg.tool_calls)
        elif msg.role == ROLE_TOOL:
            if msg.tool_call_id not in seen:
                raise ValueError(
                    f"message {i} answers unknown call id {msg.tool_call_id!r}"
                )
