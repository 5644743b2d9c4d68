import pytest

from coder.messages import (
    Message,
    ToolCall,
    assistant,
    system,
    tool_result,
    user,
    validate_history,
)


def test_roles_accepted():
    assert system("s").role == "system"
    assert user("u").role == "user"
    assert assistant("a").role == "assistant"
    assert tool_result("out", "call_1").role == "tool-result"


def test_unknown_role_rejected():
    with pytest.raises(ValueError, match="unknown role"):
        Message("owner", "hi")


def test_tool_calls_only_on_assistant():
    call = ToolCall("c1", "read_file", "{}")
    assert assistant("x", (call,)).tool_calls == (call,)
    with pytest.raises(ValueError, match="assistant"):
        Message("user", "x", tool_calls=(call,))


def test_tool_result_requires_call_id():
    with pytest.raises(ValueError, match="call id"):
        Message("tool-result", "out")
    with pytest.raises(ValueError, match="tool-result"):
        Message("user", "out", tool_call_id="c1")


def test_tool_result_binds_content_and_id():
    msg = tool_result("the output", "call_9")
    assert msg.content == "the output"
    assert msg.tool_call_id == "call_9"


def test_messages_are_immutable():
    msg = user("hello")
    with pytest.raises(AttributeError):
        msg.content = "changed"


def test_validate_history_accepts_linked_results():
    call = ToolCall("c1", "read_file", "{}")
    history = [
        system("s"),
        user("u"),
        assistant("a", (call,)),
        tool_result("data", "c1"),
    ]
    validate_history(history)


def test_validate_history_rejects_unknown_call_id():
    history = [system("s"), tool_result("data", "never-issued")]
    with pytest.raises(ValueError, match="unknown call id"):
        validate_history(history)


def test_validate_history_rejects_result_before_call():
    call = ToolCall("c1", "read_file", "{}")
    history = [tool_result("data", "c1"), assistant("a", (call,))]
    with pytest.raises(ValueError, match="unknown call id"):
        validate_history(history)
