import json

import pytest

from coder.gateway import ModelTurn
from coder.messages import ToolCall


@pytest.fixture
def workdir(tmp_path):
    wd = tmp_path / "work"
    wd.mkdir()
    return wd


def make_call(name: str, call_id: str = "call_0", **args) -> ToolCall:
    return ToolCall(call_id, name, json.dumps(args))


def turn(text: str = "", calls: tuple = (), tokens: tuple[int, int] = (100, 10)) -> ModelTurn:
    return ModelTurn(
        text=text, tool_calls=tuple(calls),
        input_tokens=tokens[0], output_tokens=tokens[1],
    )


@pytest.fixture
def call_factory():
    return make_call


@pytest.fixture
def turn_factory():
    return turn
