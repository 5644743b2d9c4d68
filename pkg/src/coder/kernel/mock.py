"""Built-in kernel peer speaking the v5.3 wire format.

Used by the test suite as the protocol counterparty and as a fallback
runtime when no full interactive kernel is installed. It executes code in a
persistent namespace inside its own process: stdout/stderr are captured as
stream broadcasts, a trailing expression becomes an execute_result, and
exceptions become error broadcasts plus an error reply.

Run as: python -m coder.kernel.mock -f /path/to/connection.json
"""

from __future__ import annotations

import argparse
import ast
import contextlib
import io
import signal
import sys
import traceback
import uuid

import zmq

from .connection import load_connection_file
from .wire import WireMessage, decode_wire, encode_wire, new_header

STDIN_MARKER = "__REQUEST_STDIN__"


def run_cell(code: str, namespace: dict) -> tuple[str, str, str | None, dict | None]:
    """Execute one cell; returns (stdout, stderr, result_repr, error_info)."""
    out, err = io.StringIO(), io.StringIO()
    result_repr: str | None = None
    error: dict | None = None
    try:
        tree = ast.parse(code, mode="exec")
    except SyntaxError:
        etype, evalue, _ = sys.exc_info()
        return "", "", None, {
            "ename": etype.__name__ if etype else "SyntaxError",
            "evalue": str(evalue),
            "traceback": traceback.format_exc().splitlines(),
        }

    trailing = None
    if tree.body and isinstance(tree.body[-1], ast.Expr):
        trailing = ast.Expression(tree.body.pop(-1).value)

    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            if tree.body:
                exec(compile(tree, "<cell>", "exec"), namespace)
            if trailing is not None:
                value = eval(compile(trailing, "<cell>", "eval"), namespace)
                if value is not None:
                    result_repr = repr(value)
    except BaseException as exc:  # noqa: BLE001 - cell errors become observations
        error = {
            "ename": type(exc).__name__,
            "evalue": str(exc),
            "traceback": traceback.format_exception(type(exc), exc, exc.__traceback__),
        }
    return out.getvalue(), err.getvalue(), result_repr, error


class MockKernel:
    def __init__(self, info):
        self.info = info
        self.key = info.key_bytes()
        self.session = uuid.uuid4().hex
        self.namespace: dict = {"__name__": "__main__"}
        self.execution_count = 0
        self._running = True

        self.ctx = zmq.Context()
        self.shell = self._bind(zmq.ROUTER, info.url("shell"))
        self.control = self._bind(zmq.ROUTER, info.url("control"))
        self.stdin = self._bind(zmq.ROUTER, info.url("stdin"))
        self.iopub = self._bind(zmq.PUB, info.url("iopub"))
        self.hb = self._bind(zmq.REP, info.url("hb"))

    def _bind(self, kind: int, url: str) -> zmq.Socket:
        sock = self.ctx.socket(kind)
        sock.setsockopt(zmq.LINGER, 0)
        sock.bind(url)
        return sock

    # -- send helpers -----------------------------------------------------------

    def _reply(self, sock: zmq.Socket, parent: WireMessage, msg_type: str, content: dict) -> None:
        msg = WireMessage(
            header=new_header(msg_type, self.session, username="kernel"),
            parent_header=parent.header,
            content=content,
            identities=parent.identities,
        )
        sock.send_multipart(encode_wire(msg, self.key))

    def _publish(self, parent: WireMessage, msg_type: str, content: dict) -> None:
        msg = WireMessage(
            header=new_header(msg_type, self.session, username="kernel"),
            parent_header=parent.header,
            content=content,
        )
        self.iopub.send_multipart(encode_wire(msg, self.key))

    def _status(self, parent: WireMessage, state: str) -> None:
        self._publish(parent, "status", {"execution_state": state})

    # -- request handling ---------------------------------------------------------

    def handle_shell(self, msg: WireMessage) -> None:
        if msg.msg_type == "kernel_info_request":
            self._status(msg, "busy")
            self._reply(self.shell, msg, "kernel_info_reply", {
                "status": "ok",
                "protocol_version": "5.3",
                "implementation": "coder-mock",
                "implementation_version": "0.1.0",
                "language_info": {"name": "python", "version": sys.version.split()[0]},
                "banner": "coder mock kernel",
            })
            self._status(msg, "idle")
        elif msg.msg_type == "execute_request":
            self.handle_execute(msg)
        else:
            self._reply(self.shell, msg, f"{msg.msg_type.rsplit('_', 1)[0]}_reply",
                        {"status": "error", "ename": "UnknownMessage", "evalue": msg.msg_type})

    def handle_execute(self, msg: WireMessage) -> None:
        code = msg.content.get("code", "")
        self.execution_count += 1
        self._status(msg, "busy")
        self._publish(msg, "execute_input",
                      {"code": code, "execution_count": self.execution_count})

        if STDIN_MARKER in code and msg.content.get("allow_stdin"):
            code = code.replace(STDIN_MARKER, repr(self._request_input(msg)))

        stdout, stderr, result_repr, error = run_cell(code, self.namespace)

        if stdout:
            self._publish(msg, "stream", {"name": "stdout", "text": stdout})
        if stderr:
            self._publish(msg, "stream", {"name": "stderr", "text": stderr})
        if result_repr is not None:
            self._publish(msg, "execute_result", {
                "data": {"text/plain": result_repr},
                "metadata": {},
                "execution_count": self.execution_count,
            })
        if error is not None:
            self._publish(msg, "error", error)
            reply = {"status": "error", "execution_count": self.execution_count, **error}
        else:
            reply = {"status": "ok", "execution_count": self.execution_count,
                     "user_expressions": {}}
        self._reply(self.shell, msg, "execute_reply", reply)
        self._status(msg, "idle")

    def _request_input(self, parent: WireMessage) -> str:
        """Kernel-initiated stdin round-trip; routed by the caller's identity."""
        msg = WireMessage(
            header=new_header("input_request", self.session, username="kernel"),
            parent_header=parent.header,
            content={"prompt": "", "password": False},
            identities=parent.identities,
        )
        self.stdin.send_multipart(encode_wire(msg, self.key))
        if self.stdin.poll(5000):
            reply = decode_wire(self.stdin.recv_multipart(), self.key)
            return reply.content.get("value", "")
        return ""

    def handle_control(self, msg: WireMessage) -> None:
        if msg.msg_type == "shutdown_request":
            self._status(msg, "busy")
            self._reply(self.control, msg, "shutdown_reply",
                        {"status": "ok", "restart": msg.content.get("restart", False)})
            self._status(msg, "idle")
            self._running = False

    # -- main loop ------------------------------------------------------------------

    def serve(self) -> None:
        poller = zmq.Poller()
        for sock in (self.shell, self.control, self.hb):
            poller.register(sock, zmq.POLLIN)
        while self._running:
            events = dict(poller.poll(100))
            if self.hb in events:
                self.hb.send(self.hb.recv())
            if self.control in events:
                self.handle_control(decode_wire(self.control.recv_multipart(), self.key))
            if self.shell in events:
                self.handle_shell(decode_wire(self.shell.recv_multipart(), self.key))

    def close(self) -> None:
        for sock in (self.shell, self.control, self.stdin, self.iopub, self.hb):
            sock.close(0)
        self.ctx.term()


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="built-in wire-protocol kernel")
    parser.add_argument("-f", "--connection-file", required=True)
    args = parser.parse_args(argv)

    info = load_connection_file(args.connection_file)
    kernel = MockKernel(info)

    def _terminate(signum, frame):
        kernel._running = False

    signal.signal(signal.SIGTERM, _terminate)
    signal.signal(signal.SIGINT, _terminate)
    try:
        kernel.serve()
    finally:
        kernel.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
