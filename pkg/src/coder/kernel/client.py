"""Execute round-trips against a live kernel over the five-channel protocol.

One client drives one kernel. Requests go out on the shell channel;
broadcasts published between the matching busy and idle status messages are
collected from iopub and folded into an ExecutionResult. Kernel-initiated
stdin requests are answered with an immediate empty reply (the agent is
non-interactive).
"""

from __future__ import annotations

import logging
import re
import time
import uuid
from dataclasses import dataclass

import zmq

from ..errors import CoderError
from .connection import ConnectionInfo
from .wire import WireMessage, decode_wire, encode_wire, new_header

logger = logging.getLogger(__name__)

_ANSI = re.compile(r"\x1b\[[0-9;?]*[ -/]*[@-~]")

POLL_TICK_MS = 50


class KernelError(CoderError):
    pass


class ExecuteTimeoutError(KernelError):
    """The kernel did not finish within the deadline; it is marked suspect."""


class DeadKernelError(KernelError):
    """The kernel transport is closed or the subprocess is gone."""


def strip_ansi(text: str) -> str:
    return _ANSI.sub("", text)


@dataclass(frozen=True)
class ExecutionResult:
    status: str  # "ok" | "error"
    stdout: str = ""
    stderr: str = ""
    result: str | None = None
    error_name: str | None = None
    error_message: str | None = None
    traceback: tuple[str, ...] = ()
    execution_count: int = 0

    def __post_init__(self) -> None:
        if self.status == "ok" and (
            self.error_name or self.error_message or self.traceback
        ):
            raise ValueError("ok results carry no error fields")


class KernelClient:
    def __init__(self, info: ConnectionInfo, session: str | None = None):
        self.info = info
        self.session = session or uuid.uuid4().hex
        self._key = info.key_bytes()
        self._ctx = zmq.Context()
        identity = self.session.encode("ascii")

        self._shell = self._dealer(info.url("shell"), identity)
        self._control = self._dealer(info.url("control"), identity)
        self._stdin = self._dealer(info.url("stdin"), identity)
        self._iopub = self._ctx.socket(zmq.SUB)
        self._iopub.setsockopt(zmq.LINGER, 0)
        self._iopub.setsockopt(zmq.SUBSCRIBE, b"")
        self._iopub.connect(info.url("iopub"))
        self._hb_url = info.url("hb")
        self._hb = self._req(self._hb_url)
        self._closed = False

    def _dealer(self, url: str, identity: bytes) -> zmq.Socket:
        sock = self._ctx.socket(zmq.DEALER)
        sock.setsockopt(zmq.LINGER, 0)
        sock.setsockopt(zmq.IDENTITY, identity)
        sock.connect(url)
        return sock

    def _req(self, url: str) -> zmq.Socket:
        sock = self._ctx.socket(zmq.REQ)
        sock.setsockopt(zmq.LINGER, 0)
        sock.connect(url)
        return sock

    # -- plumbing -------------------------------------------------------------

    def _send(self, sock: zmq.Socket, msg: WireMessage) -> None:
        if self._closed:
            raise DeadKernelError("client is closed")
        sock.send_multipart(encode_wire(msg, self._key))

    def _recv(self, sock: zmq.Socket) -> WireMessage:
        return decode_wire(sock.recv_multipart(), self._key)

    def _request(self, msg_type: str, content: dict) -> WireMessage:
        msg = WireMessage(header=new_header(msg_type, self.session), content=content)
        self._send(self._shell, msg)
        return msg

    # -- lifecycle ------------------------------------------------------------

    def wait_ready(self, timeout: float = 30.0, process=None) -> dict:
        """Kernel-info round-trip; also confirms the iopub subscription.

        Requests are re-sent periodically to ride out the SUB slow-joiner
        window. When the kernel subprocess is passed in, its early death
        cuts the wait short. Returns the kernel_info_reply content.
        """
        deadline = time.monotonic() + timeout
        poller = zmq.Poller()
        poller.register(self._shell, zmq.POLLIN)
        poller.register(self._iopub, zmq.POLLIN)
        sent: set[str] = set()
        reply_content: dict | None = None
        iopub_confirmed = False
        next_send = 0.0

        while time.monotonic() < deadline:
            if process is not None and process.poll() is not None:
                raise DeadKernelError(
                    f"kernel exited with code {process.returncode} during startup"
                )
            now = time.monotonic()
            # Keep probing until the SUB socket has demonstrably joined;
            # each probe makes the kernel publish fresh status broadcasts.
            if now >= next_send and (reply_content is None or not iopub_confirmed):
                req = self._request("kernel_info_request", {})
                sent.add(req.msg_id)
                next_send = now + 1.0
            events = dict(poller.poll(POLL_TICK_MS))
            if self._shell in events:
                msg = self._recv(self._shell)
                if msg.msg_type == "kernel_info_reply" and msg.parent_id in sent:
                    reply_content = msg.content
            if self._iopub in events:
                msg = self._recv(self._iopub)
                if msg.parent_id in sent or msg.msg_type == "status":
                    iopub_confirmed = True
            if reply_content is not None and iopub_confirmed:
                return reply_content
        raise ExecuteTimeoutError(f"kernel not ready within {timeout}s")

    def heartbeat(self, timeout: float = 1.0) -> bool:
        try:
            self._hb.send(b"ping")
            if self._hb.poll(int(timeout * 1000)):
                self._hb.recv()
                return True
        except zmq.ZMQError:
            pass
        # REQ sockets wedge after an unanswered send; rebuild for next probe.
        self._hb.close(0)
        self._hb = self._req(self._hb_url)
        return False

    def shutdown_request(self, timeout: float = 5.0) -> bool:
        """Best-effort shutdown on the control channel."""
        try:
            msg = WireMessage(
                header=new_header("shutdown_request", self.session),
                content={"restart": False},
            )
            self._send(self._control, msg)
            deadline = time.monotonic() + timeout
            while time.monotonic() < deadline:
                if self._control.poll(POLL_TICK_MS):
                    reply = self._recv(self._control)
                    if reply.msg_type == "shutdown_reply":
                        return True
        except (zmq.ZMQError, DeadKernelError):
            pass
        return False

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        for sock in (self._shell, self._iopub, self._control, self._stdin, self._hb):
            sock.close(0)
        self._ctx.term()

    # -- execution --------------------------------------------------------------

    def execute_collect(
        self, code: str, timeout: float = 120.0
    ) -> tuple[WireMessage, WireMessage, list[WireMessage]]:
        """Low-level round-trip: returns (request, execute_reply, iopub messages).

        Collection runs until both the reply and the idle status broadcast
        matching this request have arrived. Only broadcasts parented to the
        request are collected.
        """
        request = WireMessage(
            header=new_header("execute_request", self.session),
            content={
                "code": code,
                "silent": False,
                "store_history": True,
                "user_expressions": {},
                "allow_stdin": True,
                "stop_on_error": False,
            },
        )
        self._send(self._shell, request)

        poller = zmq.Poller()
        poller.register(self._shell, zmq.POLLIN)
        poller.register(self._iopub, zmq.POLLIN)
        poller.register(self._stdin, zmq.POLLIN)

        reply: WireMessage | None = None
        collected: list[WireMessage] = []
        idle_seen = False
        deadline = time.monotonic() + timeout

        while time.monotonic() < deadline:
            events = dict(poller.poll(POLL_TICK_MS))
            if self._stdin in events:
                req = self._recv(self._stdin)
                if req.msg_type == "input_request":
                    self._send(self._stdin, WireMessage(
                        header=new_header("input_reply", self.session),
                        parent_header=req.header,
                        content={"value": ""},
                    ))
            if self._iopub in events:
                msg = self._recv(self._iopub)
                if msg.parent_id != request.msg_id:
                    continue
                collected.append(msg)
                if msg.msg_type == "status" and msg.content.get("execution_state") == "idle":
                    idle_seen = True
            if self._shell in events:
                msg = self._recv(self._shell)
                if msg.msg_type == "execute_reply" and msg.parent_id == request.msg_id:
                    reply = msg
            if reply is not None and idle_seen:
                return request, reply, collected
        raise ExecuteTimeoutError(f"execution did not finish within {timeout}s")

    def execute(self, code: str, timeout: float = 120.0) -> ExecutionResult:
        _, reply, iopub = self.execute_collect(code, timeout)

        stdout_parts: list[str] = []
        stderr_parts: list[str] = []
        result_text: str | None = None
        error_name = error_message = None
        traceback: tuple[str, ...] = ()
        execution_count = 0

        for msg in iopub:
            kind = msg.msg_type
            if kind == "stream":
                target = stdout_parts if msg.content.get("name") == "stdout" else stderr_parts
                target.append(msg.content.get("text", ""))
            elif kind == "execute_result":
                result_text = msg.content.get("data", {}).get("text/plain")
                execution_count = msg.content.get("execution_count", execution_count)
            elif kind == "error":
                error_name = msg.content.get("ename")
                error_message = strip_ansi(msg.content.get("evalue", ""))
                traceback = tuple(strip_ansi(l) for l in msg.content.get("traceback", []))

        status = reply.content.get("status", "error")
        execution_count = reply.content.get("execution_count", execution_count)
        if status != "ok" and error_name is None:
            # error detail may only be on the reply (e.g. aborted)
            error_name = reply.content.get("ename", status)
            error_message = strip_ansi(reply.content.get("evalue", ""))
            traceback = tuple(strip_ansi(l) for l in reply.content.get("traceback", []))

        return ExecutionResult(
            status="ok" if status == "ok" else "error",
            stdout="".join(stdout_parts),
            stderr="".join(stderr_parts),
            result=result_text,
            error_name=error_name if status != "ok" else None,
            error_message=error_message if status != "ok" else None,
            traceback=traceback if status != "ok" else (),
            execution_count=execution_count,
        )
