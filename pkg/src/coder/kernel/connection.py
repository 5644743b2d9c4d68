"""Kernel connection files: transport, five ports, auth key."""

from __future__ import annotations

import json
import secrets
import socket
from dataclasses import asdict, dataclass
from pathlib import Path

CHANNELS = ("shell", "iopub", "stdin", "control", "hb")


@dataclass(frozen=True)
class ConnectionInfo:
    shell_port: int
    iopub_port: int
    stdin_port: int
    control_port: int
    hb_port: int
    transport: str = "tcp"
    ip: str = "127.0.0.1"
    key: str = ""
    signature_scheme: str = "hmac-sha256"
    kernel_name: str = "python3"

    def key_bytes(self) -> bytes:
        return self.key.encode("ascii")

    def url(self, channel: str) -> str:
        port = getattr(self, f"{channel}_port")
        return f"{self.transport}://{self.ip}:{port}"


def pick_free_ports(count: int) -> list[int]:
    """Bind ephemeral sockets to reserve distinct free ports, then release them.

    Racy by nature; the window between release and kernel bind is accepted,
    matching standard practice for kernel launches.
    """
    socks = []
    ports = []
    try:
        for _ in range(count):
            s = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            s.bind(("127.0.0.1", 0))
            socks.append(s)
            ports.append(s.getsockname()[1])
    finally:
        for s in socks:
            s.close()
    return ports


def fresh_connection_info(key: str | None = None, kernel_name: str = "python3") -> ConnectionInfo:
    shell, iopub, stdin, control, hb = pick_free_ports(5)
    return ConnectionInfo(
        shell_port=shell,
        iopub_port=iopub,
        stdin_port=stdin,
        control_port=control,
        hb_port=hb,
        key=key if key is not None else secrets.token_hex(16),
        kernel_name=kernel_name,
    )


def write_connection_file(info: ConnectionInfo, directory: Path | str) -> Path:
    path = Path(directory) / "connection.json"
    path.write_text(json.dumps(asdict(info), indent=2), encoding="utf-8")
    return path


def load_connection_file(path: Path | str) -> ConnectionInfo:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return ConnectionInfo(
        shell_port=doc["shell_port"],
        iopub_port=doc["iopub_port"],
        stdin_port=doc["stdin_port"],
        control_port=doc["control_port"],
        hb_port=doc["hb_port"],
        transport=doc.get("transport", "tcp"),
        ip=doc.get("ip", "127.0.0.1"),
        key=doc.get("key", ""),
        signature_scheme=doc.get("signature_scheme", "hmac-sha256"),
        kernel_name=doc.get("kernel_name", "python3"),
    )
