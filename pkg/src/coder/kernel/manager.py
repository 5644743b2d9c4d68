"""Kernel subprocess lifecycle: launch, readiness, singleton registry, shutdown.

A kernel is keyed by its ExecutionContext (working directory + package set).
A registry holds at most one live kernel at a time; asking for a different
context shuts the old kernel down first. Launches with a non-empty package
set are wrapped in a configurable ephemeral-environment command.
"""

from __future__ import annotations

import atexit
import importlib.util
import os
import subprocess
import sys
import tempfile
import threading
import weakref
from dataclasses import dataclass, field

from .client import (
    DeadKernelError,
    ExecuteTimeoutError,
    ExecutionResult,
    KernelClient,
    KernelError,
)
from .connection import ConnectionInfo, fresh_connection_info, write_connection_file

DEFAULT_LAUNCH_TIMEOUT = 30.0
DEFAULT_EXECUTE_TIMEOUT = 120.0


class KernelLaunchError(KernelError):
    """Kernel subprocess failed to start or never became ready."""


@dataclass(frozen=True)
class ExecutionContext:
    """Singleton key: where code runs and which extra packages it needs."""

    workdir: str
    packages: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "workdir", os.path.abspath(self.workdir))
        object.__setattr__(self, "packages", tuple(sorted(self.packages)))


@dataclass(frozen=True)
class LaunchConfig:
    """How to start a kernel. Command tokens may contain the placeholders
    {connection_file} and {python}; the env wrapper's {with_flags} token
    expands to one flag pair per package."""

    kernel_cmd: tuple[str, ...] = ()
    env_wrapper: tuple[str, ...] = ("uv", "run", "{with_flags}", "--")
    package_flag: str = "--with"
    launch_timeout: float = DEFAULT_LAUNCH_TIMEOUT

    def resolved_kernel_cmd(self) -> tuple[str, ...]:
        return self.kernel_cmd or default_kernel_command()

    def build_command(self, ctx: ExecutionContext, connection_file: str) -> list[str]:
        cmd = [
            token.replace("{connection_file}", connection_file)
            .replace("{python}", sys.executable)
            for token in self.resolved_kernel_cmd()
        ]
        if not ctx.packages:
            return cmd
        wrapped: list[str] = []
        for token in self.env_wrapper:
            if token == "{with_flags}":
                for pkg in ctx.packages:
                    wrapped.extend([self.package_flag, pkg])
            else:
                wrapped.append(token)
        return wrapped + cmd


def default_kernel_command() -> tuple[str, ...]:
    """Prefer a real interactive kernel; fall back to the built-in peer."""
    if importlib.util.find_spec("ipykernel") is not None:
        return ("{python}", "-m", "ipykernel_launcher", "-f", "{connection_file}")
    return ("{python}", "-m", "coder.kernel.mock", "-f", "{connection_file}")


class KernelHandle:
    """One live kernel subprocess plus its connected client.

    execute() is serialized by a per-handle lock: one in-flight request.
    """

    def __init__(
        self,
        context: ExecutionContext,
        info: ConnectionInfo,
        process: subprocess.Popen,
        client: KernelClient,
        tmpdir: tempfile.TemporaryDirectory,
    ):
        self.context = context
        self.info = info
        self.process = process
        self.client = client
        self.suspect = False
        self._tmpdir = tmpdir
        self._lock = threading.Lock()
        self._closed = False

    @property
    def pid(self) -> int:
        return self.process.pid

    def is_alive(self) -> bool:
        return not self._closed and self.process.poll() is None

    def execute(self, code: str, timeout: float = DEFAULT_EXECUTE_TIMEOUT) -> ExecutionResult:
        with self._lock:
            if not self.is_alive():
                raise DeadKernelError("kernel process is not running")
            try:
                return self.client.execute(code, timeout=timeout)
            except ExecuteTimeoutError as exc:
                self.suspect = True
                return ExecutionResult(
                    status="error",
                    error_name="ExecutionTimeout",
                    error_message=str(exc),
                    traceback=(str(exc),),
                )

    def shutdown(self, grace: float = 5.0) -> None:
        """Best-effort, idempotent: polite request, then terminate, then kill."""
        if self._closed:
            return
        self._closed = True
        try:
            if self.process.poll() is None:
                self.client.shutdown_request(timeout=min(grace, 5.0))
        except Exception:
            pass
        try:
            if self.process.poll() is None:
                self.process.terminate()
                try:
                    self.process.wait(timeout=grace)
                except subprocess.TimeoutExpired:
                    self.process.kill()
                    self.process.wait(timeout=grace)
        except Exception:
            pass
        try:
            self.client.close()
        except Exception:
            pass
        try:
            self._tmpdir.cleanup()
        except Exception:
            pass


class KernelRegistry:
    """Thread-safe single-slot kernel pool.

    ensure() returns the live kernel when the context matches and the kernel
    is healthy; otherwise it replaces it. At most one kernel is live per
    registry at any instant.
    """

    def __init__(self, config: LaunchConfig | None = None):
        self.config = config or LaunchConfig()
        self._lock = threading.RLock()
        self._current: KernelHandle | None = None
        _REGISTRIES.add(self)

    def ensure(self, ctx: ExecutionContext) -> KernelHandle:
        if not os.path.isdir(ctx.workdir):
            raise KernelLaunchError(f"working directory does not exist: {ctx.workdir}")
        with self._lock:
            current = self._current
            if (
                current is not None
                and current.context == ctx
                and current.is_alive()
                and not current.suspect
            ):
                return current
            if current is not None:
                current.shutdown()
                self._current = None
            handle = self._launch(ctx)
            self._current = handle
            return handle

    def current(self) -> KernelHandle | None:
        with self._lock:
            return self._current

    def shutdown_all(self) -> None:
        with self._lock:
            if self._current is not None:
                self._current.shutdown()
                self._current = None

    def _launch(self, ctx: ExecutionContext) -> KernelHandle:
        tmpdir = tempfile.TemporaryDirectory(prefix="coder-kernel-")
        info = fresh_connection_info()
        connection_file = write_connection_file(info, tmpdir.name)
        command = self.config.build_command(ctx, str(connection_file))
        stderr_path = os.path.join(tmpdir.name, "kernel-stderr.log")
        try:
            with open(stderr_path, "wb") as stderr_sink:
                process = subprocess.Popen(
                    command,
                    cwd=ctx.workdir,
                    stdin=subprocess.DEVNULL,
                    stdout=subprocess.DEVNULL,
                    stderr=stderr_sink,
                    env=os.environ.copy(),
                )
        except OSError as exc:
            tmpdir.cleanup()
            raise KernelLaunchError(f"cannot launch kernel command {command}: {exc}") from exc

        client = KernelClient(info)
        try:
            client.wait_ready(timeout=self.config.launch_timeout, process=process)
        except KernelError as exc:
            detail = _tail(stderr_path)
            client.close()
            if process.poll() is None:
                process.kill()
                process.wait()
            tmpdir.cleanup()
            suffix = f"; kernel stderr: {detail}" if detail else ""
            raise KernelLaunchError(f"{exc}{suffix}") from exc
        return KernelHandle(ctx, info, process, client, tmpdir)


def _tail(path: str, limit: int = 2000) -> str:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError:
        return ""
    return data[-limit:].decode("utf-8", errors="replace").strip()


_REGISTRIES: "weakref.WeakSet[KernelRegistry]" = weakref.WeakSet()


@atexit.register
def _shutdown_registries() -> None:
    for registry in list(_REGISTRIES):
        try:
            registry.shutdown_all()
        except Exception:
            pass
