import json
import os
import signal
import subprocess
import sys
import textwrap
import time

import pytest

from coder.kernel import (
    DeadKernelError,
    ExecutionContext,
    KernelLaunchError,
    KernelRegistry,
    LaunchConfig,
    default_kernel_command,
)
from coder.kernel.client import strip_ansi
from coder.kernel.connection import fresh_connection_info, load_connection_file, write_connection_file

FAST = LaunchConfig(launch_timeout=15)


@pytest.fixture(scope="module")
def shared(tmp_path_factory):
    """One long-lived kernel for the read-only execution tests."""
    wd = tmp_path_factory.mktemp("kernel-shared")
    registry = KernelRegistry(FAST)
    handle = registry.ensure(ExecutionContext(workdir=str(wd)))
    yield wd, registry, handle
    registry.shutdown_all()


# -- execution behavior ----------------------------------------------------------

def test_state_persists_across_calls(shared):
    _, _, handle = shared
    assert handle.execute("x_persist = 21").status == "ok"
    result = handle.execute("x_persist * 2")
    assert result.status == "ok"
    assert result.result == "42"


def test_execution_counter_strictly_increases(shared):
    _, _, handle = shared
    counts = [handle.execute("1").execution_count for _ in range(3)]
    assert counts == sorted(counts)
    assert len(set(counts)) == 3


def test_stdout_and_stderr_streams_captured(shared):
    _, _, handle = shared
    result = handle.execute(
        "import sys\nprint('to out')\nprint('to err', file=sys.stderr)"
    )
    assert result.status == "ok"
    assert "to out" in result.stdout
    assert "to err" in result.stderr


def test_error_reports_name_message_traceback(shared):
    _, _, handle = shared
    result = handle.execute("1/0")
    assert result.status == "error"
    assert result.error_name == "ZeroDivisionError"
    assert "division" in (result.error_message or "")
    assert result.traceback


def test_traceback_has_no_ansi_escapes(shared):
    _, _, handle = shared
    result = handle.execute("raise ValueError('colored')")
    joined = "\n".join(result.traceback)
    assert "\x1b[" not in joined


def test_files_land_in_context_workdir(shared):
    wd, _, handle = shared
    result = handle.execute("open('artifact.txt', 'w').write('made it')")
    assert result.status == "ok"
    assert (wd / "artifact.txt").read_text() == "made it"


def test_definitions_survive_an_error(shared):
    _, _, handle = shared
    handle.execute("kept = 'alive'")
    handle.execute("raise RuntimeError('boom')")
    assert handle.execute("kept").result == "'alive'"


def test_stdin_request_answered_without_hanging(shared):
    _, _, handle = shared
    result = handle.execute("got = __REQUEST_STDIN__\nrepr(got)", timeout=15)
    assert result.status == "ok"
    assert result.result is not None


def test_strip_ansi():
    assert strip_ansi("\x1b[31mred\x1b[0m plain") == "red plain"


# -- lifecycle --------------------------------------------------------------------

def test_same_context_returns_same_handle(workdir):
    registry = KernelRegistry(FAST)
    try:
        ctx = ExecutionContext(workdir=str(workdir))
        first = registry.ensure(ctx)
        second = registry.ensure(ExecutionContext(workdir=str(workdir)))
        assert first is second
        assert first.pid == second.pid
    finally:
        registry.shutdown_all()


def test_context_change_replaces_kernel(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    registry = KernelRegistry(FAST)
    try:
        first = registry.ensure(ExecutionContext(workdir=str(a)))
        second = registry.ensure(ExecutionContext(workdir=str(b)))
        assert first is not second
        assert not first.is_alive()
        assert second.is_alive()
    finally:
        registry.shutdown_all()


def test_package_set_is_part_of_the_context_key(workdir):
    ctx_plain = ExecutionContext(workdir=str(workdir))
    ctx_pkgs = ExecutionContext(workdir=str(workdir), packages=("numpy",))
    assert ctx_plain != ctx_pkgs
    assert ExecutionContext(str(workdir), ("b", "a")) == ExecutionContext(str(workdir), ("a", "b"))


def test_shutdown_is_idempotent(workdir):
    registry = KernelRegistry(FAST)
    handle = registry.ensure(ExecutionContext(workdir=str(workdir)))
    handle.shutdown()
    assert not handle.is_alive()
    handle.shutdown()
    registry.shutdown_all()


def test_shutdown_terminates_subprocess(workdir):
    registry = KernelRegistry(FAST)
    handle = registry.ensure(ExecutionContext(workdir=str(workdir)))
    pid = handle.pid
    registry.shutdown_all()
    deadline = time.monotonic() + 5
    while time.monotonic() < deadline:
        if handle.process.poll() is not None:
            break
        time.sleep(0.05)
    assert handle.process.poll() is not None, f"kernel {pid} still running"


def test_dead_kernel_raises(workdir):
    registry = KernelRegistry(FAST)
    try:
        handle = registry.ensure(ExecutionContext(workdir=str(workdir)))
        handle.process.kill()
        handle.process.wait()
        with pytest.raises(DeadKernelError):
            handle.execute("1")
    finally:
        registry.shutdown_all()


def test_execute_timeout_marks_suspect_and_restarts_on_next_ensure(workdir):
    registry = KernelRegistry(FAST)
    try:
        ctx = ExecutionContext(workdir=str(workdir))
        handle = registry.ensure(ctx)
        result = handle.execute("import time; time.sleep(30)", timeout=1.0)
        assert result.status == "error"
        assert result.error_name == "ExecutionTimeout"
        assert handle.suspect
        fresh = registry.ensure(ctx)
        assert fresh is not handle
        assert fresh.execute("2 + 2").result == "4"
    finally:
        registry.shutdown_all()


def test_unreachable_launch_command_fails_fast(workdir):
    registry = KernelRegistry(
        LaunchConfig(kernel_cmd=("/nonexistent/kernel-binary", "-f", "{connection_file}"))
    )
    start = time.monotonic()
    with pytest.raises(KernelLaunchError):
        registry.ensure(ExecutionContext(workdir=str(workdir)))
    assert time.monotonic() - start < 10


def test_crashing_launch_command_reports_stderr(workdir):
    registry = KernelRegistry(
        LaunchConfig(
            kernel_cmd=(sys.executable, "-c", "import sys; sys.exit('kernel refused to start')"),
            launch_timeout=15,
        )
    )
    with pytest.raises(KernelLaunchError, match="refused to start"):
        registry.ensure(ExecutionContext(workdir=str(workdir)))


def test_missing_workdir_rejected(tmp_path):
    registry = KernelRegistry(FAST)
    with pytest.raises(KernelLaunchError, match="working directory"):
        registry.ensure(ExecutionContext(workdir=str(tmp_path / "ghost")))


def test_singleton_under_racing_ensure_calls(workdir):
    from concurrent.futures import ThreadPoolExecutor

    registry = KernelRegistry(FAST)
    ctx = ExecutionContext(workdir=str(workdir))
    try:
        with ThreadPoolExecutor(max_workers=8) as pool:
            handles = list(pool.map(lambda _: registry.ensure(ctx), range(16)))
        assert len({id(h) for h in handles}) == 1
        assert len({h.pid for h in handles}) == 1
        assert handles[0].execute("'race ok'").result == "'race ok'"
    finally:
        registry.shutdown_all()


def test_process_exit_shuts_kernels_down(tmp_path):
    """atexit handlers must terminate any still-registered kernels."""
    script = textwrap.dedent(
        """
        import json, sys
        from coder.kernel import ExecutionContext, KernelRegistry, LaunchConfig

        registry = KernelRegistry(LaunchConfig(launch_timeout=15))
        handle = registry.ensure(ExecutionContext(workdir=sys.argv[1]))
        print(json.dumps({"pid": handle.pid}))
        """
    )
    out = subprocess.run(
        [sys.executable, "-c", script, str(tmp_path)],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert out.returncode == 0, out.stderr
    pid = json.loads(out.stdout)["pid"]
    deadline = time.monotonic() + 10
    while time.monotonic() < deadline:
        try:
            os.kill(pid, 0)
        except ProcessLookupError:
            return
        time.sleep(0.1)
    os.kill(pid, signal.SIGKILL)
    pytest.fail(f"kernel {pid} outlived the host process")


# -- launch plumbing -----------------------------------------------------------------

def test_default_kernel_command_prefers_real_kernel_else_mock():
    cmd = default_kernel_command()
    try:
        import ipykernel  # noqa: F401

        assert "ipykernel_launcher" in " ".join(cmd)
    except ImportError:
        assert "coder.kernel.mock" in " ".join(cmd)
    assert "{connection_file}" in cmd


def test_package_wrapper_command_construction(tmp_path):
    config = LaunchConfig(kernel_cmd=("kern", "-f", "{connection_file}"))
    ctx = ExecutionContext(workdir=str(tmp_path), packages=("pandas", "cpmpy"))
    cmd = config.build_command(ctx, "/tmp/conn.json")
    assert cmd == [
        "uv", "run", "--with", "cpmpy", "--with", "pandas", "--",
        "kern", "-f", "/tmp/conn.json",
    ]


def test_no_packages_means_no_wrapper(tmp_path):
    config = LaunchConfig(kernel_cmd=("kern", "-f", "{connection_file}"))
    ctx = ExecutionContext(workdir=str(tmp_path))
    assert config.build_command(ctx, "c.json") == ["kern", "-f", "c.json"]


def test_connection_file_round_trip(tmp_path):
    info = fresh_connection_info()
    assert len(info.key) == 32  # 16 random bytes, hex
    path = write_connection_file(info, tmp_path)
    assert load_connection_file(path) == info
    data = json.loads(path.read_text())
    assert data["signature_scheme"] == "hmac-sha256"
    assert {"shell_port", "iopub_port", "stdin_port", "control_port", "hb_port"} <= set(data)


def test_fresh_connection_keys_are_unique():
    keys = {fresh_connection_info().key for _ in range(5)}
    assert len(keys) == 5
