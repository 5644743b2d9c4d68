"""Client for the persistent interactive compute kernel.

Speaks the Jupyter messaging protocol v5.3 over ZeroMQ: signed multipart
frames on five channels (shell, iopub, control, stdin, heartbeat). The
client is kernel-agnostic; ``coder.kernel.mock`` is a built-in peer speaking
the exact wire format, used by the test suite and as a fallback runtime.
"""

from .client import (
    DeadKernelError,
    ExecuteTimeoutError,
    ExecutionResult,
    KernelClient,
    KernelError,
)
from .connection import ConnectionInfo, load_connection_file, write_connection_file
from .manager import (
    ExecutionContext,
    KernelHandle,
    KernelLaunchError,
    KernelRegistry,
    LaunchConfig,
    default_kernel_command,
)
from .wire import (
    DELIMITER,
    MalformedFrameError,
    SignatureMismatchError,
    WireMessage,
    decode_wire,
    encode_wire,
    new_header,
    sign_frames,
)

__all__ = [
    "ConnectionInfo",
    "DeadKernelError",
    "DELIMITER",
    "ExecuteTimeoutError",
    "ExecutionContext",
    "ExecutionResult",
    "KernelClient",
    "KernelError",
    "KernelHandle",
    "KernelLaunchError",
    "KernelRegistry",
    "LaunchConfig",
    "MalformedFrameError",
    "SignatureMismatchError",
    "WireMessage",
    "decode_wire",
    "default_kernel_command",
    "encode_wire",
    "load_connection_file",
    "new_header",
    "sign_frames",
    "write_connection_file",
]
