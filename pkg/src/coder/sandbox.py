"""Working-directory confinement for all file tools.

Every path the agent names is resolved against the session working
directory. Resolution canonicalizes existing ancestors (following symlinks)
and lexically normalizes the non-existing remainder; anything that lands
outside the working directory is rejected, including absolute paths, ``..``
traversals, and symlinks created inside the workdir that point outside it.
"""

from __future__ import annotations

from pathlib import Path

from .errors import CoderError


class SandboxError(CoderError):
    """Base class for path confinement failures."""

    kind = "path-escape"


class PathEscapeError(SandboxError):
    kind = "path-escape"


class InvalidPathError(SandboxError):
    kind = "invalid-path"


def resolve_sandbox_path(workdir: Path | str, candidate: str) -> Path:
    """Resolve ``candidate`` inside ``workdir`` or raise.

    Relative candidates resolve against the workdir. The returned path is
    fully canonical for every existing ancestor; a non-existing tail is
    normalized lexically. Raises PathEscapeError when the canonical result
    leaves the workdir and InvalidPathError for unencodable input.
    """
    if not isinstance(candidate, str):
        raise InvalidPathError(f"path must be a string, got {type(candidate).__name__}")
    if "\x00" in candidate:
        raise InvalidPathError("path contains a NUL byte")
    try:
        candidate.encode("utf-8")
    except UnicodeEncodeError as exc:
        raise InvalidPathError(f"path is not valid UTF-8: {exc}") from exc

    base = Path(workdir)
    if not base.is_dir():
        raise InvalidPathError(f"working directory {base} does not exist")
    base = base.resolve()

    raw = Path(candidate)
    target = raw if raw.is_absolute() else base / raw
    try:
        resolved = target.resolve()
    except (OSError, RuntimeError) as exc:  # symlink loops raise OSError(ELOOP)
        raise InvalidPathError(f"cannot resolve {candidate!r}: {exc}") from exc

    if resolved != base and base not in resolved.parents:
        raise PathEscapeError(f"{candidate!r} resolves outside the working directory")
    return resolved


def validate_glob_pattern(pattern: str) -> str:
    """Reject glob patterns that could reach outside the workdir."""
    if not isinstance(pattern, str) or not pattern:
        raise InvalidPathError("pattern must be a non-empty string")
    if "\x00" in pattern:
        raise InvalidPathError("pattern contains a NUL byte")
    if Path(pattern).is_absolute():
        raise PathEscapeError(f"absolute pattern {pattern!r} not allowed")
    if ".." in Path(pattern).parts:
        raise PathEscapeError(f"pattern {pattern!r} contains a parent-directory segment")
    return pattern
