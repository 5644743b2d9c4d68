"""Signed multipart framing for the kernel wire protocol (v5.3).

On the wire a message is ``[identities..., <IDS|MSG>, signature, header,
parent_header, metadata, content]``. The signature is an HMAC-SHA256 digest
over the four serialized JSON frames; an empty key means no authentication
and an empty signature. Decoding verifies the signature over the raw bytes
before parsing, so any tampering of a signed frame surfaces as a signature
mismatch rather than a parse error.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Sequence

from ..errors import CoderError

DELIMITER = b"<IDS|MSG>"
PROTOCOL_VERSION = "5.3"


class WireError(CoderError):
    pass


class MalformedFrameError(WireError):
    pass


class SignatureMismatchError(WireError):
    pass


@dataclass(frozen=True)
class WireMessage:
    header: dict
    parent_header: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    content: dict = field(default_factory=dict)
    identities: tuple[bytes, ...] = ()
    # Filled by decode with what was on the wire; excluded from equality so
    # decode(encode(m)) == m holds regardless of the signing key.
    signature: str = field(default="", compare=False)

    @property
    def msg_type(self) -> str:
        return self.header.get("msg_type", "")

    @property
    def msg_id(self) -> str:
        return self.header.get("msg_id", "")

    @property
    def parent_id(self) -> str:
        return self.parent_header.get("msg_id", "")


def new_header(msg_type: str, session: str, username: str = "coder") -> dict:
    return {
        "msg_id": uuid.uuid4().hex,
        "msg_type": msg_type,
        "session": session,
        "username": username,
        "version": PROTOCOL_VERSION,
        "date": datetime.now(timezone.utc).isoformat(),
    }


def sign_frames(key: bytes, frames: Sequence[bytes]) -> str:
    """Lowercase hex HMAC-SHA256 over the concatenated frames; '' for empty key."""
    if not key:
        return ""
    mac = hmac.new(key, digestmod=hashlib.sha256)
    for frame in frames:
        mac.update(frame)
    return mac.hexdigest()


def _dump(obj: dict) -> bytes:
    return json.dumps(obj, ensure_ascii=False).encode("utf-8")


def encode_wire(msg: WireMessage, key: bytes) -> list[bytes]:
    frames = [
        _dump(msg.header),
        _dump(msg.parent_header),
        _dump(msg.metadata),
        _dump(msg.content),
    ]
    signature = sign_frames(key, frames)
    return [*msg.identities, DELIMITER, signature.encode("ascii"), *frames]


def decode_wire(frames: Sequence[bytes], key: bytes) -> WireMessage:
    """Parse and verify one multipart message.

    Extra frames after the content (protocol buffers) are tolerated and
    ignored; they are not part of the signed region.
    """
    frames = list(frames)
    try:
        delim = frames.index(DELIMITER)
    except ValueError:
        raise MalformedFrameError("missing <IDS|MSG> delimiter frame") from None
    identities = tuple(frames[:delim])
    rest = frames[delim + 1:]
    if len(rest) < 5:
        raise MalformedFrameError(
            f"expected signature plus four frames after delimiter, got {len(rest)}"
        )
    try:
        signature = rest[0].decode("ascii")
    except UnicodeDecodeError:
        raise MalformedFrameError("signature frame is not ASCII hex") from None

    signed = rest[1:5]
    if key:
        expected = sign_frames(key, signed)
        if not hmac.compare_digest(signature, expected):
            raise SignatureMismatchError(
                f"signature {signature[:16]}... does not match frame content"
            )

    try:
        header, parent, metadata, content = (json.loads(f.decode("utf-8")) for f in signed)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedFrameError(f"unparsable JSON frame: {exc}") from exc
    for name, obj in (("header", header), ("parent_header", parent),
                      ("metadata", metadata), ("content", content)):
        if not isinstance(obj, dict):
            raise MalformedFrameError(f"{name} frame is not a JSON object")
    return WireMessage(
        header=header,
        parent_header=parent,
        metadata=metadata,
        content=content,
        identities=identities,
        signature=signature,
    )
