"""Self-describing container for one compressed image.

Layout (little-endian)::

    magic     4s   b"RDC1"
    version   u8
    config    u64  identity hash of the model config
    height    u16  original (unpadded) height
    width     u16  original (unpadded) width
    z_len     u32, z payload
    y_len     u32, y payload
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from ..errors import DecodeError

MAGIC = b"RDC1"
VERSION = 1
_HEAD = struct.Struct("<4sBQHH")
_LEN = struct.Struct("<I")
HEADER_BYTES = _HEAD.size + 2 * _LEN.size


@dataclass(frozen=True)
class Bitstream:
    config_hash: int
    orig_height: int
    orig_width: int
    z_payload: bytes
    y_payload: bytes
    version: int = VERSION

    def to_bytes(self) -> bytes:
        if not (0 < self.orig_height < 1 << 16 and 0 < self.orig_width < 1 << 16):
            raise ValueError("image dimensions must fit in u16")
        return b"".join([
            _HEAD.pack(MAGIC, self.version, self.config_hash, self.orig_height, self.orig_width),
            _LEN.pack(len(self.z_payload)), self.z_payload,
            _LEN.pack(len(self.y_payload)), self.y_payload,
        ])

    def __len__(self) -> int:
        return HEADER_BYTES + len(self.z_payload) + len(self.y_payload)

    @property
    def payload_bytes(self) -> int:
        return len(self.z_payload) + len(self.y_payload)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Bitstream":
        if len(data) < _HEAD.size + _LEN.size:
            raise DecodeError("stream too short for a header")
        magic, version, config_hash, h, w = _HEAD.unpack_from(data, 0)
        if magic != MAGIC:
            raise DecodeError(f"bad magic {magic!r}")
        if version != VERSION:
            raise DecodeError(f"unsupported bitstream version {version}")
        pos = _HEAD.size
        payloads = []
        for name in ("z", "y"):
            if pos + _LEN.size > len(data):
                raise DecodeError(f"truncated before {name} payload length")
            (n,) = _LEN.unpack_from(data, pos)
            pos += _LEN.size
            if pos + n > len(data):
                raise DecodeError(f"{name} payload truncated: need {n} bytes, have {len(data) - pos}")
            payloads.append(bytes(data[pos:pos + n]))
            pos += n
        if pos != len(data):
            raise DecodeError(f"{len(data) - pos} trailing bytes after payloads")
        return cls(config_hash, h, w, payloads[0], payloads[1], version)
