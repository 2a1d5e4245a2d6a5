"""Carry-less range coder over 64-bit state.

Bytes are emitted once the top byte of ``low`` and ``low + range`` agree; if
the range collapses below ``BOT`` without that happening, it is shrunk to
the next byte boundary (the carry-less trick). With a 64-bit state the range
never drops under 2**48, so dividing by a 16-bit total loses well under a
millionth of a bit per symbol.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from ..errors import DecodeError, EncodeError

PRECISION = 16
TOP = 1 << 56
BOT = 1 << 48
MASK = (1 << 64) - 1
STATE_BYTES = 8


class RangeEncoder:
    def __init__(self):
        self.low = 0
        self.range = MASK
        self.out = bytearray()

    def encode(self, cum: int, freq: int, precision: int = PRECISION) -> None:
        r = self.range >> precision
        self.low += r * cum
        self.range = r * freq
        while True:
            if (self.low ^ (self.low + self.range)) >= TOP:
                if self.range >= BOT:
                    break
                self.range = -self.low & (BOT - 1)
            self.out.append(self.low >> 56)
            self.low = (self.low << 8) & MASK
            self.range = (self.range << 8) & MASK

    def encode_bits(self, value: int, nbits: int) -> None:
        """Write ``nbits`` raw bits, 16 at a time."""
        while nbits > 0:
            take = min(nbits, PRECISION)
            nbits -= take
            self.encode((value >> nbits) & ((1 << take) - 1), 1, take)

    def finish(self) -> bytes:
        for _ in range(STATE_BYTES):
            self.out.append(self.low >> 56)
            self.low = (self.low << 8) & MASK
        return bytes(self.out)


class RangeDecoder:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.low = 0
        self.range = MASK
        self.code = 0
        for _ in range(STATE_BYTES):
            self.code = (self.code << 8) | self._byte()

    def _byte(self) -> int:
        if self.pos >= len(self.data):
            raise DecodeError("range decoder ran past the end of the payload (truncated stream)")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def peek(self, precision: int = PRECISION) -> int:
        self._r = self.range >> precision
        v = (self.code - self.low) // self._r
        if v >= (1 << precision):
            raise DecodeError("corrupt payload: decoded value outside the coding interval")
        return v

    def consume(self, cum: int, freq: int) -> None:
        self.low += self._r * cum
        self.range = self._r * freq
        while True:
            if (self.low ^ (self.low + self.range)) >= TOP:
                if self.range >= BOT:
                    break
                self.range = -self.low & (BOT - 1)
            self.code = ((self.code << 8) & MASK) | self._byte()
            self.low = (self.low << 8) & MASK
            self.range = (self.range << 8) & MASK

    def decode_bits(self, nbits: int) -> int:
        value = 0
        while nbits > 0:
            take = min(nbits, PRECISION)
            nbits -= take
            v = self.peek(take)
            self.consume(v, 1)
            value = (value << take) | v
        return value

    def at_end(self) -> bool:
        return self.pos == len(self.data)


@dataclass
class CdfTable:
    """Quantized CDF for one distribution.

    ``cdf`` has ``n + 1`` non-decreasing entries from 0 to ``2**precision``
    covering values ``lo .. lo + n - 1``; when ``escape`` is set the last
    bin is an escape symbol for values outside that span.
    """

    cdf: np.ndarray
    lo: int
    escape: bool = True
    precision: int = PRECISION

    def __post_init__(self):
        self.cdf = np.asarray(self.cdf, dtype=np.uint32)
        self._list = [int(c) for c in self.cdf]

    @property
    def num_values(self) -> int:
        return len(self.cdf) - 1 - (1 if self.escape else 0)

    def probability(self, index: int) -> float:
        return (self._list[index + 1] - self._list[index]) / (1 << self.precision)

    def to_bytes(self) -> bytes:
        return self.cdf.astype("<u4").tobytes()


def _encode_escape(enc: RangeEncoder, magnitude: int, negative: bool) -> None:
    # sign bit, then Elias-gamma of magnitude + 1
    enc.encode_bits(int(negative), 1)
    # unary prefix one bit at a time, mirroring how the decoder reads it
    n = magnitude + 1
    width = n.bit_length()
    for _ in range(width - 1):
        enc.encode_bits(0, 1)
    enc.encode_bits(1, 1)
    enc.encode_bits(n & ((1 << (width - 1)) - 1), width - 1)


def _decode_escape(dec: RangeDecoder) -> tuple[int, bool]:
    negative = bool(dec.decode_bits(1))
    zeros = 0
    while dec.decode_bits(1) == 0:
        zeros += 1
        if zeros > 62:
            raise DecodeError("corrupt escape code")
    n = (1 << zeros) | dec.decode_bits(zeros)
    return n - 1, negative


def encode_value(enc: RangeEncoder, value: int, table: CdfTable) -> None:
    idx = value - table.lo
    cdf = table._list
    if 0 <= idx < table.num_values:
        enc.encode(cdf[idx], cdf[idx + 1] - cdf[idx], table.precision)
        return
    if not table.escape:
        raise EncodeError(f"value {value} outside table support [{table.lo}, {table.lo + table.num_values - 1}]")
    e = table.num_values
    enc.encode(cdf[e], cdf[e + 1] - cdf[e], table.precision)
    if idx < 0:
        _encode_escape(enc, -idx - 1, True)
    else:
        _encode_escape(enc, idx - table.num_values, False)


def decode_value(dec: RangeDecoder, table: CdfTable) -> int:
    cdf = table._list
    v = dec.peek(table.precision)
    idx = bisect_right(cdf, v) - 1
    if idx >= len(cdf) - 1:
        raise DecodeError("corrupt payload: value beyond the table")
    dec.consume(cdf[idx], cdf[idx + 1] - cdf[idx])
    if table.escape and idx == table.num_values:
        magnitude, negative = _decode_escape(dec)
        if negative:
            return table.lo - 1 - magnitude
        return table.lo + table.num_values + magnitude
    return table.lo + idx


def range_encode(symbols, cdf_tables, indices) -> bytes:
    """Encode integer ``symbols``; symbol k uses ``cdf_tables[indices[k]]``."""
    if len(symbols) != len(indices):
        raise EncodeError("symbols and indices differ in length")
    enc = RangeEncoder()
    for s, i in zip(symbols, indices):
        encode_value(enc, int(s), cdf_tables[i])
    return enc.finish()


def range_decode(data: bytes, cdf_tables, indices, count: int) -> list[int]:
    if len(indices) != count:
        raise DecodeError("indices must give one table per symbol")
    dec = RangeDecoder(data)
    return [decode_value(dec, cdf_tables[i]) for i in indices]
