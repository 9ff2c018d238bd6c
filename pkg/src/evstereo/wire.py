"""Three-word wire packets used at every stage boundary.

Layout (little-endian when serialized):

    word0  u32  timestamp in microseconds
    word1  u32  bit 31 = side, bits 16..30 = y, bits 0..15 = x
    word2  i32  payload: polarity for raw events, polarity sum or level
                value for downstream stage packets

The stream-termination sentinel is the packet whose three words are all the
two's-complement encoding of -1.  Valid events can never collide with it
because y is capped one short of the 15-bit maximum.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import CoordinateOverflow, PayloadOverflow, TimestampOverflow
from .events import EventStream, PolarityEvent, Side

_U32 = 0xFFFFFFFF
MAX_T = 2**32
MAX_X = 2**16
MAX_Y = 2**15 - 1  # one below the field max so the sentinel stays unique


class WirePacket(NamedTuple):
    word0: int
    word1: int
    word2: int


class EventPayload(NamedTuple):
    """Decoded packet: side-tagged coordinates plus a signed payload."""

    t_us: int
    x: int
    y: int
    side: Side
    payload: int

    def as_polarity_event(self) -> PolarityEvent:
        if self.payload not in (-1, 1):
            raise PayloadOverflow("payload %d is not a polarity" % self.payload)
        return PolarityEvent(self.t_us, self.x, self.y, self.payload, self.side)


SENTINEL = WirePacket(_U32, _U32, -1)


def sentinel() -> WirePacket:
    return SENTINEL


def is_sentinel(packet: WirePacket) -> bool:
    return (packet.word0 == _U32 and packet.word1 == _U32
            and (packet.word2 == -1 or packet.word2 == _U32))


def pack_payload(t_us: int, x: int, y: int, side: Side, payload: int) -> WirePacket:
    if not 0 <= t_us < MAX_T:
        raise TimestampOverflow("t_us %d outside [0, 2^32)" % t_us)
    if not 0 <= x < MAX_X:
        raise CoordinateOverflow("x %d outside [0, 2^16)" % x)
    if not 0 <= y < MAX_Y:
        raise CoordinateOverflow("y %d outside [0, 2^15 - 1)" % y)
    if not -(2**31) <= payload < 2**31:
        raise PayloadOverflow("payload %d outside signed 32-bit range" % payload)
    word1 = ((int(side) & 1) << 31) | (y << 16) | x
    return WirePacket(t_us, word1, payload)


def pack_event(e: PolarityEvent) -> WirePacket:
    return pack_payload(e.t_us, e.x, e.y, e.side, e.polarity)


def unpack_event(packet: WirePacket) -> EventPayload | None:
    """Decode a packet; the sentinel decodes to None."""
    if is_sentinel(packet):
        return None
    w1 = packet.word1 & _U32
    side = Side((w1 >> 31) & 1)
    y = (w1 >> 16) & 0x7FFF
    x = w1 & 0xFFFF
    payload = packet.word2
    if payload > 0x7FFFFFFF:
        payload -= 1 << 32
    return EventPayload(packet.word0 & _U32, x, y, side, payload)


def pack_stream_words(stream: EventStream) -> np.ndarray:
    """Pack a whole stream into an (n, 3) uint32 word array.

    Row i holds the same three words pack_event would produce for event i,
    with word2 stored two's-complement.  Used by the batched and channel
    execution variants, which hand whole arrays across stage boundaries.
    """
    n = len(stream)
    if n and int(stream.t.max()) >= MAX_T:
        raise TimestampOverflow("stream contains timestamps >= 2^32 us")
    if n and int(stream.y.max()) >= MAX_Y:
        raise CoordinateOverflow("stream contains y >= 2^15 - 1")
    words = np.empty((n, 3), np.uint32)
    words[:, 0] = stream.t.astype(np.uint32)
    words[:, 1] = (
        (stream.event_side.astype(np.uint32) << np.uint32(31))
        | (stream.y.astype(np.uint32) << np.uint32(16))
        | stream.x.astype(np.uint32)
    )
    words[:, 2] = stream.polarity.astype(np.int32).view(np.uint32)
    return words


def unpack_words(words: np.ndarray):
    """Inverse of pack_stream_words; returns (t, x, y, side, payload) arrays."""
    w = np.asarray(words, np.uint32).reshape(-1, 3)
    t = w[:, 0].astype(np.uint64)
    x = (w[:, 1] & np.uint32(0xFFFF)).astype(np.uint16)
    y = ((w[:, 1] >> np.uint32(16)) & np.uint32(0x7FFF)).astype(np.uint16)
    side = (w[:, 1] >> np.uint32(31)).astype(np.uint8)
    payload = w[:, 2].view(np.int32)
    return t, x, y, side, payload
