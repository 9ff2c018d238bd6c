"""Binary and text serialization for event, ground-truth and disparity data.

Three little-endian binary containers, each identified by a 4-byte magic:

    EVS1  event streams     14-byte header, 16-byte records
    GTD1  ground truth      magic only, 18-byte records
    DSP1  disparity events  magic only, 18-byte records

The EVS1 header carries u16 version (currently 1), u16 width, u16 height,
u8 side (0 left, 1 right, 2 mixed) and three reserved zero bytes.  Event
records hold u64 t_us, u16 x, u16 y, i8 polarity, u8 side and two reserved
bytes.  A matching whitespace text format (one event per line) exists for
debugging and interchange.
"""

from __future__ import annotations

import os
import struct
from typing import IO, Iterable, List, Sequence, Union

import numpy as np

from .errors import BadMagic, TruncatedRecord, UnsupportedVersion
from .events import EventStream, Side, require_valid
from .pipeline import DisparityEvent
from .simulator import GroundTruthRecord

PathOrFile = Union[str, "os.PathLike[str]", IO[bytes]]

EVS_MAGIC = b"EVS1"
GT_MAGIC = b"GTD1"
DSP_MAGIC = b"DSP1"
EVS_VERSION = 1

_EVS_HEADER = struct.Struct("<4sHHHB3s")

_EVENT_DTYPE = np.dtype([
    ("t", "<u8"), ("x", "<u2"), ("y", "<u2"),
    ("p", "<i1"), ("s", "<u1"), ("pad", "<u2"),
])
_GT_DTYPE = np.dtype([
    ("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("d", "<u2"), ("depth", "<f4"),
])
_DSP_DTYPE = np.dtype([
    ("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("d", "<u2"), ("score", "<u4"),
])
assert _EVENT_DTYPE.itemsize == 16
assert _GT_DTYPE.itemsize == 18
assert _DSP_DTYPE.itemsize == 18


def _writing(dest: PathOrFile):
    if hasattr(dest, "write"):
        return dest, False
    return open(dest, "wb"), True


def _reading(src: PathOrFile):
    if hasattr(src, "read"):
        return src, False
    return open(src, "rb"), True


def encode_stream(stream: EventStream) -> bytes:
    header = _EVS_HEADER.pack(EVS_MAGIC, EVS_VERSION, stream.width,
                              stream.height, int(stream.side), b"\x00\x00\x00")
    rec = np.empty(len(stream), _EVENT_DTYPE)
    rec["t"] = stream.t
    rec["x"] = stream.x
    rec["y"] = stream.y
    rec["p"] = stream.polarity
    rec["s"] = stream.event_side
    rec["pad"] = 0
    return header + rec.tobytes()


def write_stream(stream: EventStream, dest: PathOrFile) -> None:
    f, close = _writing(dest)
    try:
        f.write(encode_stream(stream))
    finally:
        if close:
            f.close()


def decode_stream(data: bytes, validate: bool = True) -> EventStream:
    if len(data) < _EVS_HEADER.size:
        raise TruncatedRecord("file shorter than the %d-byte header" % _EVS_HEADER.size)
    magic, version, width, height, side, _ = _EVS_HEADER.unpack_from(data)
    if magic != EVS_MAGIC:
        raise BadMagic("expected %r, found %r" % (EVS_MAGIC, magic))
    if version != EVS_VERSION:
        raise UnsupportedVersion("version %d not supported" % version)
    body = data[_EVS_HEADER.size:]
    if len(body) % _EVENT_DTYPE.itemsize:
        raise TruncatedRecord(
            "payload of %d bytes is not a whole number of %d-byte records"
            % (len(body), _EVENT_DTYPE.itemsize))
    rec = np.frombuffer(body, _EVENT_DTYPE)
    stream = EventStream(width, height, Side(side),
                         t=rec["t"].copy(), x=rec["x"].copy(), y=rec["y"].copy(),
                         polarity=rec["p"].copy(), event_side=rec["s"].copy())
    if validate:
        require_valid(stream)
    return stream


def read_stream(src: PathOrFile, validate: bool = True) -> EventStream:
    """Read an EVS1 file.

    Raises BadMagic, UnsupportedVersion or TruncatedRecord on container
    damage, and UnorderedInput (or InvalidStream) when validation finds a
    malformed event sequence.
    """
    f, close = _reading(src)
    try:
        data = f.read()
    finally:
        if close:
            f.close()
    return decode_stream(data, validate=validate)


def write_stream_text(stream: EventStream, dest) -> None:
    """Write the line format ``t_us x y polarity side``, one event per line."""
    own = not hasattr(dest, "write")
    f = open(dest, "w") if own else dest
    try:
        for t, x, y, p, s in zip(stream.t.tolist(), stream.x.tolist(),
                                 stream.y.tolist(), stream.polarity.tolist(),
                                 stream.event_side.tolist()):
            f.write("%d %d %d %d %d\n" % (t, x, y, p, s))
    finally:
        if own:
            f.close()


def read_stream_text(src, width: int, height: int,
                     side: Side = Side.MIXED, validate: bool = True) -> EventStream:
    own = not hasattr(src, "read")
    f = open(src, "r") if own else src
    try:
        rows = []
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 5:
                raise TruncatedRecord("line %d: expected 5 fields, got %d"
                                      % (lineno, len(parts)))
            rows.append([int(v) for v in parts])
    finally:
        if own:
            f.close()
    cols = list(zip(*rows)) if rows else [[], [], [], [], []]
    stream = EventStream(width, height, side, t=cols[0], x=cols[1], y=cols[2],
                         polarity=cols[3], event_side=cols[4])
    if validate:
        require_valid(stream)
    return stream


def encode_ground_truth(records: Sequence[GroundTruthRecord]) -> bytes:
    rec = np.empty(len(records), _GT_DTYPE)
    if records:
        rec["t"] = [r.t_us for r in records]
        rec["x"] = [r.x for r in records]
        rec["y"] = [r.y for r in records]
        rec["d"] = [r.disparity_px for r in records]
        rec["depth"] = [r.depth_m for r in records]
    return GT_MAGIC + rec.tobytes()


def write_ground_truth(records: Sequence[GroundTruthRecord], dest: PathOrFile) -> None:
    f, close = _writing(dest)
    try:
        f.write(encode_ground_truth(records))
    finally:
        if close:
            f.close()


def read_ground_truth(src: PathOrFile) -> List[GroundTruthRecord]:
    f, close = _reading(src)
    try:
        data = f.read()
    finally:
        if close:
            f.close()
    if data[:4] != GT_MAGIC:
        raise BadMagic("expected %r, found %r" % (GT_MAGIC, data[:4]))
    body = data[4:]
    if len(body) % _GT_DTYPE.itemsize:
        raise TruncatedRecord("ground-truth payload is not a whole number of records")
    rec = np.frombuffer(body, _GT_DTYPE)
    return [GroundTruthRecord(int(t), int(x), int(y), int(d), float(z))
            for t, x, y, d, z in zip(rec["t"].tolist(), rec["x"].tolist(),
                                     rec["y"].tolist(), rec["d"].tolist(),
                                     rec["depth"].tolist())]


def encode_disparities(events: Sequence[DisparityEvent]) -> bytes:
    rec = np.empty(len(events), _DSP_DTYPE)
    if events:
        rec["t"] = [e.t_us for e in events]
        rec["x"] = [e.x for e in events]
        rec["y"] = [e.y for e in events]
        rec["d"] = [e.disparity for e in events]
        scores = [e.sad_score for e in events]
        if max(scores) >= 2**32:
            raise OverflowError("sad_score does not fit u32")
        rec["score"] = scores
    return DSP_MAGIC + rec.tobytes()


def write_disparities(events: Sequence[DisparityEvent], dest: PathOrFile) -> None:
    f, close = _writing(dest)
    try:
        f.write(encode_disparities(events))
    finally:
        if close:
            f.close()


def read_disparities(src: PathOrFile) -> List[DisparityEvent]:
    f, close = _reading(src)
    try:
        data = f.read()
    finally:
        if close:
            f.close()
    if data[:4] != DSP_MAGIC:
        raise BadMagic("expected %r, found %r" % (DSP_MAGIC, data[:4]))
    body = data[4:]
    if len(body) % _DSP_DTYPE.itemsize:
        raise TruncatedRecord("disparity payload is not a whole number of records")
    rec = np.frombuffer(body, _DSP_DTYPE)
    return [DisparityEvent(int(t), int(x), int(y), int(d), int(s))
            for t, x, y, d, s in zip(rec["t"].tolist(), rec["x"].tolist(),
                                     rec["y"].tolist(), rec["d"].tolist(),
                                     rec["score"].tolist())]


def write_disparities_text(events: Iterable[DisparityEvent], dest) -> None:
    """Write the line format ``t_us x y disparity sad_score``."""
    own = not hasattr(dest, "write")
    f = open(dest, "w") if own else dest
    try:
        for e in events:
            f.write("%d %d %d %d %d\n" % (e.t_us, e.x, e.y, e.disparity, e.sad_score))
    finally:
        if own:
            f.close()


def read_disparities_text(src) -> List[DisparityEvent]:
    own = not hasattr(src, "read")
    f = open(src, "r") if own else src
    try:
        out = []
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 5:
                raise TruncatedRecord("line %d: expected 5 fields, got %d"
                                      % (lineno, len(parts)))
            t, x, y, d, score = (int(v) for v in parts)
            out.append(DisparityEvent(t, x, y, d, score))
        return out
    finally:
        if own:
            f.close()
