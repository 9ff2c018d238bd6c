"""File format roundtrips and container damage handling."""

import io as pyio
import struct

import numpy as np
import pytest

from evstereo.errors import (
    BadMagic,
    InvalidStream,
    TruncatedRecord,
    UnsupportedVersion,
)
from evstereo.events import EventStream, Side, streams_equal
from evstereo.io import (
    DSP_MAGIC,
    EVS_MAGIC,
    GT_MAGIC,
    decode_stream,
    encode_disparities,
    encode_ground_truth,
    encode_stream,
    read_disparities,
    read_disparities_text,
    read_ground_truth,
    read_stream,
    read_stream_text,
    write_disparities,
    write_disparities_text,
    write_ground_truth,
    write_stream,
    write_stream_text,
)
from evstereo.pipeline import DisparityEvent
from evstereo.simulator import GroundTruthRecord

from conftest import make_mixed_stream, make_stream


def test_header_layout_frozen():
    s = EventStream(320, 240, Side.MIXED)
    data = encode_stream(s)
    assert len(data) == 14
    magic, version, w, h, side, pad = struct.unpack("<4sHHHB3s", data)
    assert magic == EVS_MAGIC
    assert (version, w, h, side) == (1, 320, 240, 2)
    assert pad == b"\x00\x00\x00"


def test_record_sizes_frozen():
    s = EventStream(8, 8, Side.LEFT, t=[1], x=[2], y=[3],
                    polarity=[-1], event_side=[0])
    assert len(encode_stream(s)) == 14 + 16
    assert len(encode_ground_truth([GroundTruthRecord(1, 2, 3, 4, 5.0)])) == 4 + 18
    assert len(encode_disparities([DisparityEvent(1, 2, 3, 4, 5)])) == 4 + 18


def test_event_record_bytes():
    s = EventStream(8, 8, Side.LEFT, t=[0x0102030405060708], x=[0x1122],
                    y=[0x3344], polarity=[-1], event_side=[1])
    rec = encode_stream(s)[14:]
    assert rec == bytes.fromhex("0807060504030201") + \
        bytes.fromhex("2211") + bytes.fromhex("4433") + b"\xff\x01\x00\x00"


def test_stream_file_roundtrip(tmp_path):
    rng = np.random.default_rng(5)
    s = make_mixed_stream(rng, 320, 240, 700)
    path = tmp_path / "events.evs"
    write_stream(s, path)
    assert streams_equal(read_stream(path), s)


def test_stream_filelike_roundtrip():
    rng = np.random.default_rng(6)
    s = make_stream(rng, 64, 48, 100, Side.RIGHT)
    buf = pyio.BytesIO()
    write_stream(s, buf)
    buf.seek(0)
    assert streams_equal(read_stream(buf), s)


def test_empty_stream_roundtrip(tmp_path):
    s = EventStream(16, 16, Side.LEFT)
    path = tmp_path / "empty.evs"
    write_stream(s, path)
    back = read_stream(path)
    assert len(back) == 0 and back.width == 16


def test_bad_magic():
    with pytest.raises(BadMagic):
        decode_stream(b"NOPE" + b"\x00" * 10)


def test_unsupported_version():
    data = struct.pack("<4sHHHB3s", EVS_MAGIC, 2, 8, 8, 0, b"\x00" * 3)
    with pytest.raises(UnsupportedVersion):
        decode_stream(data)


def test_truncated_container():
    with pytest.raises(TruncatedRecord):
        decode_stream(b"EVS1")
    s = EventStream(8, 8, Side.LEFT, t=[1], x=[0], y=[0],
                    polarity=[1], event_side=[0])
    data = encode_stream(s)
    with pytest.raises(TruncatedRecord):
        decode_stream(data[:-3])


def test_decode_validates_by_default():
    s = EventStream(8, 8, Side.LEFT, t=[9, 1], x=[0, 0], y=[0, 0],
                    polarity=[1, 1], event_side=[0, 0])
    data = encode_stream(s)
    with pytest.raises(InvalidStream):
        decode_stream(data)
    assert len(decode_stream(data, validate=False)) == 2


def test_text_stream_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    s = make_mixed_stream(rng, 100, 80, 250)
    path = tmp_path / "events.txt"
    write_stream_text(s, str(path))
    back = read_stream_text(str(path), 100, 80, Side.MIXED)
    assert streams_equal(back, s)


def test_text_stream_comments_and_blanks(tmp_path):
    path = tmp_path / "events.txt"
    path.write_text("# header comment\n\n10 1 2 1 0\n10 1 2 -1 1\n")
    s = read_stream_text(str(path), 8, 8)
    assert len(s) == 2
    assert s.polarity.tolist() == [1, -1]


def test_text_stream_bad_field_count(tmp_path):
    path = tmp_path / "short.txt"
    path.write_text("10 1 2 1\n")
    with pytest.raises(TruncatedRecord):
        read_stream_text(str(path), 8, 8)


def test_ground_truth_roundtrip(tmp_path):
    rng = np.random.default_rng(13)
    records = [
        GroundTruthRecord(int(t), int(rng.integers(0, 64)),
                          int(rng.integers(0, 48)), int(rng.integers(0, 30)),
                          float(np.float32(rng.uniform(0.3, 5.0))))
        for t in np.sort(rng.integers(0, 10_000, size=300))
    ]
    path = tmp_path / "truth.gt"
    write_ground_truth(records, path)
    assert read_ground_truth(path) == records


def test_ground_truth_bad_magic(tmp_path):
    path = tmp_path / "truth.gt"
    path.write_bytes(b"XXXX")
    with pytest.raises(BadMagic):
        read_ground_truth(path)
    path.write_bytes(GT_MAGIC + b"\x01" * 5)
    with pytest.raises(TruncatedRecord):
        read_ground_truth(path)


def test_disparity_roundtrip(tmp_path):
    rng = np.random.default_rng(17)
    events = [
        DisparityEvent(int(t), int(rng.integers(0, 320)),
                       int(rng.integers(0, 240)), int(rng.integers(0, 64)),
                       int(rng.integers(0, 100_000)))
        for t in np.sort(rng.integers(0, 50_000, size=400))
    ]
    path = tmp_path / "out.dsp"
    write_disparities(events, path)
    assert read_disparities(path) == events


def test_disparity_bad_container(tmp_path):
    path = tmp_path / "out.dsp"
    path.write_bytes(b"DSPX")
    with pytest.raises(BadMagic):
        read_disparities(path)
    path.write_bytes(DSP_MAGIC + b"\x00" * 17)
    with pytest.raises(TruncatedRecord):
        read_disparities(path)


def test_disparity_score_overflow():
    with pytest.raises(OverflowError):
        encode_disparities([DisparityEvent(0, 0, 0, 0, 2**32)])


def test_disparity_text_roundtrip(tmp_path):
    events = [DisparityEvent(10, 5, 6, 3, 120), DisparityEvent(11, 0, 0, 0, 0)]
    path = tmp_path / "out.txt"
    write_disparities_text(events, str(path))
    assert read_disparities_text(str(path)) == events


def test_encoding_is_deterministic():
    rng = np.random.default_rng(19)
    s = make_mixed_stream(rng, 32, 32, 64)
    assert encode_stream(s) == encode_stream(s)
