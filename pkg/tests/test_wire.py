"""Wire packet packing, unpacking and the sentinel."""

import numpy as np
import pytest

from evstereo.errors import (
    CoordinateOverflow,
    PayloadOverflow,
    TimestampOverflow,
)
from evstereo.events import PolarityEvent, Side
from evstereo.wire import (
    MAX_T,
    MAX_X,
    MAX_Y,
    SENTINEL,
    is_sentinel,
    pack_event,
    pack_payload,
    pack_stream_words,
    sentinel,
    unpack_event,
    unpack_words,
)

from conftest import make_mixed_stream


def test_single_event_roundtrip():
    e = PolarityEvent(123456, 319, 239, -1, Side.RIGHT)
    p = pack_event(e)
    back = unpack_event(p)
    assert back is not None
    assert back.as_polarity_event() == e


def test_word1_bit_layout():
    p = pack_payload(0, 0x1234, 0x0ABC, Side.RIGHT, 7)
    assert p.word1 == (1 << 31) | (0x0ABC << 16) | 0x1234
    p = pack_payload(0, 0, 0, Side.LEFT, 7)
    assert p.word1 == 0


def test_boundary_values_roundtrip():
    corners = [
        (0, 0, 0, Side.LEFT, -(2**31)),
        (MAX_T - 1, MAX_X - 1, MAX_Y - 1, Side.RIGHT, 2**31 - 1),
        (1, MAX_X - 1, 0, Side.LEFT, 0),
        (MAX_T - 1, 0, MAX_Y - 1, Side.LEFT, -1),
    ]
    for t, x, y, side, payload in corners:
        back = unpack_event(pack_payload(t, x, y, side, payload))
        assert (back.t_us, back.x, back.y, back.side, back.payload) == \
            (t, x, y, side, payload)


def test_out_of_range_rejected():
    with pytest.raises(TimestampOverflow):
        pack_payload(MAX_T, 0, 0, Side.LEFT, 1)
    with pytest.raises(TimestampOverflow):
        pack_payload(-1, 0, 0, Side.LEFT, 1)
    with pytest.raises(CoordinateOverflow):
        pack_payload(0, MAX_X, 0, Side.LEFT, 1)
    with pytest.raises(CoordinateOverflow):
        pack_payload(0, 0, MAX_Y, Side.LEFT, 1)
    with pytest.raises(PayloadOverflow):
        pack_payload(0, 0, 0, Side.LEFT, 2**31)


def test_sentinel_identity():
    assert sentinel() == SENTINEL
    assert is_sentinel(SENTINEL)
    assert unpack_event(SENTINEL) is None
    # both encodings of the all-ones payload word count
    assert is_sentinel(SENTINEL._replace(word2=0xFFFFFFFF))


def test_sentinel_near_misses():
    full = 0xFFFFFFFF
    assert not is_sentinel(SENTINEL._replace(word0=0))
    assert not is_sentinel(SENTINEL._replace(word1=full - 1))
    assert not is_sentinel(SENTINEL._replace(word2=1))
    # the closest reachable event: everything maxed except y, which the
    # packer caps one short of the field maximum
    closest = pack_payload(MAX_T - 1, MAX_X - 1, MAX_Y - 1, Side.RIGHT, -1)
    assert not is_sentinel(closest)


def test_random_roundtrips():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        t = int(rng.integers(0, MAX_T))
        x = int(rng.integers(0, MAX_X))
        y = int(rng.integers(0, MAX_Y))
        side = Side(int(rng.integers(0, 2)))
        payload = int(rng.integers(-(2**31), 2**31))
        back = unpack_event(pack_payload(t, x, y, side, payload))
        assert (back.t_us, back.x, back.y, back.side, back.payload) == \
            (t, x, y, side, payload)


def test_negative_payload_decodes_from_unsigned_word():
    p = pack_payload(5, 1, 1, Side.LEFT, -9)
    raw = p._replace(word2=p.word2 & 0xFFFFFFFF)
    assert unpack_event(raw).payload == -9


def test_polarity_conversion_guard():
    back = unpack_event(pack_payload(0, 0, 0, Side.LEFT, 3))
    with pytest.raises(PayloadOverflow):
        back.as_polarity_event()


def test_vectorized_pack_matches_scalar():
    rng = np.random.default_rng(23)
    stream = make_mixed_stream(rng, 320, 240, 300)
    words = pack_stream_words(stream)
    assert words.shape == (len(stream), 3)
    assert words.dtype == np.uint32
    for i, e in enumerate(stream):
        p = pack_event(e)
        assert words[i, 0] == p.word0
        assert words[i, 1] == p.word1
        assert int(words[i, 2].view(np.int32)) == p.word2


def test_vectorized_unpack_roundtrip():
    rng = np.random.default_rng(29)
    stream = make_mixed_stream(rng, 640, 480, 500)
    t, x, y, side, payload = unpack_words(pack_stream_words(stream))
    assert np.array_equal(t, stream.t)
    assert np.array_equal(x, stream.x)
    assert np.array_equal(y, stream.y)
    assert np.array_equal(side, stream.event_side)
    assert np.array_equal(payload, stream.polarity.astype(np.int32))
