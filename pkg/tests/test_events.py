"""Stream construction, validation and merging."""

import numpy as np
import pytest

from evstereo.errors import HeaderMismatch, InvalidStream, UnorderedInput
from evstereo.events import (
    MAX_HEIGHT,
    MAX_WIDTH,
    EventStream,
    PolarityEvent,
    Side,
    ViolationKind,
    merge_streams,
    require_valid,
    streams_equal,
    validate_stream,
)

from conftest import make_stream, sort_events


def test_empty_stream():
    s = EventStream(64, 48, Side.LEFT)
    assert len(s) == 0
    assert list(s) == []
    assert validate_stream(s) is None


def test_from_events_roundtrip():
    events = [
        PolarityEvent(10, 3, 2, 1, Side.LEFT),
        PolarityEvent(10, 4, 2, -1, Side.LEFT),
        PolarityEvent(25, 0, 0, 1, Side.LEFT),
    ]
    s = EventStream.from_events(8, 8, Side.LEFT, events)
    assert len(s) == 3
    assert list(s) == events
    assert s.event_at(1) == events[1]


def test_column_length_mismatch_rejected():
    with pytest.raises(ValueError):
        EventStream(8, 8, Side.LEFT, t=[1, 2], x=[0], y=[0, 0],
                    polarity=[1, 1], event_side=[0, 0])


def test_resolution_caps():
    EventStream(MAX_WIDTH, MAX_HEIGHT, Side.LEFT)
    with pytest.raises(ValueError):
        EventStream(MAX_WIDTH + 1, 10, Side.LEFT)
    with pytest.raises(ValueError):
        EventStream(10, MAX_HEIGHT + 1, Side.LEFT)
    with pytest.raises(ValueError):
        EventStream(0, 10, Side.LEFT)


def test_validate_flags_out_of_order():
    s = EventStream(8, 8, Side.LEFT, t=[5, 4], x=[0, 0], y=[0, 0],
                    polarity=[1, 1], event_side=[0, 0])
    v = validate_stream(s)
    assert v is not None
    assert v.kind is ViolationKind.OUT_OF_ORDER
    assert v.index == 1
    with pytest.raises(UnorderedInput):
        require_valid(s)


def test_validate_flags_tie_order():
    # equal timestamps must sort by (side, y, x); y regresses here
    s = EventStream(8, 8, Side.LEFT, t=[5, 5], x=[0, 0], y=[3, 2],
                    polarity=[1, 1], event_side=[0, 0])
    v = validate_stream(s)
    assert v is not None and v.kind is ViolationKind.OUT_OF_ORDER


def test_validate_allows_exact_duplicates():
    # bursts repeat the full (t, side, y, x) key
    s = EventStream(8, 8, Side.LEFT, t=[5, 5, 5], x=[2, 2, 2], y=[1, 1, 1],
                    polarity=[1, 1, 1], event_side=[0, 0, 0])
    assert validate_stream(s) is None


def test_validate_flags_bounds_and_polarity():
    s = EventStream(8, 8, Side.LEFT, t=[1], x=[8], y=[0],
                    polarity=[1], event_side=[0])
    assert validate_stream(s).kind is ViolationKind.COORDINATE_OUT_OF_BOUNDS
    s = EventStream(8, 8, Side.LEFT, t=[1], x=[0], y=[0],
                    polarity=[0], event_side=[0])
    assert validate_stream(s).kind is ViolationKind.POLARITY_OUT_OF_DOMAIN
    with pytest.raises(InvalidStream):
        require_valid(s)


def test_validate_flags_side_mismatch():
    s = EventStream(8, 8, Side.LEFT, t=[1], x=[0], y=[0],
                    polarity=[1], event_side=[1])
    assert validate_stream(s).kind is ViolationKind.SIDE_MISMATCH
    # mixed headers accept both tags but nothing beyond them
    s = EventStream(8, 8, Side.MIXED, t=[1], x=[0], y=[0],
                    polarity=[1], event_side=[2])
    assert validate_stream(s).kind is ViolationKind.SIDE_MISMATCH


def test_validate_reports_earliest_violation():
    # bounds fault at index 0 beats ordering fault at index 2
    s = EventStream(8, 8, Side.LEFT, t=[5, 6, 3], x=[9, 0, 0], y=[0, 0, 0],
                    polarity=[1, 1, 1], event_side=[0, 0, 0])
    v = validate_stream(s)
    assert v.index == 0
    assert v.kind is ViolationKind.COORDINATE_OUT_OF_BOUNDS


def test_randomized_streams_validate(seed_count=20):
    for seed in range(seed_count):
        rng = np.random.default_rng(seed)
        s = make_stream(rng, 32, 24, 200, Side.RIGHT)
        assert validate_stream(s) is None


def test_merge_matches_global_sort():
    rng = np.random.default_rng(7)
    left = make_stream(rng, 40, 30, 500, Side.LEFT)
    right = make_stream(rng, 40, 30, 400, Side.RIGHT)
    merged = merge_streams(left, right)

    expected = sort_events(list(left) + list(right))
    assert merged.side is Side.MIXED
    assert list(merged) == expected
    assert validate_stream(merged) is None


def test_merge_retags_sides():
    # tags on the inputs are overruled by argument position
    raw = EventStream(8, 8, Side.RIGHT, t=[1], x=[1], y=[1],
                      polarity=[1], event_side=[1])
    merged = merge_streams(raw, raw)
    assert merged.event_side.tolist() == [0, 1]


def test_merge_rejects_mismatched_headers():
    a = EventStream(8, 8, Side.LEFT)
    b = EventStream(9, 8, Side.RIGHT)
    with pytest.raises(HeaderMismatch):
        merge_streams(a, b)


def test_merge_rejects_unordered_input():
    bad = EventStream(8, 8, Side.LEFT, t=[5, 1], x=[0, 0], y=[0, 0],
                      polarity=[1, 1], event_side=[0, 0])
    good = EventStream(8, 8, Side.RIGHT)
    with pytest.raises(UnorderedInput):
        merge_streams(bad, good)


def test_streams_equal():
    rng = np.random.default_rng(3)
    a = make_stream(rng, 16, 16, 50, Side.LEFT)
    b = EventStream(a.width, a.height, a.side, t=a.t.copy(), x=a.x.copy(),
                    y=a.y.copy(), polarity=a.polarity.copy(),
                    event_side=a.event_side.copy())
    assert streams_equal(a, b)
    b.polarity[0] = -b.polarity[0]
    assert not streams_equal(a, b)
