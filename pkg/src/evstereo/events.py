"""Address-event types and stream-level operations.

Events carry a microsecond timestamp, pixel coordinates, a polarity of +1
(brighter) or -1 (darker) and the camera side they came from.  Streams keep
events in columnar numpy arrays so simulation, validation and file I/O stay
vectorized; per-event views are materialized only where a consumer needs
them.

Ordering convention used everywhere: events sort by timestamp, equal
timestamps by side (Left before Right), then row y, then column x.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import HeaderMismatch, UnorderedInput

# resolution caps keep every coordinate packable in the wire word layout
# and the u16 header fields
MAX_WIDTH = 65535
MAX_HEIGHT = 32767


class Side(enum.IntEnum):
    """Camera side tag.  MIXED marks a merged stream header."""

    LEFT = 0
    RIGHT = 1
    MIXED = 2


class PolarityEvent(NamedTuple):
    t_us: int
    x: int
    y: int
    polarity: int
    side: Side


class ViolationKind(enum.Enum):
    OUT_OF_ORDER = "out_of_order"
    COORDINATE_OUT_OF_BOUNDS = "coordinate_out_of_bounds"
    POLARITY_OUT_OF_DOMAIN = "polarity_out_of_domain"
    SIDE_MISMATCH = "side_mismatch"


class StreamViolation(NamedTuple):
    index: int
    kind: ViolationKind
    message: str


def _as_array(values, dtype):
    arr = np.asarray(values, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError("event columns must be one-dimensional")
    return arr


@dataclass
class EventStream:
    """A time-ordered event stream with its camera geometry header.

    Column arrays always have equal length.  ``side`` in the header states
    which camera produced the stream; the per-event ``event_side`` column
    carries the tag that survives merging.
    """

    width: int
    height: int
    side: Side
    t: np.ndarray = field(default_factory=lambda: np.empty(0, np.uint64))
    x: np.ndarray = field(default_factory=lambda: np.empty(0, np.uint16))
    y: np.ndarray = field(default_factory=lambda: np.empty(0, np.uint16))
    polarity: np.ndarray = field(default_factory=lambda: np.empty(0, np.int8))
    event_side: np.ndarray = field(default_factory=lambda: np.empty(0, np.uint8))

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise ValueError("width must lie in [1, %d]" % MAX_WIDTH)
        if not 1 <= self.height <= MAX_HEIGHT:
            raise ValueError("height must lie in [1, %d]" % MAX_HEIGHT)
        self.side = Side(self.side)
        self.t = _as_array(self.t, np.uint64)
        self.x = _as_array(self.x, np.uint16)
        self.y = _as_array(self.y, np.uint16)
        self.polarity = _as_array(self.polarity, np.int8)
        self.event_side = _as_array(self.event_side, np.uint8)
        n = len(self.t)
        if not all(len(c) == n for c in (self.x, self.y, self.polarity, self.event_side)):
            raise ValueError("event columns have mismatched lengths")

    @classmethod
    def from_events(cls, width: int, height: int, side: Side,
                    events: Sequence[PolarityEvent]) -> "EventStream":
        return cls(
            width, height, side,
            t=[e.t_us for e in events],
            x=[e.x for e in events],
            y=[e.y for e in events],
            polarity=[e.polarity for e in events],
            event_side=[int(e.side) for e in events],
        )

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[PolarityEvent]:
        for t, x, y, p, s in zip(self.t.tolist(), self.x.tolist(),
                                 self.y.tolist(), self.polarity.tolist(),
                                 self.event_side.tolist()):
            yield PolarityEvent(t, x, y, p, Side(s))

    def event_at(self, i: int) -> PolarityEvent:
        return PolarityEvent(int(self.t[i]), int(self.x[i]), int(self.y[i]),
                             int(self.polarity[i]), Side(int(self.event_side[i])))


def streams_equal(a: EventStream, b: EventStream) -> bool:
    return (
        a.width == b.width and a.height == b.height and a.side == b.side
        and np.array_equal(a.t, b.t) and np.array_equal(a.x, b.x)
        and np.array_equal(a.y, b.y) and np.array_equal(a.polarity, b.polarity)
        and np.array_equal(a.event_side, b.event_side)
    )


def validate_stream(stream: EventStream) -> StreamViolation | None:
    """Check ordering, coordinate bounds and polarity domain.

    Returns the first violation in stream order, or None for a valid
    stream.  Ordering means nondecreasing timestamps with equal-time ties
    sorted by (side, y, x); bounds come from the stream header.
    """
    n = len(stream)
    if n == 0:
        return None

    bad_x = stream.x >= stream.width
    bad_y = stream.y >= stream.height
    bad_p = np.abs(stream.polarity.astype(np.int16)) != 1
    if stream.side != Side.MIXED:
        bad_s = stream.event_side != int(stream.side)
    else:
        bad_s = stream.event_side > 1

    first_bound = None
    for mask, kind, msg in (
        (bad_x, ViolationKind.COORDINATE_OUT_OF_BOUNDS, "x out of bounds"),
        (bad_y, ViolationKind.COORDINATE_OUT_OF_BOUNDS, "y out of bounds"),
        (bad_p, ViolationKind.POLARITY_OUT_OF_DOMAIN, "polarity not in {-1, +1}"),
        (bad_s, ViolationKind.SIDE_MISMATCH, "event side disagrees with header"),
    ):
        hits = np.flatnonzero(mask)
        if hits.size and (first_bound is None or hits[0] < first_bound[0]):
            first_bound = (int(hits[0]), kind, msg)

    if n > 1:
        t0, t1 = stream.t[:-1], stream.t[1:]
        s0, s1 = stream.event_side[:-1], stream.event_side[1:]
        y0, y1 = stream.y[:-1], stream.y[1:]
        x0, x1 = stream.x[:-1], stream.x[1:]
        eq_t = t0 == t1
        eq_s = s0 == s1
        eq_y = y0 == y1
        ok = (
            (t1 > t0)
            | (eq_t & (s1 > s0))
            | (eq_t & eq_s & (y1 > y0))
            | (eq_t & eq_s & eq_y & (x1 >= x0))
        )
        bad = np.flatnonzero(~ok)
        if bad.size:
            idx = int(bad[0]) + 1
            if first_bound is None or idx < first_bound[0]:
                first_bound = (idx, ViolationKind.OUT_OF_ORDER,
                               "event order regresses at index %d" % idx)

    if first_bound is None:
        return None
    return StreamViolation(first_bound[0], first_bound[1], first_bound[2])


def require_valid(stream: EventStream) -> None:
    """Raise InvalidStream (UnorderedInput for ordering faults) on violation."""
    from .errors import InvalidStream

    v = validate_stream(stream)
    if v is None:
        return
    if v.kind is ViolationKind.OUT_OF_ORDER:
        raise UnorderedInput(v.message, violation=v)
    raise InvalidStream("%s at index %d" % (v.message, v.index), violation=v)


def merge_streams(left: EventStream, right: EventStream) -> EventStream:
    """Merge a left and right stream into one canonically ordered stream.

    Ties at equal timestamps break Left before Right, then (y, x).  Events
    are retagged from the argument they came from, so a stream passed as
    ``left`` contributes Left-tagged events regardless of its own tags.

    Raises:
        HeaderMismatch: stream dimensions differ.
        UnorderedInput: either input is not time-ordered.
    """
    if (left.width, left.height) != (right.width, right.height):
        raise HeaderMismatch(
            "cannot merge %dx%d with %dx%d"
            % (left.width, left.height, right.width, right.height))
    for s, name in ((left, "left"), (right, "right")):
        v = validate_stream(s)
        if v is not None and v.kind is ViolationKind.OUT_OF_ORDER:
            raise UnorderedInput("%s input: %s" % (name, v.message), violation=v)

    nl = len(left)
    t = np.concatenate([left.t, right.t])
    x = np.concatenate([left.x, right.x])
    y = np.concatenate([left.y, right.y])
    p = np.concatenate([left.polarity, right.polarity])
    s = np.empty(len(t), np.uint8)
    s[:nl] = int(Side.LEFT)
    s[nl:] = int(Side.RIGHT)

    # lexsort keys run least-significant first; stability keeps burst order.
    order = np.lexsort((x, y, s, t))
    return EventStream(left.width, left.height, Side.MIXED,
                       t=t[order], x=x[order], y=y[order],
                       polarity=p[order], event_side=s[order])
