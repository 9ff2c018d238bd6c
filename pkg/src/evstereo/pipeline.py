"""Event-driven stereo pipeline: aggregation, level frames, SAD matching.

Raw polarity events are first folded into per-pixel aggregates.  Each pixel
buffers a running polarity sum; the buffer entry is flushed once the pixel
has been silent for longer than the deadline, observed lazily when newer
events arrive.  Flushed aggregates update a per-side integration frame of
signed 32-bit levels, and every left-side level update triggers a disparity
search along the same row of the right frame.

The matcher minimizes the sum of absolute level differences over a square
window of radius B, scanning candidate disparities 0..min(d_max, x) and
keeping the smallest candidate on ties.  Window samples outside the frame
read the border pixel (coordinates clamp, never wrap).  All arithmetic is
integer, so results are exactly reproducible; the inner search runs as a
compiled numba kernel with an early-abort bound that cannot change the
selected minimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from .errors import (
    CoordinateOutOfBounds,
    DimensionMismatch,
    NonPositiveInput,
    OutOfOrderEvent,
)
from .events import EventStream, PolarityEvent, Side, require_valid


class AggregatedEvent(NamedTuple):
    t_us: int  # timestamp of the last raw event folded in
    x: int
    y: int
    polarity_sum: int
    side: Side


class LevelEvent(NamedTuple):
    t_us: int
    x: int
    y: int
    level: int
    side: Side


class DisparityEvent(NamedTuple):
    t_us: int
    x: int
    y: int
    disparity: int
    sad_score: int


@dataclass
class MatchConfig:
    """Tunables for aggregation and matching.

    window_radius is the B in a (2B+1)^2 SAD window, d_max the largest
    candidate disparity, deadline_us the silence gap after which a pixel's
    aggregate is considered finished.
    """

    window_radius: int = 3
    d_max: int = 63
    deadline_us: int = 10_000

    def __post_init__(self):
        if self.window_radius < 0:
            raise NonPositiveInput("window radius must be >= 0")
        if self.d_max < 0:
            raise NonPositiveInput("d_max must be >= 0")
        if self.deadline_us < 0:
            raise NonPositiveInput("deadline must be >= 0")

    def check_geometry(self, width: int, height: int) -> None:
        if self.d_max >= width:
            raise DimensionMismatch(
                "d_max %d does not fit a %d-pixel-wide frame" % (self.d_max, width))
        if 2 * self.window_radius + 1 > min(width, height):
            raise DimensionMismatch(
                "window of radius %d does not fit a %dx%d frame"
                % (self.window_radius, width, height))


_SIDE_OF = (Side.LEFT, Side.RIGHT)
_NO_FLUSH: Tuple = ()


class AggregatorState:
    """Deadline-flushed per-pixel polarity accumulator for both sides.

    Entries live in a dict keyed side<<31 | y<<16 | x (field widths make
    numeric key order equal (side, y, x) order) whose insertion order
    tracks last-update time: every touch reinserts the entry at the back,
    and pushed timestamps never decrease, so the front of the dict always
    holds the stalest entries.  A push first flushes every entry whose
    last update lies more than the deadline before the new event, in
    (last_t, side, y, x) order, then folds the event in.  Sums that cancel
    to zero are still emitted; silence itself is information downstream.
    """

    __slots__ = ("deadline_us", "_buf", "_now")

    def __init__(self, deadline_us: int):
        if deadline_us < 0:
            raise NonPositiveInput("deadline must be >= 0")
        self.deadline_us = deadline_us
        self._buf: dict = {}
        self._now = -1

    def __len__(self) -> int:
        return len(self._buf)

    @property
    def current_time(self) -> int:
        return self._now

    def push(self, e: PolarityEvent) -> Sequence[AggregatedEvent]:
        return self.push_raw(e.t_us, e.x, e.y, e.polarity, int(e.side))

    def push_raw(self, t: int, x: int, y: int, polarity: int,
                 side: int) -> Sequence[AggregatedEvent]:
        out = self.push_packed(t, x, y, polarity, side)
        if not out:
            return _NO_FLUSH
        return [AggregatedEvent(lt, k & 0xFFFF, (k >> 16) & 0x7FFF,
                                s, _SIDE_OF[k >> 31])
                for lt, k, s in out]

    def push_packed(self, t: int, x: int, y: int, polarity: int,
                    side: int) -> Sequence[Tuple[int, int, int]]:
        """push_raw with flushes as raw (last_t, key, sum) triples.

        The key is the internal side<<31 | y<<16 | x packing, which hot
        paths can forward or store without rebuilding per-flush tuples.
        """
        buf = self._buf
        out: Sequence[Tuple[int, int, int]] = _NO_FLUSH
        if t != self._now:
            if t < self._now:
                raise OutOfOrderEvent(
                    "event at %d us pushed after time %d us" % (t, self._now))
            self._now = t
            # expiry compares last_t against t only, so entries can newly
            # expire only when t advances; same-t pushes skip the scan
            if buf:
                deadline = self.deadline_us
                expired = []
                for key, ent in buf.items():
                    if ent[1] + deadline < t:
                        expired.append((ent[1], key, ent[0]))
                    else:
                        break  # entries further back are newer
                if expired:
                    for _, key, _ in expired:
                        del buf[key]
                    expired.sort()
                    out = expired

        key = side << 31 | y << 16 | x
        ent = buf.pop(key, None)
        if ent is None:
            buf[key] = [polarity, t]
        else:
            ent[0] += polarity
            ent[1] = t
            buf[key] = ent
        return out

    def flush_all(self) -> List[AggregatedEvent]:
        """Drain every remaining entry in (last_t, side, y, x) order."""
        return [AggregatedEvent(lt, k & 0xFFFF, (k >> 16) & 0x7FFF,
                                s, _SIDE_OF[k >> 31])
                for lt, k, s in self.flush_packed()]

    def flush_packed(self) -> List[Tuple[int, int, int]]:
        items = [(ent[1], key, ent[0]) for key, ent in self._buf.items()]
        items.sort()
        self._buf.clear()
        return items


class LevelFrames:
    """Pair of signed 32-bit integration frames, one per camera side."""

    __slots__ = ("left", "right")

    def __init__(self, left: np.ndarray, right: np.ndarray):
        left = np.asarray(left)
        right = np.asarray(right)
        if left.ndim != 2 or left.shape != right.shape:
            raise DimensionMismatch(
                "level frames must share a 2-D shape, got %r and %r"
                % (left.shape, right.shape))
        if left.dtype != np.int32 or right.dtype != np.int32:
            raise DimensionMismatch("level frames must be int32")
        self.left = left
        self.right = right

    @classmethod
    def zeros(cls, width: int, height: int) -> "LevelFrames":
        if width <= 0 or height <= 0:
            raise DimensionMismatch("frame size must be positive")
        return cls(np.zeros((height, width), np.int32),
                   np.zeros((height, width), np.int32))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.left.shape

    def frame(self, side: Side) -> np.ndarray:
        return self.left if side == Side.LEFT else self.right

    def apply(self, agg: AggregatedEvent) -> LevelEvent:
        """Add an aggregate into its side's frame; returns the level event.

        Emitted even for zero sums, so downstream sees one level event per
        aggregate.
        """
        frame = self.left if agg.side == Side.LEFT else self.right
        h, w = frame.shape
        x, y = agg.x, agg.y
        if not (0 <= x < w and 0 <= y < h):
            raise CoordinateOutOfBounds(
                "aggregate at (%d, %d) outside %dx%d frame" % (x, y, w, h))
        level = int(frame[y, x]) + agg.polarity_sum
        frame[y, x] = level
        return LevelEvent(agg.t_us, x, y, level, agg.side)


@njit(cache=True, nogil=True)
def _sad_kernel(left, right, x, y, d, radius):
    h, w = left.shape
    total = np.int64(0)
    for ky in range(-radius, radius + 1):
        yy = y + ky
        if yy < 0:
            yy = 0
        elif yy >= h:
            yy = h - 1
        for kx in range(-radius, radius + 1):
            xl = x + kx
            if xl < 0:
                xl = 0
            elif xl >= w:
                xl = w - 1
            xr = x - d + kx
            if xr < 0:
                xr = 0
            elif xr >= w:
                xr = w - 1
            diff = np.int64(left[yy, xl]) - np.int64(right[yy, xr])
            if diff < 0:
                diff = -diff
            total += diff
    return total


@njit(cache=True, nogil=True)
def _best_disparity_kernel(left, right, x, y, radius, d_limit):
    h, w = left.shape
    best_d = 0
    best_score = np.int64(2**62)
    for d in range(d_limit + 1):
        score = np.int64(0)
        for ky in range(-radius, radius + 1):
            yy = y + ky
            if yy < 0:
                yy = 0
            elif yy >= h:
                yy = h - 1
            for kx in range(-radius, radius + 1):
                xl = x + kx
                if xl < 0:
                    xl = 0
                elif xl >= w:
                    xl = w - 1
                xr = x - d + kx
                if xr < 0:
                    xr = 0
                elif xr >= w:
                    xr = w - 1
                diff = np.int64(left[yy, xl]) - np.int64(right[yy, xr])
                if diff < 0:
                    diff = -diff
                score += diff
            if score >= best_score:
                # partial sum already rules this candidate out; the final
                # score could only grow, so skipping it is exact
                break
        if score < best_score:
            best_score = score
            best_d = d
    return best_d, best_score


def sad(left: np.ndarray, right: np.ndarray, x: int, y: int, d: int,
        window_radius: int) -> int:
    """Sum of absolute level differences between two windows on one row.

    Compares the window centered at (x, y) in the left frame against the
    window centered at (x - d, y) in the right frame.  Samples outside a
    frame clamp to its border.
    """
    left = np.asarray(left)
    right = np.asarray(right)
    if left.ndim != 2 or left.shape != right.shape:
        raise DimensionMismatch("frames must share a 2-D shape")
    if d < 0:
        raise NonPositiveInput("disparity candidate must be >= 0")
    if window_radius < 0:
        raise NonPositiveInput("window radius must be >= 0")
    h, w = left.shape
    if not (0 <= x < w and 0 <= y < h):
        raise CoordinateOutOfBounds("window center outside frame")
    return int(_sad_kernel(np.ascontiguousarray(left, np.int32),
                           np.ascontiguousarray(right, np.int32),
                           x, y, d, window_radius))


def disparity_on_level_event(frames: LevelFrames, le: LevelEvent,
                             cfg: MatchConfig) -> Optional[DisparityEvent]:
    """Match one level event against the opposite frame.

    Only left-side events produce disparities; right-side events return
    None after their frame update.  Candidates run d = 0..min(d_max, x), so
    the matched column x - d never leaves the frame, and the smallest d
    wins ties.
    """
    if le.side == Side.RIGHT:
        return None
    h, w = frames.left.shape
    if not (0 <= le.x < w and 0 <= le.y < h):
        raise CoordinateOutOfBounds(
            "level event at (%d, %d) outside %dx%d frame" % (le.x, le.y, w, h))
    d_limit = le.x if le.x < cfg.d_max else cfg.d_max
    d, score = _best_disparity_kernel(frames.left, frames.right, le.x, le.y,
                                      cfg.window_radius, d_limit)
    return DisparityEvent(le.t_us, le.x, le.y, int(d), int(score))


def run_pipeline_sequential(mixed: EventStream,
                            cfg: MatchConfig) -> List[DisparityEvent]:
    """Reference execution: one in-process pass over the merged stream.

    Defines the semantics every other execution variant must reproduce
    byte for byte: events feed the aggregator in stream order, each flushed
    aggregate immediately updates its level frame, and each left-side level
    event is matched against the right frame as it stands at that moment.
    """
    require_valid(mixed)
    cfg.check_geometry(mixed.width, mixed.height)

    agg = AggregatorState(cfg.deadline_us)
    frames = LevelFrames.zeros(mixed.width, mixed.height)
    out: List[DisparityEvent] = []
    push = agg.push_raw
    apply = frames.apply

    for t, x, y, p, s in zip(mixed.t.tolist(), mixed.x.tolist(),
                             mixed.y.tolist(), mixed.polarity.tolist(),
                             mixed.event_side.tolist()):
        for a in push(t, x, y, p, s):
            de = disparity_on_level_event(frames, apply(a), cfg)
            if de is not None:
                out.append(de)
    for a in agg.flush_all():
        de = disparity_on_level_event(frames, apply(a), cfg)
        if de is not None:
            out.append(de)
    return out
