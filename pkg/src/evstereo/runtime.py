"""Execution variants for the stereo pipeline.

Four topologies run the exact same per-event operations and therefore
produce byte-identical disparity output; they differ only in how events
cross stage boundaries.

    sequential  direct in-process chaining, the reference
    simple      one kernel invocation per event, each with a freshly
                allocated transfer buffer
    combined    events packed into three-word wire packets and handed over
                in batches, one invocation per batch
    channels    two concurrently scheduled stages (aggregation, then level
                update plus matching) linked by a bounded FIFO of wire
                packets, terminated by a sentinel packet

The channel is single-producer single-consumer.  Aggregation state lives
only in the first stage, level frames only in the second, so nothing is
shared but the FIFO.  Content determinism follows from FIFO order; thread
scheduling can only change timing.
"""

from __future__ import annotations

import enum
import struct
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .errors import (
    ChannelClosed,
    InvalidStream,
    NonPositiveInput,
    TimestampOverflow,
)
from .events import EventStream, Side, require_valid
from .pipeline import (
    AggregatorState,
    DisparityEvent,
    LevelFrames,
    MatchConfig,
    _best_disparity_kernel,
)
from .wire import SENTINEL, pack_stream_words, unpack_words

_PACKET_STRUCT = struct.Struct("<IIi")


class Variant(enum.Enum):
    SEQUENTIAL = "sequential"
    SIMPLE = "simple"
    COMBINED = "combined"
    CHANNELS = "channels"


@dataclass
class RuntimeConfig:
    variant: Variant = Variant.SEQUENTIAL
    match: MatchConfig = field(default_factory=MatchConfig)
    batch_size: int = 4096
    channel_capacity: int = 1024

    def __post_init__(self):
        if isinstance(self.variant, str):
            self.variant = Variant(self.variant)
        if self.batch_size < 1:
            raise NonPositiveInput("batch size must be >= 1")
        if self.channel_capacity < 1:
            raise NonPositiveInput("channel capacity must be >= 1")


@dataclass
class StageStats:
    name: str
    events_in: int
    events_out: int
    busy_time_s: float
    wall_time_s: float


@dataclass
class StageMetrics:
    """Per-run accounting.

    For the single-threaded variants both stages share the thread, so their
    busy and wall fields all equal the run's wall time.  Channel stages
    report the span of their worker thread as wall time and that span minus
    time blocked on the FIFO as busy time.
    """

    variant: Variant
    stages: List[StageStats]
    sink_event_count: int
    wall_time_s: float
    throughput_kev_s: float


class BoundedChannel:
    """Bounded single-producer single-consumer FIFO of wire-word triples.

    deque append/popleft are atomic, so with one thread on each end the
    unblocked paths need no lock.  A side that finds the queue full or
    empty parks on a condition after raising _parked, and the peer only
    pays for a notify while _parked is nonzero; the interpreter lock
    orders the _parked increment before the park-side recheck, so a
    wakeup cannot be missed.  Blocked time is recorded separately so
    stages can report busy time net of backpressure, and a wait longer
    than timeout_s raises ChannelClosed instead of deadlocking a stage
    whose peer died.
    """

    def __init__(self, capacity: int, timeout_s: float = 60.0):
        if capacity < 1:
            raise NonPositiveInput("channel capacity must be >= 1")
        self.capacity = capacity
        self.timeout_s = timeout_s
        self._q: "deque[Tuple[int, int, int]]" = deque()
        self._wakeup = threading.Condition(threading.Lock())
        self._parked = 0
        self.put_count = 0
        self.take_count = 0
        self.put_blocked_s = 0.0
        self.take_blocked_s = 0.0

    def __len__(self) -> int:
        return len(self._q)

    def _wait_until(self, ready, who: str) -> float:
        t0 = time.perf_counter()
        deadline = t0 + self.timeout_s
        with self._wakeup:
            self._parked += 1
            try:
                while not ready():
                    remaining = deadline - time.perf_counter()
                    if remaining <= 0:
                        raise ChannelClosed(
                            "%s stopped servicing the channel" % who)
                    self._wakeup.wait(min(remaining, 0.05))
            finally:
                self._parked -= 1
        return time.perf_counter() - t0

    def _notify_parked(self) -> None:
        with self._wakeup:
            self._wakeup.notify_all()

    def put(self, packet: Tuple[int, int, int]) -> None:
        q = self._q
        if len(q) >= self.capacity:
            self.put_blocked_s += self._wait_until(
                lambda: len(q) < self.capacity, "consumer")
        q.append(packet)
        self.put_count += 1
        if self._parked:
            self._notify_parked()

    def take(self) -> Tuple[int, int, int]:
        q = self._q
        if not q:
            self.take_blocked_s += self._wait_until(lambda: len(q), "producer")
        packet = q.popleft()
        self.take_count += 1
        if self._parked:
            self._notify_parked()
        return packet


def emit_sentinel(channel: BoundedChannel) -> None:
    channel.put(SENTINEL)


class _MatchState:
    """Level frames plus matcher flattened into one hot-path object.

    Consumes the aggregator's packed (last_t, key, sum) triples directly;
    coordinates come out of the key with the same masks the aggregator
    used to build it.  Streams reach this point already validated, so the
    per-event bounds checks of the public apply/match pair are not repeated
    here.  The int() round-trip before the frame write still surfaces
    int32 overflow exactly as LevelFrames.apply does.
    """

    __slots__ = ("left", "right", "radius", "d_max", "out", "aggregate_count")

    def __init__(self, width: int, height: int, cfg: MatchConfig):
        frames = LevelFrames.zeros(width, height)
        self.left = frames.left
        self.right = frames.right
        self.radius = cfg.window_radius
        self.d_max = cfg.d_max
        self.out: List[DisparityEvent] = []
        self.aggregate_count = 0

    def emit_packed(self, t: int, key: int, total: int) -> None:
        self.aggregate_count += 1
        x = key & 0xFFFF
        y = (key >> 16) & 0x7FFF
        if key >> 31:
            right = self.right
            right[y, x] = int(right[y, x]) + total
            return
        left = self.left
        left[y, x] = int(left[y, x]) + total
        d_max = self.d_max
        d, score = _best_disparity_kernel(left, self.right, x, y, self.radius,
                                          x if x < d_max else d_max)
        self.out.append(DisparityEvent(t, x, y, int(d), int(score)))


class _Core:
    """Aggregation and match state threaded through one run."""

    __slots__ = ("agg", "match")

    def __init__(self, width: int, height: int, cfg: MatchConfig):
        self.agg = AggregatorState(cfg.deadline_us)
        self.match = _MatchState(width, height, cfg)

    def process_raw(self, t: int, x: int, y: int, p: int, side: int) -> None:
        flushed = self.agg.push_packed(t, x, y, p, side)
        if flushed:
            emit = self.match.emit_packed
            for lt, key, s in flushed:
                emit(lt, key, s)

    def finish(self) -> None:
        emit = self.match.emit_packed
        for lt, key, s in self.agg.flush_packed():
            emit(lt, key, s)

    @property
    def out(self) -> List[DisparityEvent]:
        return self.match.out

    @property
    def aggregate_count(self) -> int:
        return self.match.aggregate_count


def _columns(mixed: EventStream):
    return (mixed.t.tolist(), mixed.x.tolist(), mixed.y.tolist(),
            mixed.polarity.tolist(), mixed.event_side.tolist())


def _run_sequential(mixed: EventStream, cfg: RuntimeConfig):
    core = _Core(mixed.width, mixed.height, cfg.match)
    push = core.agg.push_packed
    emit = core.match.emit_packed
    for t, x, y, p, s in zip(*_columns(mixed)):
        for trip in push(t, x, y, p, s):
            emit(*trip)
    core.finish()
    return core


def _run_simple(mixed: EventStream, cfg: RuntimeConfig):
    core = _Core(mixed.width, mixed.height, cfg.match)
    pack = _PACKET_STRUCT.pack
    unpack = _PACKET_STRUCT.unpack

    def kernel(buffer: bytes) -> None:
        w0, w1, w2 = unpack(buffer)
        core.process_raw(w0, w1 & 0xFFFF, (w1 >> 16) & 0x7FFF, w2, w1 >> 31)

    invoke = kernel  # call through a name, as a dispatch boundary would
    for t, x, y, p, s in zip(*_columns(mixed)):
        invoke(pack(t, (s << 31) | (y << 16) | x, p))
    core.finish()
    return core


def _run_combined(mixed: EventStream, cfg: RuntimeConfig):
    core = _Core(mixed.width, mixed.height, cfg.match)
    process = core.process_raw

    def kernel(batch) -> None:
        t, x, y, side, payload = unpack_words(batch)
        for tt, xx, yy, pp, ss in zip(t.tolist(), x.tolist(), y.tolist(),
                                      payload.tolist(), side.tolist()):
            process(tt, xx, yy, pp, ss)

    words = pack_stream_words(mixed)
    bs = cfg.batch_size
    for start in range(0, len(words), bs):
        kernel(words[start:start + bs])
    core.finish()
    return core


def _run_channels(mixed: EventStream, cfg: RuntimeConfig):
    chan = BoundedChannel(cfg.channel_capacity)
    words = pack_stream_words(mixed)

    stage_err: List[Optional[BaseException]] = [None, None]
    stage_span = [0.0, 0.0]
    counts = {"aggregates": 0, "taken": 0, "sentinels": 0}
    match = _MatchState(mixed.width, mixed.height, cfg.match)

    def aggregate_stage() -> None:
        t0 = time.perf_counter()
        try:
            agg = AggregatorState(cfg.match.deadline_us)
            push = agg.push_packed
            put = chan.put
            emitted = 0
            t_col, x_col, y_col, s_col, p_col = unpack_words(words)
            # the aggregator's packed key has the wire word1 layout, so
            # flush triples cross the channel as (word0, word1, word2)
            for t, x, y, p, s in zip(t_col.tolist(), x_col.tolist(),
                                     y_col.tolist(), p_col.tolist(),
                                     s_col.tolist()):
                for trip in push(t, x, y, p, s):
                    put(trip)
                    emitted += 1
            for trip in agg.flush_packed():
                put(trip)
                emitted += 1
            counts["aggregates"] = emitted
        except BaseException as e:
            stage_err[0] = e
        finally:
            try:
                emit_sentinel(chan)
            except ChannelClosed as e:
                if stage_err[0] is None:
                    stage_err[0] = e
            stage_span[0] = time.perf_counter() - t0

    def match_stage() -> None:
        t0 = time.perf_counter()
        try:
            take = chan.take
            emit = match.emit_packed
            sw = SENTINEL.word0
            taken = 0
            while True:
                w0, w1, w2 = take()
                if w0 == sw and w1 == sw and (w2 == -1 or w2 == sw):
                    counts["sentinels"] += 1
                    break
                taken += 1
                emit(w0, w1, w2)
            counts["taken"] = taken
        except BaseException as e:
            stage_err[1] = e
        finally:
            stage_span[1] = time.perf_counter() - t0

    t1 = threading.Thread(target=aggregate_stage, name="evstereo-aggregate")
    t2 = threading.Thread(target=match_stage, name="evstereo-match")
    t1.start()
    t2.start()
    t1.join()
    t2.join()

    if stage_err[0] is not None:
        raise stage_err[0]
    if stage_err[1] is not None:
        raise stage_err[1]

    # protocol sanity: one sentinel, fully drained channel, no packet loss
    assert counts["sentinels"] == 1, "stage 2 must stop at exactly one sentinel"
    assert len(chan) == 0, "packets left in the channel after the sentinel"
    assert counts["taken"] == counts["aggregates"], "channel dropped packets"

    return chan, counts, stage_span, match.out


def run(mixed: EventStream, cfg: RuntimeConfig
        ) -> Tuple[List[DisparityEvent], StageMetrics]:
    """Execute the pipeline under the configured variant.

    The input must be a valid merged (Mixed-sided) stream whose timestamps
    fit the 32-bit wire window.  Validation happens before the clock
    starts; the reported wall time covers only pipeline execution,
    including any packing the variant performs.
    """
    if mixed.side != Side.MIXED:
        raise InvalidStream("runtime expects a merged Mixed-sided stream")
    require_valid(mixed)
    if len(mixed) and int(mixed.t.max()) >= 2**32:
        raise TimestampOverflow("stream timestamps must fit 32 bits")
    cfg.match.check_geometry(mixed.width, mixed.height)

    n_in = len(mixed)
    t0 = time.perf_counter()
    if cfg.variant is Variant.CHANNELS:
        chan, counts, spans, out = _run_channels(mixed, cfg)
        wall = time.perf_counter() - t0
        stages = [
            StageStats("aggregate", n_in, counts["aggregates"],
                       max(spans[0] - chan.put_blocked_s, 0.0), spans[0]),
            StageStats("match", counts["taken"], len(out),
                       max(spans[1] - chan.take_blocked_s, 0.0), spans[1]),
        ]
    else:
        runner = {
            Variant.SEQUENTIAL: _run_sequential,
            Variant.SIMPLE: _run_simple,
            Variant.COMBINED: _run_combined,
        }[cfg.variant]
        core = runner(mixed, cfg)
        wall = time.perf_counter() - t0
        out = core.out
        stages = [
            StageStats("aggregate", n_in, core.aggregate_count, wall, wall),
            StageStats("match", core.aggregate_count, len(out), wall, wall),
        ]

    metrics = StageMetrics(
        variant=cfg.variant,
        stages=stages,
        sink_event_count=len(out),
        wall_time_s=wall,
        throughput_kev_s=len(out) / wall / 1000.0 if wall > 0 else 0.0,
    )
    return out, metrics
