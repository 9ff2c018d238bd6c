"""Shared helpers for the test suite.

The reference implementations here are deliberately naive: plain lists,
linear scans, full double loops.  They re-derive every behavior the package
computes cleverly, so agreement between the two is meaningful.
"""

import numpy as np

from evstereo.events import EventStream, PolarityEvent, Side
from evstereo.pipeline import AggregatedEvent


def sort_events(events):
    """Canonical order: (t, side, y, x), Left before Right."""
    return sorted(events, key=lambda e: (e.t_us, int(e.side), e.y, e.x))


def make_stream(rng, width, height, n, side, t_max=50_000):
    """Random valid single-side stream with burst-like repeated timestamps."""
    t = np.sort(rng.integers(0, t_max, size=n))
    events = []
    for ti in t.tolist():
        events.append(PolarityEvent(
            int(ti),
            int(rng.integers(0, width)),
            int(rng.integers(0, height)),
            1 if rng.random() < 0.5 else -1,
            side,
        ))
    return EventStream.from_events(width, height, side, sort_events(events))


def make_mixed_stream(rng, width, height, n, t_max=50_000):
    """Random valid merged stream with both side tags."""
    t = np.sort(rng.integers(0, t_max, size=n))
    events = []
    for ti in t.tolist():
        events.append(PolarityEvent(
            int(ti),
            int(rng.integers(0, width)),
            int(rng.integers(0, height)),
            1 if rng.random() < 0.5 else -1,
            Side.LEFT if rng.random() < 0.5 else Side.RIGHT,
        ))
    return EventStream.from_events(width, height, Side.MIXED,
                                   sort_events(events))


def aggregate_reference(events, deadline_us):
    """Reference aggregation over a whole in-order event sequence.

    Keeps live windows in an unordered list and re-scans all of them at
    every push, so it shares no data-structure assumptions with the
    streaming implementation.  Returns the full emission sequence
    including the end-of-stream drain.
    """
    live = []  # entries [side, y, x, total, last_t]
    out = []

    def drain(expired):
        expired.sort(key=lambda w: (w[4], w[0], w[1], w[2]))
        for w in expired:
            out.append(AggregatedEvent(w[4], w[2], w[1], w[3], Side(w[0])))

    for e in events:
        t = e.t_us
        expired = [w for w in live if w[4] + deadline_us < t]
        if expired:
            live = [w for w in live if w[4] + deadline_us >= t]
            drain(expired)
        for w in live:
            if w[0] == int(e.side) and w[1] == e.y and w[2] == e.x:
                w[3] += e.polarity
                w[4] = t
                break
        else:
            live.append([int(e.side), e.y, e.x, e.polarity, t])
    drain(live)
    return out


def sad_reference(left, right, xl, xr, y, radius):
    """Full-window SAD with explicit border clamping, no shortcuts."""
    h, w = len(left), len(left[0])
    total = 0
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            yy = min(max(y + dy, 0), h - 1)
            xxl = min(max(xl + dx, 0), w - 1)
            xxr = min(max(xr + dx, 0), w - 1)
            total += abs(int(left[yy][xxl]) - int(right[yy][xxr]))
    return total


def best_disparity_reference(left, right, x, y, radius, d_max):
    """Exhaustive candidate scan; min() picks the smallest d on score ties."""
    scored = []
    for d in range(0, min(d_max, x) + 1):
        scored.append((sad_reference(left, right, x, x - d, y, radius), d))
    score, d = min(scored)
    return d, score
