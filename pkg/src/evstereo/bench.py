"""Throughput measurement, rate timelines and accuracy evaluation.

Throughput is counted at the pipeline sink: disparity events per second of
run() wall time, reported in kilo-events per second.  The frame-camera
helpers give the readout-bound FPS of a conventional sensor and the event
budget an equivalent QVGA frame stream would spend, for context next to
the event-stream numbers.
"""

from __future__ import annotations

import bisect
import platform
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence

import numpy as np

from .errors import (
    EquivalenceViolation,
    MissingGroundTruth,
    NonPositiveInput,
    ZeroDuration,
)
from .events import EventStream
from .pipeline import DisparityEvent
from .runtime import RuntimeConfig, StageMetrics, Variant, run
from .simulator import GroundTruthRecord

QVGA_WIDTH = 320
QVGA_HEIGHT = 240


class ThroughputEntry(NamedTuple):
    variant: str
    events: int
    seconds: float
    kev_per_s: float


def measure_throughput(metrics: StageMetrics) -> ThroughputEntry:
    """Reduce run metrics to one sink-throughput row."""
    if metrics.wall_time_s <= 0:
        raise ZeroDuration("wall time must be positive")
    kev = metrics.sink_event_count / metrics.wall_time_s / 1000.0
    return ThroughputEntry(metrics.variant.value, metrics.sink_event_count,
                           metrics.wall_time_s, kev)


class RateTimeline(NamedTuple):
    bin_width_us: int
    t_start_us: np.ndarray
    count: np.ndarray
    events_per_s: np.ndarray


def event_rate_timeline(stream: EventStream, bin_width_us: int) -> RateTimeline:
    """Histogram a stream into fixed time bins starting at t = 0.

    Bins cover 0 up to and including the last event; an empty stream gives
    an empty timeline.
    """
    if bin_width_us <= 0:
        raise NonPositiveInput("bin width must be positive")
    if len(stream) == 0:
        empty = np.empty(0, np.int64)
        return RateTimeline(bin_width_us, empty.astype(np.uint64), empty,
                            np.empty(0, np.float64))
    bins = (stream.t // np.uint64(bin_width_us)).astype(np.int64)
    count = np.bincount(bins)
    starts = (np.arange(len(count), dtype=np.uint64) * np.uint64(bin_width_us))
    rate = count / (bin_width_us * 1e-6)
    return RateTimeline(bin_width_us, starts, count.astype(np.int64), rate)


def qvga_frame_baseline(fps: float) -> float:
    """Pixels per second a full-frame QVGA readout spends at the given FPS."""
    if fps < 0:
        raise NonPositiveInput("fps must be nonnegative")
    return QVGA_WIDTH * QVGA_HEIGHT * fps


def frame_camera_fps(t_exp_s: float, width: int, height: int, bpp: int,
                     bandwidth_bps: float) -> float:
    """Highest FPS a frame camera sustains over a fixed-bandwidth link.

    One frame costs the exposure time plus width * height * bpp bits of
    transfer; the result is the reciprocal of that period.
    """
    if width <= 0 or height <= 0 or bpp <= 0 or bandwidth_bps <= 0:
        raise NonPositiveInput("resolution, bit depth and bandwidth must be positive")
    if t_exp_s < 0:
        raise NonPositiveInput("exposure time must be nonnegative")
    return 1.0 / (t_exp_s + width * height * bpp / bandwidth_bps)


@dataclass
class AccuracyReport:
    matched_events: int
    unmatched_events: int
    mean_abs_error_px: float
    within_tolerance_fraction: float
    tolerance_px: int
    histogram: Dict[int, int]


def evaluate_accuracy(disparities: Sequence[DisparityEvent],
                      ground_truth: Sequence[GroundTruthRecord],
                      tolerance_px: int = 1,
                      max_unmatched: int = 0) -> AccuracyReport:
    """Join disparity events against ground truth and score them.

    Each disparity event joins to the ground-truth record at its pixel with
    the largest timestamp not after the event (an aggregate inherits the
    time of its last raw event, which always has a record).  Events with no
    joinable record count as unmatched; more than max_unmatched of them
    raises MissingGroundTruth.  The histogram counts matched events per
    estimated disparity.  Results do not depend on input ordering.
    """
    by_pixel: Dict[tuple, List] = defaultdict(list)
    for r in ground_truth:
        by_pixel[(r.x, r.y)].append((r.t_us, r.disparity_px))
    for rows in by_pixel.values():
        rows.sort()

    matched = 0
    unmatched = 0
    abs_err_sum = 0
    within = 0
    histogram: Dict[int, int] = defaultdict(int)
    for e in disparities:
        rows = by_pixel.get((e.x, e.y))
        if rows is None:
            unmatched += 1
            continue
        i = bisect.bisect_right(rows, (e.t_us, float("inf"))) - 1
        if i < 0:
            unmatched += 1
            continue
        true_d = rows[i][1]
        err = abs(e.disparity - true_d)
        matched += 1
        abs_err_sum += err
        if err <= tolerance_px:
            within += 1
        histogram[e.disparity] += 1

    if unmatched > max_unmatched:
        raise MissingGroundTruth(
            "%d of %d disparity events have no ground truth"
            % (unmatched, len(disparities)))
    return AccuracyReport(
        matched_events=matched,
        unmatched_events=unmatched,
        mean_abs_error_px=abs_err_sum / matched if matched else 0.0,
        within_tolerance_fraction=within / matched if matched else 0.0,
        tolerance_px=tolerance_px,
        histogram=dict(histogram),
    )


@dataclass
class ComparisonReport:
    entries: List[ThroughputEntry]
    reference_events: int
    repeats: int
    machine: str
    config_echo: str


def machine_descriptor() -> str:
    return "%s / Python %s" % (platform.platform(), platform.python_version())


def _first_difference(ref: Sequence[DisparityEvent],
                      got: Sequence[DisparityEvent]) -> int:
    n = min(len(ref), len(got))
    for i in range(n):
        if ref[i] != got[i]:
            return i
    return n


def compare_variants(mixed: EventStream, cfg: RuntimeConfig,
                     repeats: int = 3,
                     variants: Optional[Sequence[Variant]] = None,
                     ) -> ComparisonReport:
    """Run every variant, check output equivalence, report best-of-N timing.

    The sequential run defines the reference output; any variant whose
    disparity list differs raises EquivalenceViolation naming the variant
    and the first differing record, and no throughput is reported for it.
    Each variant runs `repeats` times and reports its fastest run.
    """
    if repeats < 1:
        raise NonPositiveInput("repeats must be >= 1")
    chosen = list(variants) if variants is not None else list(Variant)
    if Variant.SEQUENTIAL not in chosen:
        chosen.insert(0, Variant.SEQUENTIAL)

    reference: Optional[List[DisparityEvent]] = None
    entries: List[ThroughputEntry] = []
    ordered = [Variant.SEQUENTIAL] + [v for v in chosen if v is not Variant.SEQUENTIAL]
    for variant in ordered:
        vcfg = RuntimeConfig(variant=variant, match=cfg.match,
                             batch_size=cfg.batch_size,
                             channel_capacity=cfg.channel_capacity)
        best: Optional[StageMetrics] = None
        for _ in range(repeats):
            out, metrics = run(mixed, vcfg)
            if reference is None:
                reference = out
            elif out != reference:
                idx = _first_difference(reference, out)
                raise EquivalenceViolation(
                    "variant %s diverges from sequential at record %d"
                    % (variant.value, idx),
                    variant=variant.value, record_index=idx)
            if best is None or metrics.wall_time_s < best.wall_time_s:
                best = metrics
        entries.append(measure_throughput(best))

    echo = ("width=%d height=%d events=%d window_radius=%d d_max=%d "
            "deadline_us=%d batch_size=%d channel_capacity=%d repeats=%d"
            % (mixed.width, mixed.height, len(mixed), cfg.match.window_radius,
               cfg.match.d_max, cfg.match.deadline_us, cfg.batch_size,
               cfg.channel_capacity, repeats))
    return ComparisonReport(entries=entries, reference_events=len(reference or []),
                            repeats=repeats, machine=machine_descriptor(),
                            config_echo=echo)


def write_throughput_csv(report: ComparisonReport, dest,
                         extra_comments: Optional[Dict[str, str]] = None) -> None:
    """CSV rows ``variant,events,seconds,kev_per_s`` under '#' metadata lines."""
    own = not hasattr(dest, "write")
    f = open(dest, "w") if own else dest
    try:
        f.write("# machine: %s\n" % report.machine)
        f.write("# config: %s\n" % report.config_echo)
        if extra_comments:
            for k, v in extra_comments.items():
                f.write("# %s: %s\n" % (k, v))
        f.write("variant,events,seconds,kev_per_s\n")
        for e in report.entries:
            f.write("%s,%d,%.6f,%.3f\n" % (e.variant, e.events, e.seconds,
                                           e.kev_per_s))
    finally:
        if own:
            f.close()


def write_timeline_csv(timeline: RateTimeline, dest,
                       extra_comments: Optional[Dict[str, str]] = None) -> None:
    """CSV rows ``t_start_us,count,events_per_s``."""
    own = not hasattr(dest, "write")
    f = open(dest, "w") if own else dest
    try:
        if extra_comments:
            for k, v in extra_comments.items():
                f.write("# %s: %s\n" % (k, v))
        f.write("t_start_us,count,events_per_s\n")
        for t, c, r in zip(timeline.t_start_us.tolist(), timeline.count.tolist(),
                           timeline.events_per_s.tolist()):
            f.write("%d,%d,%.3f\n" % (t, c, r))
    finally:
        if own:
            f.close()


def write_accuracy_csv(report: AccuracyReport, dest,
                       extra_comments: Optional[Dict[str, str]] = None) -> None:
    """One CSV row ``matched,mae_px,within_1px``."""
    own = not hasattr(dest, "write")
    f = open(dest, "w") if own else dest
    try:
        if extra_comments:
            for k, v in extra_comments.items():
                f.write("# %s: %s\n" % (k, v))
        f.write("matched,mae_px,within_1px\n")
        f.write("%d,%.4f,%.4f\n" % (report.matched_events,
                                    report.mean_abs_error_px,
                                    report.within_tolerance_fraction))
    finally:
        if own:
            f.close()
