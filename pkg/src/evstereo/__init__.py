"""Event-camera stereo: simulator, disparity pipeline, execution variants.

The package simulates a rectified stereo pair of dynamic vision sensors,
turns the resulting polarity event streams into sparse disparity estimates
via temporal aggregation and window-based matching, and provides four
interchangeable execution strategies that produce bitwise-identical output.
"""

from .bench import (
    AccuracyReport,
    ComparisonReport,
    RateTimeline,
    ThroughputEntry,
    compare_variants,
    evaluate_accuracy,
    event_rate_timeline,
    frame_camera_fps,
    measure_throughput,
    qvga_frame_baseline,
)
from .errors import (
    ChannelClosed,
    ConfigError,
    EquivalenceViolation,
    EvStereoError,
    HeaderMismatch,
    InvalidStream,
    MissingGroundTruth,
    OutOfOrderEvent,
    UnorderedInput,
)
from .events import (
    EventStream,
    PolarityEvent,
    Side,
    merge_streams,
    require_valid,
    streams_equal,
    validate_stream,
)
from .io import (
    read_disparities,
    read_ground_truth,
    read_stream,
    write_disparities,
    write_ground_truth,
    write_stream,
)
from .pipeline import (
    AggregatedEvent,
    AggregatorState,
    DisparityEvent,
    LevelEvent,
    LevelFrames,
    MatchConfig,
    disparity_on_level_event,
    run_pipeline_sequential,
    sad,
)
from .runtime import (
    BoundedChannel,
    RuntimeConfig,
    StageMetrics,
    Variant,
    run,
)
from .simulator import (
    GroundTruthRecord,
    Scene,
    SceneObject,
    SimulatorConfig,
    StereoCamera,
    ground_truth_disparity,
    max_event_rate,
    plate_scene,
    random_scene,
    simulate,
)
from .wire import (
    SENTINEL,
    WirePacket,
    is_sentinel,
    pack_event,
    sentinel,
    unpack_event,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "AggregatedEvent",
    "AggregatorState",
    "BoundedChannel",
    "ChannelClosed",
    "ComparisonReport",
    "ConfigError",
    "DisparityEvent",
    "EquivalenceViolation",
    "EvStereoError",
    "EventStream",
    "GroundTruthRecord",
    "HeaderMismatch",
    "InvalidStream",
    "LevelEvent",
    "LevelFrames",
    "MatchConfig",
    "MissingGroundTruth",
    "OutOfOrderEvent",
    "PolarityEvent",
    "RateTimeline",
    "RuntimeConfig",
    "SENTINEL",
    "Scene",
    "SceneObject",
    "Side",
    "SimulatorConfig",
    "StageMetrics",
    "StereoCamera",
    "ThroughputEntry",
    "UnorderedInput",
    "Variant",
    "WirePacket",
    "compare_variants",
    "disparity_on_level_event",
    "evaluate_accuracy",
    "event_rate_timeline",
    "frame_camera_fps",
    "ground_truth_disparity",
    "is_sentinel",
    "max_event_rate",
    "measure_throughput",
    "merge_streams",
    "pack_event",
    "plate_scene",
    "qvga_frame_baseline",
    "random_scene",
    "read_disparities",
    "read_ground_truth",
    "read_stream",
    "require_valid",
    "run",
    "run_pipeline_sequential",
    "sad",
    "sentinel",
    "simulate",
    "streams_equal",
    "unpack_event",
    "validate_stream",
    "write_disparities",
    "write_ground_truth",
    "write_stream",
]
