"""Command-line front end.

Subcommands:

    simulate   render a scene config into .evs event files plus ground truth
    run        execute the disparity pipeline on a stereo pair of .evs files
    bench      compare all execution variants and write a throughput CSV
    eval       score a disparity file against ground truth

Exit codes: 0 success, 1 input or configuration error, 2 output I/O error,
3 correctness assertion failure (variant outputs diverged).
"""

from __future__ import annotations

import argparse
import sys
from typing import Dict, Optional

from . import bench as bench_mod
from . import io as evio
from .config import CliSettings, load_scene, resolve_settings
from .errors import EquivalenceViolation, EvStereoError
from .events import merge_streams
from .pipeline import MatchConfig
from .runtime import RuntimeConfig, Variant, run as run_pipeline
from .simulator import max_event_rate, simulate

_VARIANTS = ("sequential", "simple", "combined", "channels")


class _WriteFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad arguments; the documented contract reserves
    # 2 for I/O failures, so remap usage errors to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("%s: error: %s\n" % (self.prog, message))
        raise SystemExit(1)


def _add_shared(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE",
                   help="settings file of key = value lines")
    p.add_argument("--seed", type=int, default=None,
                   help="seed for all randomized behavior")
    p.add_argument("--variant", choices=_VARIANTS, default=None,
                   help="execution variant")
    p.add_argument("--batch-size", type=int, default=None, dest="batch_size")
    p.add_argument("--channel-capacity", type=int, default=None,
                   dest="channel_capacity")
    p.add_argument("--window-radius", type=int, default=None,
                   dest="window_radius", help="SAD window radius B")
    p.add_argument("--d-max", type=int, default=None, dest="d_max",
                   help="largest candidate disparity")
    p.add_argument("--deadline-us", type=int, default=None, dest="deadline_us",
                   help="aggregator flush deadline in microseconds")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evstereo",
                     description="Event-camera stereo simulator and pipeline")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("simulate", help="render a scene into event streams")
    p.add_argument("scene", help="scene config file")
    p.add_argument("--out", default="sim", metavar="PREFIX",
                   help="output prefix (default: sim)")
    _add_shared(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("run", help="run the disparity pipeline")
    p.add_argument("left", help="left .evs file")
    p.add_argument("right", help="right .evs file")
    p.add_argument("--out", default="out.dsp", metavar="FILE",
                   help="disparity output file (default: out.dsp)")
    _add_shared(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("bench", help="compare execution variants")
    p.add_argument("left", help="left .evs file")
    p.add_argument("right", help="right .evs file")
    p.add_argument("--out", default="bench.csv", metavar="FILE",
                   help="throughput CSV (default: bench.csv)")
    p.add_argument("--repeats", type=int, default=None,
                   help="runs per variant, best one reported (default: 3)")
    _add_shared(p)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("eval", help="score disparities against ground truth")
    p.add_argument("disparities", help=".dsp file")
    p.add_argument("ground_truth", help=".gt file")
    p.add_argument("--out", default=None, metavar="FILE", help="accuracy CSV")
    p.add_argument("--tolerance-px", type=int, default=None, dest="tolerance_px",
                   help="error tolerance in pixels (default: 1)")
    p.add_argument("--max-unmatched", type=int, default=None,
                   dest="max_unmatched",
                   help="tolerated events without ground truth (default: 0)")
    _add_shared(p)
    p.set_defaults(func=_cmd_eval)

    return parser


def _settings(args) -> CliSettings:
    file_text: Optional[str] = None
    if args.config is not None:
        with open(args.config, "r") as f:
            file_text = f.read()
    overrides: Dict[str, object] = {
        name: getattr(args, name, None)
        for name in ("seed", "variant", "batch_size", "channel_capacity",
                     "window_radius", "d_max", "deadline_us", "repeats",
                     "tolerance_px", "max_unmatched")
    }
    return resolve_settings(file_text, overrides)


def _runtime_config(settings: CliSettings) -> RuntimeConfig:
    return RuntimeConfig(
        variant=Variant(settings.variant),
        match=MatchConfig(window_radius=settings.window_radius,
                          d_max=settings.d_max,
                          deadline_us=settings.deadline_us),
        batch_size=settings.batch_size,
        channel_capacity=settings.channel_capacity,
    )


def _guard_write(fn):
    try:
        fn()
    except OSError as e:
        raise _WriteFailure(str(e)) from e


def _cmd_simulate(args) -> int:
    settings = _settings(args)
    scene, sim_cfg = load_scene(args.scene, seed_override=args.seed)
    left, right, gt = simulate(scene, sim_cfg)

    prefix = args.out
    _guard_write(lambda: evio.write_stream(left, prefix + ".left.evs"))
    _guard_write(lambda: evio.write_stream(right, prefix + ".right.evs"))
    _guard_write(lambda: evio.write_ground_truth(gt, prefix + ".gt"))

    cam = sim_cfg.camera
    step_s = scene.render_step_us * 1e-6
    bound = max_event_rate(cam.width, cam.height,
                           255 // sim_cfg.contrast_threshold, step_s)
    peak = 0.0
    for stream in (left, right):
        tl = bench_mod.event_rate_timeline(stream, scene.render_step_us)
        if len(tl.events_per_s):
            peak = max(peak, float(tl.events_per_s.max()))

    print("settings: %s" % settings.echo())
    print("scene: %dx%d, %d objects, %d us at %d us steps"
          % (cam.width, cam.height, len(scene.objects), scene.duration_us,
             scene.render_step_us))
    print("left events:  %d" % len(left))
    print("right events: %d" % len(right))
    print("peak rate: %.3e ev/s (model bound %.3e ev/s, %.2f%%)"
          % (peak, bound, 100.0 * peak / bound if bound else 0.0))
    print("wrote %s.left.evs, %s.right.evs, %s.gt" % (prefix, prefix, prefix))
    return 0


def _cmd_run(args) -> int:
    settings = _settings(args)
    left = evio.read_stream(args.left)
    right = evio.read_stream(args.right)
    merged = merge_streams(left, right)
    out, metrics = run_pipeline(merged, _runtime_config(settings))
    _guard_write(lambda: evio.write_disparities(out, args.out))

    entry = bench_mod.measure_throughput(metrics)
    print("settings: %s" % settings.echo())
    print("variant %s: %d events in -> %d disparity events, %.3f s, %.1f keV/s"
          % (settings.variant, len(merged), entry.events, entry.seconds,
             entry.kev_per_s))
    print("wrote %s" % args.out)
    return 0


def _cmd_bench(args) -> int:
    settings = _settings(args)
    left = evio.read_stream(args.left)
    right = evio.read_stream(args.right)
    merged = merge_streams(left, right)
    report = bench_mod.compare_variants(merged, _runtime_config(settings),
                                        repeats=settings.repeats)
    extra = {"seed": str(settings.seed), "settings": settings.echo()}
    _guard_write(lambda: bench_mod.write_throughput_csv(report, args.out,
                                                        extra_comments=extra))

    print("settings: %s" % settings.echo())
    print("all variants produced identical output (%d records)"
          % report.reference_events)
    base = next(e for e in report.entries if e.variant == "sequential")
    for e in report.entries:
        speedup = e.kev_per_s / base.kev_per_s if base.kev_per_s else 0.0
        print("  %-10s %8d ev  %8.3f s  %10.1f keV/s  (%.2fx)"
              % (e.variant, e.events, e.seconds, e.kev_per_s, speedup))
    print("wrote %s" % args.out)
    return 0


def _cmd_eval(args) -> int:
    settings = _settings(args)
    disparities = evio.read_disparities(args.disparities)
    gt = evio.read_ground_truth(args.ground_truth)
    report = bench_mod.evaluate_accuracy(disparities, gt,
                                         tolerance_px=settings.tolerance_px,
                                         max_unmatched=settings.max_unmatched)
    if args.out:
        extra = {"settings": settings.echo()}
        _guard_write(lambda: bench_mod.write_accuracy_csv(report, args.out,
                                                          extra_comments=extra))
        print("wrote %s" % args.out)

    print("settings: %s" % settings.echo())
    print("matched %d events (%d unmatched)"
          % (report.matched_events, report.unmatched_events))
    print("mean absolute error: %.4f px" % report.mean_abs_error_px)
    print("within %d px: %.2f%%"
          % (report.tolerance_px, 100.0 * report.within_tolerance_fraction))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        code = e.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 1
    try:
        return args.func(args)
    except EquivalenceViolation as e:
        sys.stderr.write("equivalence failure: %s\n" % e)
        return 3
    except _WriteFailure as e:
        sys.stderr.write("write failed: %s\n" % e)
        return 2
    except (EvStereoError, OSError, ValueError) as e:
        sys.stderr.write("error: %s\n" % e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
