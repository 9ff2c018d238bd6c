"""Flat key = value configuration text for scenes and CLI settings.

Both the scene description format and the runtime settings file share one
grammar: ``key = value`` lines, ``#`` comments, blank lines ignored.  Keys
are snake_case; scene objects use an indexed prefix, e.g.
``object.0.depth_m = 1.2``.  Unknown or duplicate keys are rejected so
typos fail loudly instead of silently using defaults.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields, replace
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import ConfigError
from .simulator import (
    Scene,
    SceneObject,
    SimulatorConfig,
    StereoCamera,
    random_objects,
)


def parse_kv_text(text: str) -> Dict[str, str]:
    """Parse flat key = value text into a string map."""
    out: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line %d: expected 'key = value', got %r"
                              % (lineno, raw.strip()))
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError("line %d: empty key" % lineno)
        if key in out:
            raise ConfigError("line %d: duplicate key %r" % (lineno, key))
        out[key] = value
    return out


def _to_int(key: str, value: str) -> int:
    try:
        return int(value, 0)
    except ValueError:
        raise ConfigError("key %r: %r is not an integer" % (key, value)) from None


def _to_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError("key %r: %r is not a number" % (key, value)) from None


_SCENE_SCALARS = {
    "width": int, "height": int, "focal_px": float, "baseline_m": float,
    "background": int, "contrast_threshold": int, "duration_us": int,
    "render_step_us": int, "seed": int, "random_objects": int,
}
_OBJECT_FIELDS = {
    "x0_m": float, "y0_m": float, "width_m": float, "height_m": float,
    "depth_m": float, "luminance": int, "vx_mps": float, "vy_mps": float,
}
_OBJECT_RE = re.compile(r"^object\.(\d+)\.([a-z0-9_]+)$")


def scene_from_config_text(text: str, seed_override: Optional[int] = None
                           ) -> Tuple[Scene, SimulatorConfig]:
    """Build a scene and simulator config from flat text.

    Objects may be listed explicitly under ``object.N.*`` prefixes or drawn
    reproducibly with ``random_objects = N`` plus ``seed``; mixing the two
    is rejected as ambiguous.  seed_override replaces the file's seed
    before any random drawing happens.
    """
    kv = parse_kv_text(text)
    scalars: Dict[str, object] = {}
    objects: Dict[int, Dict[str, object]] = {}

    for key, value in kv.items():
        m = _OBJECT_RE.match(key)
        if m:
            idx = int(m.group(1))
            name = m.group(2)
            if name not in _OBJECT_FIELDS:
                raise ConfigError("unknown object field %r" % key)
            conv = _to_int if _OBJECT_FIELDS[name] is int else _to_float
            objects.setdefault(idx, {})[name] = conv(key, value)
        elif key in _SCENE_SCALARS:
            conv = _to_int if _SCENE_SCALARS[key] is int else _to_float
            scalars[key] = conv(key, value)
        else:
            raise ConfigError("unknown key %r" % key)

    camera = StereoCamera(
        width=scalars.get("width", 320),
        height=scalars.get("height", 240),
        focal_px=scalars.get("focal_px", 120.0),
        baseline_m=scalars.get("baseline_m", 0.1),
    )
    seed = scalars.get("seed", 0) if seed_override is None else seed_override
    sim_cfg = SimulatorConfig(
        camera=camera,
        contrast_threshold=scalars.get("contrast_threshold", 10),
        seed=seed,
    )
    background = scalars.get("background", 128)

    n_random = scalars.get("random_objects", 0)
    if n_random and objects:
        raise ConfigError("give either random_objects or object.N.* keys, not both")
    if n_random:
        rng = np.random.default_rng(sim_cfg.seed)
        objs = random_objects(rng, camera, n_random,
                              sim_cfg.contrast_threshold, background)
    else:
        objs = []
        for idx in sorted(objects):
            spec = objects[idx]
            missing = set(_OBJECT_FIELDS) - {"vx_mps", "vy_mps"} - set(spec)
            if missing:
                raise ConfigError("object.%d is missing %s"
                                  % (idx, ", ".join(sorted(missing))))
            objs.append(SceneObject(**spec))

    scene = Scene(
        background=background,
        objects=objs,
        duration_us=scalars.get("duration_us", 50_000),
        render_step_us=scalars.get("render_step_us", 100),
    )
    return scene, sim_cfg


def scene_to_config_text(scene: Scene, sim_cfg: SimulatorConfig) -> str:
    cam = sim_cfg.camera
    lines = [
        "width = %d" % cam.width,
        "height = %d" % cam.height,
        "focal_px = %r" % cam.focal_px,
        "baseline_m = %r" % cam.baseline_m,
        "background = %d" % scene.background,
        "contrast_threshold = %d" % sim_cfg.contrast_threshold,
        "duration_us = %d" % scene.duration_us,
        "render_step_us = %d" % scene.render_step_us,
        "seed = %d" % sim_cfg.seed,
    ]
    for i, o in enumerate(scene.objects):
        for name in _OBJECT_FIELDS:
            value = getattr(o, name)
            lines.append("object.%d.%s = %r" % (i, name, value))
    return "\n".join(lines) + "\n"


def load_scene(path, seed_override: Optional[int] = None
               ) -> Tuple[Scene, SimulatorConfig]:
    with open(path, "r") as f:
        return scene_from_config_text(f.read(), seed_override=seed_override)


@dataclass
class CliSettings:
    """Resolved runtime settings: defaults, then file, then flags."""

    seed: int = 0
    variant: str = "sequential"
    batch_size: int = 4096
    channel_capacity: int = 1024
    window_radius: int = 3
    d_max: int = 63
    deadline_us: int = 10_000
    repeats: int = 3
    tolerance_px: int = 1
    max_unmatched: int = 0

    def echo(self) -> str:
        return " ".join("%s=%s" % (f.name, getattr(self, f.name))
                        for f in fields(self))


_VARIANT_NAMES = ("sequential", "simple", "combined", "channels")


def resolve_settings(file_text: Optional[str],
                     overrides: Dict[str, object]) -> CliSettings:
    """Layer a settings file and explicit overrides over the defaults.

    ``overrides`` entries with value None are ignored, so unset CLI flags
    fall through to the file, then to the defaults.
    """
    settings = CliSettings()
    known = {f.name for f in fields(CliSettings)}

    if file_text is not None:
        kv = parse_kv_text(file_text)
        unknown = set(kv) - known
        if unknown:
            raise ConfigError("unknown settings key(s): %s"
                              % ", ".join(sorted(unknown)))
        typed: Dict[str, object] = {}
        for key, value in kv.items():
            typed[key] = value if key == "variant" else _to_int(key, value)
        settings = replace(settings, **typed)

    cleaned = {k: v for k, v in overrides.items() if v is not None}
    unknown = set(cleaned) - known
    if unknown:
        raise ConfigError("unknown override(s): %s" % ", ".join(sorted(unknown)))
    settings = replace(settings, **cleaned)

    if settings.variant not in _VARIANT_NAMES:
        raise ConfigError("variant must be one of %s, got %r"
                          % ("/".join(_VARIANT_NAMES), settings.variant))
    for name in ("batch_size", "channel_capacity"):
        if getattr(settings, name) < 1:
            raise ConfigError("%s must be >= 1" % name)
    for name in ("window_radius", "d_max", "deadline_us", "tolerance_px",
                 "max_unmatched", "seed"):
        if getattr(settings, name) < 0:
            raise ConfigError("%s must be >= 0" % name)
    if settings.repeats < 1:
        raise ConfigError("repeats must be >= 1")
    return settings
