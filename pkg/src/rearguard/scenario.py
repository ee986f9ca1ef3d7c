"""Synthetic rear-traffic world: trajectories, head motion, detector model,
and line-delimited trace files.

The generator produces exactly what the live system would see per tick:
an IMU pose and a list of detection boxes, alongside the ground truth
the evaluation harness scores against.  Detection boxes are built with
the same forward model the tracker inverts (contact row offset from the
horizon), so a noise-free trace round-trips through depth estimation to
the true range.

Everything is driven by one seeded generator in a fixed order, so a
given config produces byte-identical traces every time.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .geometry import (
    BoundingBox2D,
    CameraIntrinsics,
    ImuPose,
    horizon_line,
    normalize_angle,
    user_to_camera_planar,
)

log = logging.getLogger(__name__)

TRACE_VERSION = 1

USER_MODES = ("standing", "walking", "jogging")
ROAD_TYPES = ("along", "intersection")
LIGHT_CONDITIONS = ("day", "night")
VEHICLE_CLASSES = ("car", "cycle")
VEHICLE_PROFILES = ("constant", "decelerate-at", "lane-change-at")

# physical extent of a detection target, meters (width, height)
CLASS_DIMENSIONS = {"car": (1.8, 1.5), "cycle": (0.6, 1.7)}

# the reference approach the detector medians are calibrated against
REF_APPROACH_SPEED = 8.33   # m/s
REF_APPROACH_START = 40.0   # m

DEFAULT_USER_SPEED = {"standing": 0.0, "walking": 1.4, "jogging": 2.6}

# yaw amplitude, yaw period, pitch amplitude, pitch period, jitter std
DEFAULT_HEAD_MOTION = {
    "standing": (0.05, 6.0, 0.02, 5.0, 0.002),
    "walking": (0.10, 4.0, 0.04, 3.5, 0.004),
    "jogging": (0.15, 2.5, 0.06, 2.0, 0.008),
}


class InvalidConfig(ValueError):
    """Scenario config rejected; the message names the offending field."""


class ParseError(ValueError):
    """Trace file unreadable; the message carries the line number."""


class VersionMismatch(ValueError):
    pass


# ------------------------------------------------------------------ config

@dataclass(frozen=True)
class CameraConfig:
    intrinsics: CameraIntrinsics = CameraIntrinsics(600.0, 600.0, 320.0, 320.0)
    image_size: tuple = (640, 640)
    camera_height: float = 1.55
    margin_px: float = 80.0


@dataclass(frozen=True)
class UserConfig:
    mode: str = "walking"
    speed: float | None = None     # default depends on mode
    height: float = 1.75

    def resolved_speed(self) -> float:
        return DEFAULT_USER_SPEED[self.mode] if self.speed is None else self.speed


@dataclass(frozen=True)
class HeadMotionConfig:
    yaw_amplitude: float
    yaw_period: float
    pitch_amplitude: float
    pitch_period: float
    jitter_std: float

    @classmethod
    def for_mode(cls, mode: str) -> "HeadMotionConfig":
        return cls(*DEFAULT_HEAD_MOTION[mode])


@dataclass(frozen=True)
class VehicleConfig:
    cls: str
    spawn_time: float
    x0: float           # user-frame lateral offset at spawn
    z0: float           # user-frame forward offset at spawn (behind is negative)
    speed: float        # world speed along its heading
    heading: float = 0.0   # world heading, 0 points along +z (user's forward)
    profile: str = "constant"
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DetectorConfig:
    fov: float = 1.2                        # full angle, radians
    box_noise_px: float = 1.5
    first_detect_m: dict = field(default_factory=lambda: {"car": 12.0, "cycle": 6.0})
    spread_m: dict = field(default_factory=lambda: {"car": 1.2, "cycle": 0.8})
    night_factor: float = 0.6               # < 1 shrinks effective visibility
    occlusion_sector: float = math.radians(3.0)


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int
    duration: float = 60.0
    tick_rate: float = 10.0
    user: UserConfig = UserConfig()
    head_motion: HeadMotionConfig | None = None
    vehicles: tuple = ()
    road: str = "along"
    light: str = "day"
    detector: DetectorConfig = DetectorConfig()
    camera: CameraConfig = CameraConfig()

    def resolved_head_motion(self) -> HeadMotionConfig:
        return self.head_motion or HeadMotionConfig.for_mode(self.user.mode)


@dataclass(frozen=True)
class Frame:
    t: float
    pose: ImuPose
    detections: tuple


@dataclass(frozen=True)
class GroundTruthObject:
    id: int
    cls: str
    x: float
    z: float
    vx: float
    vz: float
    height: float

    @property
    def range(self) -> float:
        return math.hypot(self.x, self.z)


@dataclass(frozen=True)
class GroundTruthTick:
    t: float
    pose: ImuPose
    objects: tuple


def _require(cond: bool, fieldname: str, message: str):
    if not cond:
        raise InvalidConfig(f"{fieldname}: {message}")


def validate_config(cfg: ScenarioConfig) -> ScenarioConfig:
    _require(isinstance(cfg.seed, int), "seed", "must be an integer")
    _require(cfg.duration > 0, "duration", "must be positive")
    _require(cfg.tick_rate > 0, "tick_rate", "must be positive")
    _require(cfg.user.mode in USER_MODES, "user.mode", f"must be one of {USER_MODES}")
    _require(cfg.user.resolved_speed() >= 0, "user.speed", "must be non-negative")
    _require(cfg.road in ROAD_TYPES, "road", f"must be one of {ROAD_TYPES}")
    _require(cfg.light in LIGHT_CONDITIONS, "light", f"must be one of {LIGHT_CONDITIONS}")
    _require(0 < cfg.detector.fov < math.pi, "detector.fov", "must be in (0, pi)")
    _require(0 < cfg.detector.night_factor <= 1, "detector.night_factor", "must be in (0, 1]")
    _require(cfg.detector.box_noise_px >= 0, "detector.box_noise_px", "must be non-negative")
    hm = cfg.resolved_head_motion()
    _require(hm.yaw_period > 0, "head_motion.yaw_period", "must be positive")
    _require(hm.pitch_period > 0, "head_motion.pitch_period", "must be positive")
    _require(hm.jitter_std >= 0, "head_motion.jitter_std", "must be non-negative")
    _require(cfg.camera.camera_height > 0, "camera.camera_height", "must be positive")
    for i, v in enumerate(cfg.vehicles):
        tag = f"vehicles[{i}]"
        _require(v.cls in VEHICLE_CLASSES, f"{tag}.cls", f"must be one of {VEHICLE_CLASSES}")
        _require(0 <= v.spawn_time < cfg.duration, f"{tag}.spawn_time", "must lie within the scenario duration")
        _require(v.speed >= 0, f"{tag}.speed", "must be non-negative")
        _require(v.profile in VEHICLE_PROFILES, f"{tag}.profile", f"must be one of {VEHICLE_PROFILES}")
        if v.profile == "decelerate-at":
            _require("at" in v.params, f"{tag}.params.at", "required for decelerate-at")
            _require(v.params.get("rate", 0) > 0, f"{tag}.params.rate", "must be positive")
        if v.profile == "lane-change-at":
            _require("at" in v.params, f"{tag}.params.at", "required for lane-change-at")
            _require("to_x" in v.params, f"{tag}.params.to_x", "required for lane-change-at")
            _require(v.params.get("duration", 0) > 0, f"{tag}.params.duration", "must be positive")
    return cfg


def config_from_dict(raw: dict) -> ScenarioConfig:
    """Build a validated ScenarioConfig from plain dict/YAML data."""
    try:
        camera_raw = dict(raw.get("camera", {}))
        intr_raw = camera_raw.pop("intrinsics", {})
        camera = CameraConfig(
            intrinsics=CameraIntrinsics(**intr_raw) if intr_raw else CameraConfig().intrinsics,
            **{k: tuple(v) if k == "image_size" else v for k, v in camera_raw.items()},
        )
        head_raw = raw.get("head_motion")
        detector_raw = dict(raw.get("detector", {}))
        if "occlusion_sector_deg" in detector_raw:
            detector_raw["occlusion_sector"] = math.radians(detector_raw.pop("occlusion_sector_deg"))
        cfg = ScenarioConfig(
            seed=raw["seed"],
            duration=raw.get("duration", 60.0),
            tick_rate=raw.get("tick_rate", 10.0),
            user=UserConfig(**raw.get("user", {})),
            head_motion=HeadMotionConfig(**head_raw) if head_raw else None,
            vehicles=tuple(VehicleConfig(**v) for v in raw.get("vehicles", ())),
            road=raw.get("road", "along"),
            light=raw.get("light", "day"),
            detector=DetectorConfig(**detector_raw),
            camera=camera,
        )
    except KeyError as exc:
        raise InvalidConfig(f"{exc.args[0]}: missing") from exc
    except TypeError as exc:
        raise InvalidConfig(str(exc)) from exc
    return validate_config(cfg)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    intr = cfg.camera.intrinsics
    return {
        "seed": cfg.seed,
        "duration": cfg.duration,
        "tick_rate": cfg.tick_rate,
        "user": {"mode": cfg.user.mode, "speed": cfg.user.resolved_speed(), "height": cfg.user.height},
        "head_motion": vars(cfg.resolved_head_motion()).copy(),
        "vehicles": [
            {
                "cls": v.cls, "spawn_time": v.spawn_time, "x0": v.x0, "z0": v.z0,
                "speed": v.speed, "heading": v.heading, "profile": v.profile,
                "params": dict(v.params),
            }
            for v in cfg.vehicles
        ],
        "road": cfg.road,
        "light": cfg.light,
        "detector": {
            "fov": cfg.detector.fov,
            "box_noise_px": cfg.detector.box_noise_px,
            "first_detect_m": dict(cfg.detector.first_detect_m),
            "spread_m": dict(cfg.detector.spread_m),
            "night_factor": cfg.detector.night_factor,
            "occlusion_sector": cfg.detector.occlusion_sector,
        },
        "camera": {
            "intrinsics": {"f_x": intr.f_x, "f_y": intr.f_y, "c_x": intr.c_x, "c_y": intr.c_y},
            "image_size": list(cfg.camera.image_size),
            "camera_height": cfg.camera.camera_height,
            "margin_px": cfg.camera.margin_px,
        },
    }


# -------------------------------------------------------------- detector

@lru_cache(maxsize=64)
def _calibrated_midpoint(target_median: float, spread: float, tick_rate: float = 10.0) -> float:
    """Solve the logistic midpoint so that the median first-detection range
    on the reference approach equals target_median.

    The reference approach closes at REF_APPROACH_SPEED with one detection
    trial per tick; the median is where the survival product crosses 1/2.
    """
    step = REF_APPROACH_SPEED / tick_rate
    ranges = np.arange(REF_APPROACH_START, target_median - 1e-9, -step)

    def log_survival(r0: float) -> float:
        p = 1.0 / (1.0 + np.exp((ranges - r0) / spread))
        p = np.clip(p, 0.0, 1.0 - 1e-12)
        return float(np.sum(np.log1p(-p)))

    lo, hi = target_median - 6.0, target_median + 6.0
    target = math.log(0.5)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        # log_survival decreases as the midpoint grows (easier detection)
        if log_survival(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def detector_model(range_m: float, cls: str, light: str, det: DetectorConfig,
                   tick_rate: float = 10.0) -> float:
    """Per-trial detection probability at the given range."""
    if range_m < 0:
        raise ValueError("range must be non-negative")
    effective = range_m / det.night_factor if light == "night" else range_m
    r0 = _calibrated_midpoint(det.first_detect_m[cls], det.spread_m[cls], tick_rate)
    return 1.0 / (1.0 + math.exp((effective - r0) / det.spread_m[cls]))


class _CleanBox(NamedTuple):
    u: float          # box centre column
    v_bottom: float   # ground-contact row
    w_px: float
    h_px: float
    d: float          # camera-forward depth
    bearing: float


def _project_clean_box(x: float, z: float, cls: str, pose: ImuPose,
                       cam: CameraConfig) -> _CleanBox | None:
    """Noise-free image box for an object at user coordinates (x, z).

    None when the object is at or behind the camera plane (closer than
    half a metre counts as behind; a box that close is degenerate).
    """
    n, d = user_to_camera_planar(x, z, pose.yaw)
    if d <= 0.5:
        return None
    intr = cam.intrinsics
    w_obj, h_obj = CLASS_DIMENSIONS[cls]
    u = intr.c_x + intr.f_x * (n / d) * math.cos(pose.pitch)
    v_bottom = horizon_line(intr, pose.pitch) + intr.f_y * cam.camera_height / d
    h_px = intr.f_y * h_obj / d
    w_px = intr.f_x * w_obj / d
    return _CleanBox(u, v_bottom, w_px, h_px, d, math.atan2(n, d))


def in_sensing_footprint(x: float, z: float, cls: str, pose: ImuPose,
                         cam: CameraConfig, fov: float = 1.2) -> bool:
    """Whether an object could in principle appear in a frame taken now.

    Applies the deterministic gates only (behind the camera plane, view
    cone, padded image bounds), not the detection trial or occlusion.
    Objects closer than the image bottom allows have a ground contact
    below the frame and are invisible to this sensor regardless of the
    detector.
    """
    proj = _project_clean_box(x, z, cls, pose, cam)
    if proj is None or abs(proj.bearing) > fov / 2:
        return False
    img_w, img_h = cam.image_size
    margin = cam.margin_px
    if not (-margin <= proj.u - proj.w_px / 2 and proj.u + proj.w_px / 2 <= img_w + margin):
        return False
    if not (-margin <= proj.v_bottom - proj.h_px and proj.v_bottom <= img_h + margin):
        return False
    return True


# -------------------------------------------------------------- generation

class _VehicleSim:
    """Per-vehicle world-frame kinematics, stepped tick by tick."""

    def __init__(self, cfg: VehicleConfig, z_user_at_spawn: float, spawn_t: float):
        self.cfg = cfg
        self.speed = cfg.speed
        self.x = cfg.x0
        self.z = cfg.z0 + z_user_at_spawn
        self.base_x = cfg.x0
        self.vx, self.vz = self._velocity(spawn_t)

    def _velocity(self, t: float) -> tuple:
        p = self.cfg
        vx = self.speed * math.sin(p.heading)
        vz = self.speed * math.cos(p.heading)
        if p.profile == "lane-change-at":
            t0, dur = p.params["at"], p.params["duration"]
            if t0 <= t < t0 + dur:
                shift = p.params["to_x"] - self.base_x
                vx += shift * 0.5 * math.pi / dur * math.sin(math.pi * (t - t0) / dur)
        return vx, vz

    def step(self, t: float, dt: float):
        p = self.cfg
        if p.profile == "decelerate-at" and t >= p.params["at"]:
            self.speed = max(0.0, self.speed - p.params["rate"] * dt)
        self.vx, self.vz = self._velocity(t)
        self.x += self.vx * dt
        self.z += self.vz * dt


def generate(config: ScenarioConfig):
    """Produce (frames, truth) for a validated scenario config."""
    validate_config(config)
    rng = np.random.default_rng(config.seed)
    dt = 1.0 / config.tick_rate
    n_ticks = int(round(config.duration * config.tick_rate))
    hm = config.resolved_head_motion()
    user_speed = config.user.resolved_speed()
    cam = config.camera
    intr = cam.intrinsics
    img_w, img_h = cam.image_size
    margin = cam.margin_px

    yaw_phase = rng.uniform(0.0, 2.0 * math.pi)
    pitch_phase = rng.uniform(0.0, 2.0 * math.pi)

    sims = [None] * len(config.vehicles)
    next_object_id = 1
    object_ids = [None] * len(config.vehicles)

    frames = []
    truth = []
    z_user = 0.0
    for k in range(n_ticks):
        t = k / config.tick_rate
        if k > 0:
            z_user += user_speed * dt

        pitch = hm.pitch_amplitude * math.sin(2 * math.pi * t / hm.pitch_period + pitch_phase)
        yaw = math.pi + hm.yaw_amplitude * math.sin(2 * math.pi * t / hm.yaw_period + yaw_phase)
        pitch += rng.normal(0.0, hm.jitter_std)
        yaw += rng.normal(0.0, hm.jitter_std)
        pose = ImuPose(pitch=pitch, yaw=normalize_angle(yaw))

        objects = []
        for i, vcfg in enumerate(config.vehicles):
            if t < vcfg.spawn_time:
                continue
            if sims[i] is None:
                sims[i] = _VehicleSim(vcfg, z_user, t)
                object_ids[i] = next_object_id
                next_object_id += 1
            elif k > 0:
                sims[i].step(t, dt)
            sim = sims[i]
            objects.append(
                GroundTruthObject(
                    id=object_ids[i],
                    cls=vcfg.cls,
                    x=sim.x,
                    z=sim.z - z_user,
                    vx=sim.vx,
                    vz=sim.vz - user_speed,
                    height=CLASS_DIMENSIONS[vcfg.cls][1],
                )
            )
        truth.append(GroundTruthTick(t=t, pose=pose, objects=tuple(objects)))

        # geometric visibility first, then the detection trial
        visible = []
        for obj in objects:
            proj = _project_clean_box(obj.x, obj.z, obj.cls, pose, cam)
            if proj is None:
                continue
            if abs(proj.bearing) > config.detector.fov / 2:
                continue
            visible.append((obj, proj))
        detections = []
        for obj, proj in visible:
            occluded = any(
                other.range < obj.range
                and abs(other_proj.bearing - proj.bearing) < config.detector.occlusion_sector
                for other, other_proj in visible
                if other.id != obj.id
            )
            if occluded:
                continue
            p_det = detector_model(obj.range, obj.cls, config.light, config.detector, config.tick_rate)
            if rng.random() >= p_det:
                continue
            u, v_bottom = proj.u, proj.v_bottom
            w_px, h_px = proj.w_px, proj.h_px
            if config.detector.box_noise_px > 0:
                noise = rng.normal(0.0, config.detector.box_noise_px, size=4)
                u, v_bottom = u + noise[0], v_bottom + noise[1]
                w_px = max(2.0, w_px + noise[2])
                h_px = max(2.0, h_px + noise[3])
            if not (-margin <= u - w_px / 2 and u + w_px / 2 <= img_w + margin):
                continue
            if not (-margin <= v_bottom - h_px and v_bottom <= img_h + margin):
                continue
            detections.append(
                BoundingBox2D(
                    x=u - w_px / 2, y=v_bottom - h_px, w=w_px, h=h_px,
                    cls=obj.cls, score=p_det,
                )
            )
        frames.append(Frame(t=t, pose=pose, detections=tuple(detections)))

    log.info("generated %d ticks, %d vehicles", n_ticks, len(config.vehicles))
    return frames, truth


# ---------------------------------------------------------------- trace IO

@dataclass(frozen=True)
class TraceHeader:
    intrinsics: CameraIntrinsics
    image_size: tuple
    camera_height: float
    tick_rate: float
    seed: int
    duration: float


def _header_record(config: ScenarioConfig, kind: str) -> dict:
    intr = config.camera.intrinsics
    return {
        "kind": kind,
        "version": TRACE_VERSION,
        "intrinsics": {"f_x": intr.f_x, "f_y": intr.f_y, "c_x": intr.c_x, "c_y": intr.c_y},
        "image_size": list(config.camera.image_size),
        "camera_height": config.camera.camera_height,
        "tick_rate": config.tick_rate,
        "seed": config.seed,
        "duration": config.duration,
    }


def _parse_header(line: str, expected_kind: str) -> TraceHeader:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line 1: {exc}") from exc
    if raw.get("version") != TRACE_VERSION:
        raise VersionMismatch(f"expected version {TRACE_VERSION}, got {raw.get('version')!r}")
    if raw.get("kind") != expected_kind:
        raise ParseError(f"line 1: expected kind {expected_kind!r}, got {raw.get('kind')!r}")
    for fieldname in ("intrinsics", "camera_height", "tick_rate", "seed", "duration"):
        if fieldname not in raw:
            raise ParseError(f"line 1: header missing field {fieldname!r}")
    intr = raw["intrinsics"]
    for sub in ("f_x", "f_y", "c_x", "c_y"):
        if sub not in intr:
            raise ParseError(f"line 1: header missing field intrinsics.{sub!r}")
    return TraceHeader(
        intrinsics=CameraIntrinsics(**intr),
        image_size=tuple(raw.get("image_size", (640, 640))),
        camera_height=raw["camera_height"],
        tick_rate=raw["tick_rate"],
        seed=raw["seed"],
        duration=raw["duration"],
    )


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def write_trace(path, config: ScenarioConfig, frames) -> None:
    with open(path, "w") as fh:
        fh.write(_dump(_header_record(config, "trace-header")) + "\n")
        for f in frames:
            fh.write(
                _dump(
                    {
                        "kind": "frame",
                        "t": f.t,
                        "pitch": f.pose.pitch,
                        "yaw": f.pose.yaw,
                        "detections": [
                            [d.x, d.y, d.w, d.h, d.cls, d.score] for d in f.detections
                        ],
                    }
                )
                + "\n"
            )


def read_trace(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("line 1: empty trace file")
    header = _parse_header(lines[0], "trace-header")
    frames = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            frames.append(
                Frame(
                    t=raw["t"],
                    pose=ImuPose(pitch=raw["pitch"], yaw=raw["yaw"]),
                    detections=tuple(
                        BoundingBox2D(x=d[0], y=d[1], w=d[2], h=d[3], cls=d[4], score=d[5])
                        for d in raw["detections"]
                    ),
                )
            )
        except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
            raise ParseError(f"line {i}: {exc}") from exc
    return header, frames


def write_truth(path, config: ScenarioConfig, truth) -> None:
    with open(path, "w") as fh:
        fh.write(_dump(_header_record(config, "truth-header")) + "\n")
        for tick in truth:
            fh.write(
                _dump(
                    {
                        "kind": "truth",
                        "t": tick.t,
                        "pitch": tick.pose.pitch,
                        "yaw": tick.pose.yaw,
                        "objects": [
                            [o.id, o.cls, o.x, o.z, o.vx, o.vz, o.height]
                            for o in tick.objects
                        ],
                    }
                )
                + "\n"
            )


def read_truth(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("line 1: empty truth file")
    header = _parse_header(lines[0], "truth-header")
    truth = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            truth.append(
                GroundTruthTick(
                    t=raw["t"],
                    pose=ImuPose(pitch=raw["pitch"], yaw=raw["yaw"]),
                    objects=tuple(
                        GroundTruthObject(
                            id=o[0], cls=o[1], x=o[2], z=o[3], vx=o[4], vz=o[5], height=o[6]
                        )
                        for o in raw["objects"]
                    ),
                )
            )
        except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
            raise ParseError(f"line {i}: {exc}") from exc
    return header, truth
