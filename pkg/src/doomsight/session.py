"""Extraction sessions: pose tracks in, frame triples and an event log out.

A session renders one frame per track sample and writes, for tic ``t``::

    rgb/<t:06d>.png      8-bit RGB appearance
    depth/<t:06d>.png    16-bit view depth, ``depth_scale`` counts per map unit
    objects/<t:06d>.png  16-bit label ids (0 sky, 1 wall, 2 floor/ceiling, 3+ things)
    log.txt              map, spawn, pose and warning records

Frames may be rendered by a process pool, but files and log records are
always committed by the calling process in tic order.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np
from PIL import Image

from .graphics import Resources
from .level import LevelMap, load_level
from .render import Camera, RenderConfig, render_frame
from .things import THING_TYPES, UNKNOWN_CATEGORY, default_category_table
from .wad import WadArchive, parse_archive

TICRATE = 35
DEPTH_SKY = 65535
DEPTH_MAX = 65534
MAX_INSTANCE_ID = 65532
LOG_NAME = "log.txt"
FRAME_DIRS = ("rgb", "depth", "objects")


class SessionError(Exception):
    pass


class TrackSyntaxError(SessionError, SyntaxError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class NonMonotonicTic(SessionError):
    pass


class EmptyTrack(SessionError):
    pass


class TooManyInstances(SessionError):
    pass


class LogSyntaxError(SessionError):
    pass


# pose tracks -------------------------------------------------------------------

class PoseSample(NamedTuple):
    tic: int
    x: float
    y: float
    eye_z: float
    yaw: float

    def camera(self) -> Camera:
        return Camera(self.x, self.y, self.eye_z, self.yaw)


@dataclass(frozen=True)
class PoseTrack:
    samples: tuple[PoseSample, ...]

    def __post_init__(self):
        if not self.samples:
            raise EmptyTrack("a pose track needs at least one sample")
        for a, b in zip(self.samples, self.samples[1:]):
            if b.tic <= a.tic:
                raise NonMonotonicTic(f"tic {b.tic} follows tic {a.tic}")
        if self.samples[0].tic < 0:
            raise NonMonotonicTic(f"negative tic {self.samples[0].tic}")

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[PoseSample]:
        return iter(self.samples)


def parse_pose_script(text: str) -> PoseTrack:
    """Parse ``tic x y z yaw`` lines; ``#`` starts a comment."""
    samples = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise TrackSyntaxError(lineno, f"expected 5 fields 'tic x y z yaw', got {len(parts)}")
        try:
            tic = int(parts[0])
        except ValueError:
            raise TrackSyntaxError(lineno, f"tic must be an integer, got {parts[0]!r}") from None
        if tic < 0:
            raise TrackSyntaxError(lineno, f"tic must be >= 0, got {tic}")
        values = []
        for token in parts[1:]:
            try:
                v = float(token)
            except ValueError:
                raise TrackSyntaxError(lineno, f"not a number: {token!r}") from None
            if not math.isfinite(v):
                raise TrackSyntaxError(lineno, f"not a finite number: {token!r}")
            values.append(v)
        if samples and tic <= samples[-1].tic:
            raise NonMonotonicTic(f"line {lineno}: tic {tic} follows tic {samples[-1].tic}")
        samples.append(PoseSample(tic, *values))
    if not samples:
        raise EmptyTrack("pose script contains no samples")
    return PoseTrack(tuple(samples))


def read_pose_script(path) -> PoseTrack:
    return parse_pose_script(Path(path).read_text(encoding="utf-8"))


# log records -------------------------------------------------------------------

@dataclass(frozen=True)
class MapStart:
    name: str


@dataclass(frozen=True)
class Spawn:
    instance_id: int
    doomed_type: int
    category: str
    x: float
    y: float


@dataclass(frozen=True)
class Pose:
    tic: int
    x: float
    y: float
    z: float
    yaw: float


@dataclass(frozen=True)
class Warn:
    tic: int
    message: str


Event = Union[MapStart, Spawn, Pose, Warn]


def _fixed(v: float) -> str:
    s = f"{v:.3f}"
    return "0.000" if s == "-0.000" else s


def format_event(event: Event) -> str:
    if isinstance(event, MapStart):
        return f"map {event.name}\n"
    if isinstance(event, Spawn):
        return (f"spawn {event.instance_id} {event.doomed_type} {event.category} "
                f"{_fixed(event.x)} {_fixed(event.y)}\n")
    if isinstance(event, Pose):
        return f"tic {event.tic} pose {_fixed(event.x)} {_fixed(event.y)} {_fixed(event.z)} {_fixed(event.yaw)}\n"
    if isinstance(event, Warn):
        message = " ".join(event.message.split())  # one line, single spaces
        return f"warn {event.tic} {message}\n"
    raise TypeError(f"not a log event: {event!r}")


@dataclass(frozen=True)
class SessionLog:
    map_name: str
    spawns: tuple[Spawn, ...]
    poses: tuple[Pose, ...]
    warnings: tuple[Warn, ...]

    def track(self) -> PoseTrack:
        return PoseTrack(tuple(PoseSample(p.tic, p.x, p.y, p.z, p.yaw) for p in self.poses))

    def spawn_table(self) -> dict[int, Spawn]:
        return {s.instance_id: s for s in self.spawns}


def parse_event(line: str) -> Event:
    parts = line.split()
    try:
        kind = parts[0] if parts else ""
        if kind == "map" and len(parts) == 2:
            return MapStart(parts[1])
        if kind == "spawn" and len(parts) == 6:
            return Spawn(int(parts[1]), int(parts[2]), parts[3], float(parts[4]), float(parts[5]))
        if kind == "tic" and len(parts) == 7 and parts[2] == "pose":
            return Pose(int(parts[1]), *map(float, parts[3:]))
        if kind == "warn" and len(parts) >= 3:
            return Warn(int(parts[1]), line.split(None, 2)[2].rstrip("\n"))
    except ValueError as e:
        raise LogSyntaxError(f"bad log record {line.rstrip()!r}: {e}") from None
    raise LogSyntaxError(f"bad log record {line.rstrip()!r}")


def parse_log(text: str) -> SessionLog:
    map_name = None
    spawns, poses, warnings = [], [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            event = parse_event(line)
        except LogSyntaxError as e:
            raise LogSyntaxError(f"line {lineno}: {e}") from None
        if isinstance(event, MapStart):
            if map_name is not None:
                raise LogSyntaxError(f"line {lineno}: second map record")
            map_name = event.name
        elif isinstance(event, Spawn):
            if poses:
                raise LogSyntaxError(f"line {lineno}: spawn record after the first pose")
            spawns.append(event)
        elif isinstance(event, Pose):
            poses.append(event)
        else:
            warnings.append(event)
    if map_name is None:
        raise LogSyntaxError("log has no map record")
    return SessionLog(map_name, tuple(spawns), tuple(poses), tuple(warnings))


def read_log(path) -> SessionLog:
    return parse_log(Path(path).read_text(encoding="utf-8"))


# image encodings ---------------------------------------------------------------

def encode_depth(depth: np.ndarray, cfg: RenderConfig = RenderConfig()) -> np.ndarray:
    d = np.asarray(depth, np.float64)
    finite = np.isfinite(d)
    counts = np.rint(np.clip(np.where(finite, d, 0.0) * cfg.depth_scale, 0, DEPTH_MAX))
    return np.where(finite, counts, DEPTH_SKY).astype(np.uint16)


def decode_depth(image: np.ndarray, cfg: RenderConfig = RenderConfig()) -> np.ndarray:
    img = np.asarray(image)
    return np.where(img == DEPTH_SKY, np.inf, img / cfg.depth_scale)


def encode_labels(labels: np.ndarray) -> np.ndarray:
    lab = np.asarray(labels)
    if lab.size and int(lab.max()) > MAX_INSTANCE_ID + 3:
        raise TooManyInstances(f"instance id {int(lab.max()) - 3} exceeds {MAX_INSTANCE_ID}")
    if lab.size and int(lab.min()) < 0:
        raise ValueError("negative label id")
    return lab.astype(np.uint16)


def png_bytes(array: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(array).save(buf, format="PNG", compress_level=6)
    return buf.getvalue()


def read_png(path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img)


def frame_name(tic: int) -> str:
    return f"{tic:06d}.png"


# sessions ----------------------------------------------------------------------

def default_episode_of_map(map_name: str) -> Optional[int]:
    """ExMy maps use x; MAPxx maps are grouped in blocks of eight."""
    name = map_name.upper()
    if len(name) == 4 and name[0] == "E" and name[2] == "M" and name[1].isdigit() and name[3].isdigit():
        ep = int(name[1])
        return ep if 1 <= ep <= 4 else None
    if name.startswith("MAP") and name[3:].isdigit():
        n = int(name[3:])
        return (n - 1) // 8 + 1 if 1 <= n <= 32 else None
    return None


@dataclass(frozen=True)
class SessionConfig:
    out_dir: Path
    map_name: str
    render: RenderConfig = RenderConfig()
    run_id: int = 1
    episode_of_map: Optional[Mapping[str, int]] = None
    category_table: Optional[Mapping[int, str]] = None
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")
        if self.episode() is None:
            raise ValueError(f"no episode for map {self.map_name}")

    def episode(self) -> Optional[int]:
        if self.episode_of_map is not None:
            return self.episode_of_map.get(self.map_name)
        return default_episode_of_map(self.map_name)

    def categories(self) -> Mapping[int, str]:
        return default_category_table() if self.category_table is None else self.category_table


@dataclass(frozen=True)
class SessionSummary:
    frames_written: int
    warnings: tuple[str, ...] = field(default=())


def spawn_records(level: LevelMap, table: Mapping[int, str]) -> tuple[list[Spawn], list[str]]:
    spawns, warnings = [], []
    for t in level.things:
        category = table.get(t.doomed_type)
        if category is None:
            known = THING_TYPES.get(t.doomed_type)
            if known is not None and known.sprite is None:
                category = known.category  # starts and markers are never drawn
            else:
                category = UNKNOWN_CATEGORY
                warnings.append(f"thing {t.instance_id} has unknown type {t.doomed_type}")
        spawns.append(Spawn(t.instance_id, t.doomed_type, category, t.x, t.y))
    return spawns, warnings


# Per-process state for pool workers: the archive is parsed once per worker.
_WORKER: dict = {}


def _init_worker(raw: bytes, map_name: str, render: RenderConfig) -> None:
    archive = parse_archive(raw)
    _WORKER.update(level=load_level(archive, map_name), resources=Resources.from_archive(archive),
                   render=render)


def _render_encoded(level, resources, render, sample: PoseSample) -> tuple[bytes, bytes, bytes, tuple[str, ...]]:
    fb = render_frame(level, level.things, sample.camera(), render, resources)
    return (png_bytes(fb.color), png_bytes(encode_depth(fb.depth, render)),
            png_bytes(encode_labels(fb.label)), fb.warnings)


def _worker_render(sample: PoseSample):
    return _render_encoded(_WORKER["level"], _WORKER["resources"], _WORKER["render"], sample)


def _frames(archive: WadArchive, cfg: SessionConfig, level: LevelMap,
            samples: Sequence[PoseSample]) -> Iterable:
    if cfg.jobs == 1 or len(samples) < 2:
        resources = Resources.from_archive(archive)
        for s in samples:
            yield _render_encoded(level, resources, cfg.render, s)
        return
    with ProcessPoolExecutor(max_workers=cfg.jobs, initializer=_init_worker,
                             initargs=(bytes(archive.raw), cfg.map_name, cfg.render)) as pool:
        yield from pool.map(_worker_render, samples, chunksize=max(1, len(samples) // (cfg.jobs * 8)))


def run_session(archive: WadArchive, cfg: SessionConfig, track: PoseTrack) -> SessionSummary:
    """Render every track sample of ``cfg.map_name`` into ``cfg.out_dir``."""
    if not len(track):
        raise EmptyTrack("a pose track needs at least one sample")
    level = load_level(archive, cfg.map_name)
    out = cfg.out_dir
    for sub in FRAME_DIRS:
        (out / sub).mkdir(parents=True, exist_ok=True)
    spawns, spawn_warnings = spawn_records(level, cfg.categories())
    seen: set[str] = set()
    warnings: list[str] = []
    first_tic = track.samples[0].tic
    written = 0
    with open(out / LOG_NAME, "w", encoding="utf-8", newline="\n") as log:
        log.write(format_event(MapStart(level.name)))
        for s in spawns:
            log.write(format_event(s))
        for w in spawn_warnings:
            seen.add(w)
            warnings.append(w)
            log.write(format_event(Warn(first_tic, w)))
        for sample, (rgb, depth, objects, frame_warnings) in zip(track, _frames(archive, cfg, level, track.samples)):
            name = frame_name(sample.tic)
            for sub, data in zip(FRAME_DIRS, (rgb, depth, objects)):
                (out / sub / name).write_bytes(data)
            log.write(format_event(Pose(sample.tic, sample.x, sample.y, sample.eye_z, sample.yaw)))
            for w in frame_warnings:
                if w not in seen:
                    seen.add(w)
                    warnings.append(w)
                    log.write(format_event(Warn(sample.tic, w)))
            written += 1
    return SessionSummary(written, tuple(warnings))

