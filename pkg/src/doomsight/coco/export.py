"""Session trees to Coco instance files.

A manifest lists sessions, one per line as ``run <n> <session_dir>``; relative
directories are resolved against the manifest's own directory and image
``file_name`` entries keep the path as written there, so the dataset does
not depend on where it was built.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path, PurePosixPath
from typing import Mapping, NamedTuple, Optional, Sequence

import numpy as np
from PIL import Image

from ..session import FRAME_DIRS, LOG_NAME, frame_name, read_log
from ..things import UNKNOWN_CATEGORY
from .dataset import (SPLITS, CocoDataset, ImageRef, SplitMode, SplitSpec, assign_splits, category_records,
                      emit_json, filter_categories, filter_small, subsample_frames)
from .instances import extract_instances
from .polygons import trace_polygons
from .report import format_stats, plot_stats, stats_rows


class ExportError(Exception):
    pass


class ManifestError(ExportError):
    pass


class MissingSessions(ExportError):
    def __init__(self, missing: Sequence[str]):
        super().__init__("missing sessions: " + ", ".join(missing))
        self.missing = list(missing)


@dataclass(frozen=True)
class ExportConfig:
    min_area: int = 30
    frame_stride: int = 5
    min_category_images: int = 100
    category_table: Optional[Mapping[int, str]] = None   # None: categories recorded in the log
    split: SplitMode = SplitMode.RUN
    episode_of_map: Optional[Mapping[str, int]] = None

    def __post_init__(self):
        if self.min_area < 0:
            raise ValueError(f"min_area must be >= 0, got {self.min_area}")
        if self.frame_stride < 1:
            raise ValueError(f"frame_stride must be >= 1, got {self.frame_stride}")
        if self.min_category_images < 0:
            raise ValueError(f"min_category_images must be >= 0, got {self.min_category_images}")


class SessionEntry(NamedTuple):
    run: int
    path: Path        # resolved location
    label: str        # as written in the manifest, used in file names


def parse_manifest(text: str, base: Path = Path(".")) -> list[SessionEntry]:
    entries = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 2)
        if len(parts) != 3 or parts[0] != "run" or not parts[1].isdigit():
            raise ManifestError(f"manifest line {lineno}: expected 'run <n> <session_dir>'")
        label = PurePosixPath(Path(parts[2]).as_posix()).as_posix()
        entries.append(SessionEntry(int(parts[1]), base / parts[2], label))
    if not entries:
        raise ManifestError("manifest lists no sessions")
    return entries


def read_manifest(path) -> list[SessionEntry]:
    path = Path(path)
    return parse_manifest(path.read_text(encoding="utf-8"), path.parent)


def check_sessions(entries: Sequence[SessionEntry]) -> None:
    missing = [e.label for e in entries if not (e.path / LOG_NAME).is_file()]
    if missing:
        raise MissingSessions(missing)


class _Frame(NamedTuple):
    image: ImageRef
    objects: Path
    spawn: dict          # instance id -> category


def _session_frames(entry: SessionEntry, cfg: ExportConfig) -> list[_Frame]:
    log = read_log(entry.path / LOG_NAME)
    table = cfg.category_table
    spawn = {s.instance_id: (s.category if table is None else table.get(s.doomed_type, UNKNOWN_CATEGORY))
             for s in log.spawns}
    frames = []
    for p in log.poses:
        name = frame_name(p.tic)
        ref = ImageRef(entry.run, log.map_name, p.tic, f"{entry.label}/{FRAME_DIRS[0]}/{name}")
        frames.append(_Frame(ref, entry.path / FRAME_DIRS[2] / name, spawn))
    return frames


def _extract(frame: _Frame, min_area: int):
    with Image.open(frame.objects) as img:
        labels = np.asarray(img)
    height, width = labels.shape
    obs = [o for o in extract_instances(labels, frame.spawn, frame.image) if o.category != UNKNOWN_CATEGORY]
    found = []
    for o in filter_small(obs, min_area):
        found.append((o.instance_id, o.category, o.area, o.bbox, trace_polygons(o.mask, o.offset)))
    return width, height, found


def _extract_star(args):
    return _extract(*args)


@dataclass(frozen=True)
class ExportResult:
    datasets: dict[str, CocoDataset]
    files: tuple[Path, ...]


def build_datasets(entries: Sequence[SessionEntry], cfg: ExportConfig = ExportConfig(),
                   jobs: int = 1) -> dict[str, CocoDataset]:
    check_sessions(entries)
    frames = []
    for k, entry in enumerate(entries):
        frames += [(f.image.run, f.image.map_name, f.image.tic, k, f) for f in _session_frames(entry, cfg)]
    frames.sort(key=lambda t: t[:4])
    ordered = [t[4] for t in frames]
    kept = subsample_frames(ordered, cfg.frame_stride, group=lambda f: (f.image.run, f.image.map_name))
    splits = assign_splits([f.image for f in kept], SplitSpec.with_episodes(cfg.split, cfg.episode_of_map))

    work = [(f, cfg.min_area) for f in kept]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_extract_star, work, chunksize=max(1, len(work) // (jobs * 8))))
    else:
        results = [_extract(*w) for w in work]

    names = sorted({cat for _, _, found in results for _, cat, _, _, _ in found})
    cat_id = {n: k for k, n in enumerate(names, 1)}
    datasets = {s: CocoDataset(categories=category_records(names)) for s in SPLITS}
    ann_id = 0
    for image_id, (frame, (width, height, found)) in enumerate(zip(kept, results), 1):
        ds = datasets[splits[frame.image]]
        ds.images.append({"id": image_id, "file_name": frame.image.file_name, "width": width, "height": height})
        for _, cat, area, bbox, rings in found:
            ann_id += 1
            ds.annotations.append({"id": ann_id, "image_id": image_id, "category_id": cat_id[cat],
                                   "bbox": list(bbox), "area": area, "segmentation": rings, "iscrowd": 0})
    for split, ds in datasets.items():
        ds.description = f"doomsight export ({split})"
    return filter_categories(datasets, cfg.min_category_images)


def export_dataset(entries: Sequence[SessionEntry], out_dir, cfg: ExportConfig = ExportConfig(),
                   jobs: int = 1, figures: bool = False) -> ExportResult:
    """Write instances_{train,val,test}.json and stats.txt (plus stats.png with ``figures``)."""
    datasets = build_datasets(entries, cfg, jobs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for split in SPLITS:
        path = out / f"instances_{split}.json"
        path.write_bytes(emit_json(datasets[split]))
        files.append(path)
    rows = stats_rows(datasets)
    stats = out / "stats.txt"
    stats.write_text(format_stats(rows), encoding="utf-8", newline="\n")
    files.append(stats)
    if figures:
        files.append(plot_stats(rows, out / "stats.png"))
    return ExportResult(datasets, tuple(files))
