"""Dataset construction rules and Coco JSON serialization."""
from __future__ import annotations

import enum
import json
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, Mapping, NamedTuple, Optional, Sequence

from .. import __version__
from ..session import default_episode_of_map

SPLITS = ("train", "val", "test")
SUPERCATEGORY = "doom"


class UnmappedImage(KeyError):
    pass


class ImageRef(NamedTuple):
    run: int
    map_name: str
    tic: int
    file_name: str


def filter_small(observations: Iterable, min_area: int) -> list:
    """Drop observations strictly smaller than ``min_area`` pixels."""
    return [o for o in observations if o.area >= min_area]


def _run_and_map(img) -> tuple:
    return img.run, img.map_name


def subsample_frames(images: Sequence, stride: int, group: Callable[[Any], Any] = _run_and_map) -> list:
    """Keep positions 0, stride, 2*stride, ... of each (run, map) group, in input order."""
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    seen: dict[Any, int] = defaultdict(int)
    out = []
    for img in images:
        key = group(img)
        if seen[key] % stride == 0:
            out.append(img)
        seen[key] += 1
    return out


class SplitMode(enum.Enum):
    RUN = "run"
    EPISODE = "episode"


_RUN_SPLIT = {1: "train", 2: "val", 3: "test"}
_EPISODE_SPLIT = {1: "train", 2: "train", 3: "val", 4: "test"}


@dataclass(frozen=True)
class SplitSpec:
    mode: SplitMode = SplitMode.RUN
    run_of_image: Callable[[Any], Optional[int]] = field(default=lambda img: img.run)
    episode_of_image: Callable[[Any], Optional[int]] = field(
        default=lambda img: default_episode_of_map(img.map_name))

    @classmethod
    def with_episodes(cls, mode: SplitMode, episode_of_map: Optional[Mapping[str, int]] = None) -> "SplitSpec":
        if episode_of_map is None:
            return cls(mode)
        return cls(mode, episode_of_image=lambda img: episode_of_map.get(img.map_name))


def assign_splits(images: Iterable, spec: SplitSpec) -> dict[Any, str]:
    out = {}
    for img in images:
        if spec.mode is SplitMode.RUN:
            key, table = spec.run_of_image(img), _RUN_SPLIT
        else:
            key, table = spec.episode_of_image(img), _EPISODE_SPLIT
        if key not in table:
            raise UnmappedImage(f"{img} has no {spec.mode.value} mapping (got {key!r})")
        out[img] = table[key]
    return out


# Coco structures ------------------------------------------------------------------

@dataclass
class CocoDataset:
    images: list[dict] = field(default_factory=list)
    annotations: list[dict] = field(default_factory=list)
    categories: list[dict] = field(default_factory=list)
    description: str = "doomsight export"


def category_records(names: Iterable[str]) -> list[dict]:
    return [{"id": k, "name": n, "supercategory": SUPERCATEGORY}
            for k, n in enumerate(sorted(set(names)), 1)]


def filter_categories(datasets: Mapping[str, CocoDataset], min_category_images: int) -> dict[str, CocoDataset]:
    """Keep categories present in at least ``min_category_images`` distinct train images.

    Only the train split is counted.  Removed categories lose their
    annotations in every split; images are kept.  Surviving categories are
    renumbered 1..K in name order.
    """
    names = {}
    for ds in datasets.values():
        for c in ds.categories:
            names.setdefault(c["name"], None)
    train = datasets.get("train", CocoDataset())
    train_names = {c["id"]: c["name"] for c in train.categories}
    images_of: dict[str, set] = defaultdict(set)
    for a in train.annotations:
        images_of[train_names[a["category_id"]]].add(a["image_id"])
    kept = sorted(n for n in names if len(images_of[n]) >= min_category_images)
    new_id = {n: k for k, n in enumerate(kept, 1)}
    cats = category_records(kept)
    out = {}
    for split, ds in datasets.items():
        old = {c["id"]: c["name"] for c in ds.categories}
        anns = [dict(a, category_id=new_id[old[a["category_id"]]])
                for a in ds.annotations if old[a["category_id"]] in new_id]
        out[split] = replace(ds, images=list(ds.images), annotations=anns,
                             categories=[dict(c) for c in cats])
    return out


_IMAGE_KEYS = ("id", "file_name", "width", "height")
_ANN_KEYS = ("id", "image_id", "category_id", "bbox", "area", "segmentation", "iscrowd")
_CAT_KEYS = ("id", "name", "supercategory")


def _ordered(records: Iterable[dict], keys: Sequence[str]) -> list[dict]:
    return [{k: r[k] for k in keys} for r in sorted(records, key=lambda r: r["id"])]


def to_json_dict(ds: CocoDataset) -> dict:
    return {
        "info": {"description": ds.description, "version": "1.0", "contributor": f"doomsight {__version__}"},
        "licenses": [],
        "images": _ordered(ds.images, _IMAGE_KEYS),
        "annotations": _ordered(ds.annotations, _ANN_KEYS),
        "categories": _ordered(ds.categories, _CAT_KEYS),
    }


def emit_json(ds: CocoDataset) -> bytes:
    """Canonical serialization: fixed key order, records sorted by id."""
    return (json.dumps(to_json_dict(ds), ensure_ascii=False, separators=(",", ":"), allow_nan=False)
            + "\n").encode("utf-8")


# validation -----------------------------------------------------------------------

@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def validate_dataset(data: bytes | str) -> ValidationReport:
    """Check a Coco instances file; problems are collected, never raised."""
    report = ValidationReport()
    err = report.errors.append
    try:
        doc = json.loads(data)
    except (ValueError, UnicodeDecodeError) as e:
        err(f"not valid JSON: {e}")
        return report
    if not isinstance(doc, dict):
        err("top level is not an object")
        return report
    for key in ("images", "annotations", "categories"):
        if not isinstance(doc.get(key), list):
            err(f"missing or non-list '{key}'")
    if report.errors:
        return report

    images: dict[Any, dict] = {}
    for img in doc["images"]:
        if not isinstance(img, dict) or not all(k in img for k in _IMAGE_KEYS):
            err(f"image record missing fields: {img!r}")
            continue
        if img["id"] in images:
            err(f"duplicate image id {img['id']}")
        if not (isinstance(img["width"], int) and isinstance(img["height"], int)
                and img["width"] > 0 and img["height"] > 0):
            err(f"image {img['id']} has bad size {img['width']}x{img['height']}")
        images[img["id"]] = img
    cats: dict[Any, str] = {}
    for c in doc["categories"]:
        if not isinstance(c, dict) or "id" not in c or "name" not in c:
            err(f"category record missing fields: {c!r}")
            continue
        if c["id"] in cats:
            err(f"duplicate category id {c['id']}")
        cats[c["id"]] = c["name"]

    ann_ids = set()
    images_per_cat: dict[str, set] = defaultdict(set)
    anns_per_cat: dict[str, int] = defaultdict(int)
    for a in doc["annotations"]:
        if not isinstance(a, dict) or not all(k in a for k in _ANN_KEYS):
            err(f"annotation record missing fields: {a!r}")
            continue
        aid = a["id"]
        if aid in ann_ids:
            err(f"duplicate annotation id {aid}")
        ann_ids.add(aid)
        img = images.get(a["image_id"])
        if img is None:
            err(f"annotation {aid}: image_id {a['image_id']} does not exist")
        if a["category_id"] not in cats:
            err(f"annotation {aid}: category_id {a['category_id']} does not exist")
        else:
            images_per_cat[cats[a["category_id"]]].add(a["image_id"])
            anns_per_cat[cats[a["category_id"]]] += 1
        if not _is_number(a["area"]) or a["area"] <= 0:
            err(f"annotation {aid}: area must be positive, got {a['area']!r}")
        if a["iscrowd"] != 0:
            err(f"annotation {aid}: iscrowd must be 0")
        bbox = a["bbox"]
        if not (isinstance(bbox, list) and len(bbox) == 4 and all(_is_number(v) for v in bbox)):
            err(f"annotation {aid}: bbox must be four numbers")
        else:
            x, y, w, h = bbox
            if w <= 0 or h <= 0:
                err(f"annotation {aid}: empty bbox {bbox}")
            if img is not None and (x < 0 or y < 0 or x + w > img["width"] or y + h > img["height"]):
                err(f"annotation {aid}: bbox {bbox} outside image {img['width']}x{img['height']}")
        seg = a["segmentation"]
        if not isinstance(seg, list) or not seg:
            err(f"annotation {aid}: segmentation must be a non-empty polygon list")
        else:
            for ring in seg:
                if not isinstance(ring, list) or len(ring) < 6 or len(ring) % 2 or \
                        not all(_is_number(v) for v in ring):
                    err(f"annotation {aid}: polygon ring needs an even count >= 6 of numbers")
    report.stats = {
        "images": len(images),
        "annotations": len(ann_ids),
        "categories": len(cats),
        "images_per_category": {n: len(images_per_cat[n]) for n in sorted(cats.values())},
        "annotations_per_category": {n: anns_per_cat[n] for n in sorted(cats.values())},
    }
    return report
