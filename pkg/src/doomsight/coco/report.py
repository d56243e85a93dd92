"""Export statistics: a tab-delimited table and an optional bar chart."""
from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Mapping, NamedTuple

from .dataset import SPLITS, CocoDataset

ALL = "(all)"


class StatsRow(NamedTuple):
    category: str
    category_id: int
    images: tuple[int, int, int]        # train, val, test
    annotations: tuple[int, int, int]


def stats_rows(datasets: Mapping[str, CocoDataset]) -> list[StatsRow]:
    """Per-category image and annotation counts per split, then an ``(all)`` total row."""
    cats = {}
    for ds in datasets.values():
        cats.update({c["id"]: c["name"] for c in ds.categories})
    images = defaultdict(lambda: [set(), set(), set()])
    anns = defaultdict(lambda: [0, 0, 0])
    for k, split in enumerate(SPLITS):
        for a in datasets[split].annotations if split in datasets else ():
            images[a["category_id"]][k].add(a["image_id"])
            anns[a["category_id"]][k] += 1
    rows = [StatsRow(cats[cid], cid, tuple(len(s) for s in images[cid]), tuple(anns[cid]))
            for cid in sorted(cats)]
    total_images = tuple(len(datasets[s].images) if s in datasets else 0 for s in SPLITS)
    total_anns = tuple(len(datasets[s].annotations) if s in datasets else 0 for s in SPLITS)
    rows.append(StatsRow(ALL, 0, total_images, total_anns))
    return rows


def format_stats(rows: list[StatsRow]) -> str:
    header = ["category", "id"] + [f"{s}_images" for s in SPLITS] + [f"{s}_annotations" for s in SPLITS]
    lines = ["\t".join(header)]
    for r in rows:
        lines.append("\t".join([r.category, str(r.category_id), *map(str, r.images), *map(str, r.annotations)]))
    return "\n".join(lines) + "\n"


def plot_stats(rows: list[StatsRow], path) -> Path:
    """Horizontal bars of annotations per category and split."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    cats = [r for r in rows if r.category != ALL]
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.3 * len(cats) + 1.2)))
    y = np.arange(len(cats))
    left = np.zeros(len(cats))
    for k, split in enumerate(SPLITS):
        vals = np.array([r.annotations[k] for r in cats], float)
        ax.barh(y, vals, left=left, label=split)
        left += vals
    ax.set_yticks(y, [r.category for r in cats])
    ax.invert_yaxis()
    ax.set_xlabel("annotations")
    if cats:
        ax.legend(loc="lower right")
    else:
        ax.text(0.5, 0.5, "no categories retained", transform=ax.transAxes, ha="center")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path
