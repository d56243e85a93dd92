"""Per-frame object instances from 16-bit label images."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
from scipy import ndimage

from ..render import INSTANCE_BASE


class UnknownInstance(KeyError):
    pass


@dataclass(frozen=True, eq=False)
class InstanceObservation:
    image: Any
    instance_id: int
    category: str
    mask: np.ndarray                     # cropped to bbox
    area: int
    bbox: tuple[int, int, int, int]      # x, y, w, h

    @property
    def offset(self) -> tuple[int, int]:
        return self.bbox[0], self.bbox[1]

    def full_mask(self, width: int, height: int) -> np.ndarray:
        out = np.zeros((height, width), bool)
        x, y, w, h = self.bbox
        out[y:y + h, x:x + w] = self.mask
        return out


def extract_instances(labels: np.ndarray, spawn_table: Mapping[int, str],
                      image: Any = None) -> list[InstanceObservation]:
    """One observation per instance id present, disconnected pieces included.

    ``spawn_table`` maps instance ids to category names.  Sky, wall and
    floor/ceiling labels never produce observations.
    """
    lab = np.asarray(labels).astype(np.int64)
    ids = lab - (INSTANCE_BASE - 1)          # instance k -> k + 1, background <= 0
    ids[ids < 0] = 0
    out = []
    for k, sl in enumerate(ndimage.find_objects(ids), 1):
        if sl is None:
            continue
        iid = k - 1
        if iid not in spawn_table:
            raise UnknownInstance(f"instance {iid} has no spawn record")
        mask = ids[sl] == k
        bbox = (sl[1].start, sl[0].start, sl[1].stop - sl[1].start, sl[0].stop - sl[0].start)
        out.append(InstanceObservation(image, iid, spawn_table[iid], mask, int(mask.sum()), bbox))
    return out
