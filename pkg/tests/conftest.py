from __future__ import annotations

import json
import random

import numpy as np
import pytest

from vianqa import taxonomy
from vianqa.dataset import ClipRecord, manifest_document
from vianqa.intervals import IntervalSet


def make_clip(
    clip_id: str,
    category: str = "vase0",
    defect: str = "hole",
    intervals=((0.5, 1.5),),
    splits=("standard_train",),
    verified: bool = False,
) -> ClipRecord:
    status = "normal" if defect == taxonomy.NO_DEFECT else "abnormal"
    return ClipRecord(
        clip_id=clip_id,
        object_category=category,
        anomaly_status=status,
        defect_type=defect,
        splits=tuple(splits),
        gt_intervals=IntervalSet.from_pairs(intervals),
        verified=verified,
    )


def synthetic_clips(n: int, seed: int = 7, splits=("standard_test",)) -> list[ClipRecord]:
    """n clips cycling through categories and defect types, half abnormal."""
    rng = random.Random(seed)
    clips = []
    for i in range(n):
        category = taxonomy.ALL_CATEGORIES[i % len(taxonomy.ALL_CATEGORIES)]
        if i % 2 == 0:
            defect = taxonomy.DEFECT_TYPES[i % len(taxonomy.DEFECT_TYPES)]
            start = round(rng.uniform(0.0, 1.0), 2)
            end = round(rng.uniform(start + 0.2, 2.0), 2)
            intervals = [(start, end)]
        else:
            defect = taxonomy.NO_DEFECT
            intervals = []
        clips.append(
            make_clip(f"clip{i:04d}", category, defect, intervals, splits=splits)
        )
    return clips


def write_manifest(path, clips, protocol="all") -> None:
    path.write_text(json.dumps(manifest_document(clips, protocol=protocol)), "utf-8")


GRAY = 100
FRAME_SHAPE = (54, 96)  # height, width


def render_frames(schedule, illumination_frames=(), shape=FRAME_SHAPE, patch=12):
    """Aligned unmarked/marked frame arrays for one synthetic clip.

    schedule[i] truthy -> a pure-red patch is painted on the marked frame i;
    frames listed in illumination_frames get a uniform +50 brightness shift
    on the marked frame instead (no red dominance, must not trigger flags).
    """
    height, width = shape
    unmarked, marked = [], []
    for index in range(len(schedule)):
        base = np.full((height, width, 3), GRAY, dtype=np.uint8)
        mark = base.copy()
        if schedule[index]:
            mark[20 : 20 + patch, 20 : 20 + patch] = (255, 0, 0)
        if index in illumination_frames:
            mark = np.clip(mark.astype(np.int16) + 50, 0, 255).astype(np.uint8)
        unmarked.append(base)
        marked.append(mark)
    return {"unmarked": unmarked, "marked": marked}


@pytest.fixture
def small_clips():
    return synthetic_clips(12)
