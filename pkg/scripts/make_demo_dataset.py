#!/usr/bin/env python3
"""Build a small synthetic demo dataset under ./demo_data.

Produces a manifest, aligned marked/unmarked PNG frame pairs for each
abnormal clip (red patch painted over the scheduled visible window), and a
rollout-group file with one perfect and one sloppy response per clip, so
every CLI subcommand has something to chew on:

    python scripts/make_demo_dataset.py
    vianqa derive --frames demo_data/frames --out demo_data/candidates
    vianqa serve --manifest demo_data/manifest.json \
        --candidates demo_data/candidates --log demo_data/decisions.jsonl \
        --frames demo_data/frames
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

import numpy as np
from PIL import Image

from vianqa import taxonomy
from vianqa.dataset import ClipRecord, generate_qa, manifest_document
from vianqa.intervals import IntervalSet
from vianqa.rewards import GroundTruthBundle

GRAY = 110
HEIGHT, WIDTH = 54, 96
FPS = 30
N_FRAMES = 60


def build_clips(n: int, rng: random.Random) -> list[ClipRecord]:
    clips = []
    for i in range(n):
        category = rng.choice(taxonomy.ALL_CATEGORIES)
        abnormal = i % 3 != 0
        if abnormal:
            defect = rng.choice(taxonomy.DEFECT_TYPES)
            first = rng.randrange(0, 40)
            last = rng.randrange(first + 6, min(first + 40, N_FRAMES))
            intervals = IntervalSet.from_pairs([(first / FPS, (last + 1) / FPS)])
        else:
            defect = taxonomy.NO_DEFECT
            intervals = IntervalSet()
        clips.append(
            ClipRecord(
                clip_id=f"demo{i:03d}",
                object_category=category,
                anomaly_status="abnormal" if abnormal else "normal",
                defect_type=defect,
                splits=("standard_train",) if i % 4 else ("standard_test",),
                gt_intervals=intervals,
            )
        )
    return clips


def write_frames(clip: ClipRecord, root: Path) -> None:
    rng = random.Random(clip.clip_id)
    base_gray = GRAY + rng.randint(-20, 20)
    visible = [False] * N_FRAMES
    for start, end in clip.gt_intervals:
        for i in range(int(round(start * FPS)), int(round(end * FPS))):
            visible[i] = True
    for variant in ("unmarked", "marked"):
        (root / clip.clip_id / variant).mkdir(parents=True, exist_ok=True)
    for index in range(N_FRAMES):
        frame = np.full((HEIGHT, WIDTH, 3), base_gray, dtype=np.uint8)
        Image.fromarray(frame).save(
            root / clip.clip_id / "unmarked" / f"frame_{index:04d}.png"
        )
        marked = frame.copy()
        if visible[index]:
            marked[20:32, 40:52] = (255, 0, 0)
        Image.fromarray(marked).save(
            root / clip.clip_id / "marked" / f"frame_{index:04d}.png"
        )


def perfect_response(clip: ClipRecord) -> str:
    gt = GroundTruthBundle.from_qa(generate_qa(clip))
    q4 = "[]" if gt.gt_intervals.is_empty else json.dumps(gt.gt_intervals.to_pairs())
    return (
        "<global_perception>\nObject rendered on a plain floor.\n</global_perception>\n"
        "<segment_perception>\nDefect evidence noted where applicable.\n</segment_perception>\n"
        "<think>\nAnswer follows from the labels.\n</think>\n"
        f"<answer>\n<q1>{gt.y_ano}</q1>\n<q2>{gt.y_def}</q2>\n"
        f"<q3>{gt.y_obj}</q3>\n<q4>{q4}</q4>\n</answer>"
    )


def sloppy_response(clip: ClipRecord, rng: random.Random) -> str:
    gt = GroundTruthBundle.from_qa(generate_qa(clip))
    wrong_q1 = "B" if gt.y_ano == "A" else "A"
    return (
        f"I think the answer is:\n<answer>\n<q1>{wrong_q1}</q1>\n"
        f"<q2>{rng.choice('ABCDEFG')}</q2>\n<q3>{gt.y_obj}</q3>\n"
        "<q4>[[0.0,2.0]]</q4>\n</answer>"
    )


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_data")
    parser.add_argument("--clips", type=int, default=12)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    clips = build_clips(args.clips, rng)

    (out / "manifest.json").write_text(
        json.dumps(manifest_document(clips, protocol="standard"), indent=2) + "\n"
    )
    for clip in clips:
        write_frames(clip, out / "frames")

    with open(out / "groups.jsonl", "w") as handle:
        for clip in clips:
            handle.write(
                json.dumps(
                    {
                        "group_id": f"g-{clip.clip_id}",
                        "clip_id": clip.clip_id,
                        "responses": [perfect_response(clip), sloppy_response(clip, rng)],
                    }
                )
                + "\n"
            )

    with open(out / "preds_perfect.jsonl", "w") as handle:
        for clip in clips:
            gt = GroundTruthBundle.from_qa(generate_qa(clip))
            handle.write(
                json.dumps(
                    {
                        "clip_id": clip.clip_id,
                        "q1": gt.y_ano, "q2": gt.y_def, "q3": gt.y_obj,
                        "q4": gt.gt_intervals.to_pairs(),
                    }
                )
                + "\n"
            )

    print(f"demo dataset with {len(clips)} clips written to {out}/")
    print("next: vianqa derive --frames demo_data/frames --out demo_data/candidates")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
