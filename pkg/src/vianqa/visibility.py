"""Candidate visible-time derivation from aligned marked/unmarked frames.

For each frame pair the marked render differs from the unmarked one only
where the defective region is highlighted in red. Counting red-dominant
changed pixels per frame gives a boolean visibility signal; run merging with
gap filling and a minimum-length filter turns that signal into candidate
intervals for human verification. Illumination-only differences are rejected
by the red-dominance test, keeping labels tied to the structural anomaly
rather than lighting changes.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .intervals import IntervalSet

FRAME_VARIANTS = ("unmarked", "marked")


class FrameAlignmentError(ValueError):
    """Marked/unmarked rasters disagree in shape, or a frame is unusable."""


@dataclass(frozen=True)
class DiffParams:
    channel_threshold: int = 30
    red_dominance_delta: int = 40
    area_threshold: int = 25
    gap_fill_frames: int = 2
    min_interval_frames: int = 3
    downscale_factor: int = 2

    def __post_init__(self):
        for name in (
            "channel_threshold",
            "red_dominance_delta",
            "area_threshold",
            "gap_fill_frames",
            "min_interval_frames",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.downscale_factor < 1:
            raise ValueError("downscale_factor must be >= 1")


@dataclass(frozen=True)
class FramePair:
    frame_index: int
    unmarked: np.ndarray
    marked: np.ndarray


@dataclass
class VisibilityTrace:
    clip_id: str
    flags: list[bool]
    diff_pixel_counts: list[int]
    params: DiffParams
    fps: int = 30

    def __post_init__(self):
        if len(self.flags) != len(self.diff_pixel_counts):
            raise ValueError("flags and diff_pixel_counts lengths differ")
        for i, (flag, count) in enumerate(zip(self.flags, self.diff_pixel_counts)):
            if flag != (count >= self.params.area_threshold):
                raise ValueError(
                    f"flag {i} inconsistent with diff count {count} at "
                    f"area_threshold {self.params.area_threshold}"
                )


def _block_average(frame: np.ndarray, factor: int) -> np.ndarray:
    if factor == 1:
        return frame.astype(np.int16)
    h, w = frame.shape[0] - frame.shape[0] % factor, frame.shape[1] - frame.shape[1] % factor
    cropped = frame[:h, :w].astype(np.float32)
    blocks = cropped.reshape(h // factor, factor, w // factor, factor, 3)
    return blocks.mean(axis=(1, 3)).astype(np.int16)


def frame_diff(pair: FramePair, params: DiffParams = DiffParams()) -> int:
    """Count red-dominant changed pixels on the downscaled evaluation grid."""
    if pair.unmarked.shape != pair.marked.shape:
        raise FrameAlignmentError(
            f"frame {pair.frame_index}: unmarked shape {pair.unmarked.shape} != "
            f"marked shape {pair.marked.shape}"
        )
    if pair.unmarked.ndim != 3 or pair.unmarked.shape[2] < 3:
        raise FrameAlignmentError(
            f"frame {pair.frame_index}: expected HxWx3 RGB rasters"
        )
    unmarked = _block_average(pair.unmarked[:, :, :3], params.downscale_factor)
    marked = _block_average(pair.marked[:, :, :3], params.downscale_factor)
    changed = np.abs(marked - unmarked).max(axis=2) > params.channel_threshold
    red = marked[:, :, 0]
    dominant = (red > marked[:, :, 1] + params.red_dominance_delta) & (
        red > marked[:, :, 2] + params.red_dominance_delta
    )
    return int(np.count_nonzero(changed & dominant))


def derive_intervals(
    trace: VisibilityTrace, params: DiffParams | None = None
) -> IntervalSet:
    """Turn per-frame flags into candidate intervals.

    Consecutive true frames form runs; runs separated by at most
    gap_fill_frames false frames merge; merged runs shorter than
    min_interval_frames are dropped. Frame i covers [i/fps, (i+1)/fps).
    """
    params = params or trace.params
    fps = trace.fps
    runs: list[list[int]] = []
    for i, flag in enumerate(trace.flags):
        if not flag:
            continue
        if runs and i - runs[-1][1] - 1 <= params.gap_fill_frames:
            runs[-1][1] = i
        else:
            runs.append([i, i])
    kept = [(a, b) for a, b in runs if b - a + 1 >= params.min_interval_frames]
    duration = len(trace.flags) / fps
    return IntervalSet.from_pairs(
        [(a / fps, (b + 1) / fps) for a, b in kept], duration
    )


FrameProvider = Callable[[str, str, int], np.ndarray]


@dataclass
class DiskFrameSource:
    """Frames stored as <root>/<clip_id>/<variant>/frame_%04d.png."""

    root: Path
    n_frames: int = 60

    def __post_init__(self):
        self.root = Path(self.root)

    def __call__(self, clip_id: str, variant: str, index: int) -> np.ndarray:
        from PIL import Image, UnidentifiedImageError

        path = self.root / clip_id / variant / f"frame_{index:04d}.png"
        if not path.exists():
            raise FrameAlignmentError(f"missing frame file: {path}")
        try:
            with Image.open(path) as img:
                return np.asarray(img.convert("RGB"))
        except UnidentifiedImageError as exc:
            raise FrameAlignmentError(f"undecodable frame file: {path}") from exc

    def clip_ids(self) -> list[str]:
        return sorted(
            p.name for p in self.root.iterdir() if (p / "marked").is_dir()
        )


@dataclass
class ArrayFrameSource:
    """In-memory frames: clip_id -> {variant: [array, ...]}."""

    frames: dict[str, dict[str, list[np.ndarray]]]
    n_frames: int = 60

    def __call__(self, clip_id: str, variant: str, index: int) -> np.ndarray:
        try:
            return self.frames[clip_id][variant][index]
        except (KeyError, IndexError) as exc:
            raise FrameAlignmentError(
                f"missing frame: clip {clip_id!r} {variant} #{index}"
            ) from exc

    def clip_ids(self) -> list[str]:
        return sorted(self.frames)


def derive_clip(
    clip_id: str,
    frame_source: FrameProvider,
    params: DiffParams = DiffParams(),
    n_frames: int = 60,
    fps: int = 30,
) -> tuple[VisibilityTrace, IntervalSet]:
    """Diff all frame pairs of one clip and derive candidate intervals."""
    counts: list[int] = []
    shape = None
    for index in range(n_frames):
        unmarked = frame_source(clip_id, "unmarked", index)
        marked = frame_source(clip_id, "marked", index)
        if shape is None:
            shape = unmarked.shape
        elif unmarked.shape != shape:
            raise FrameAlignmentError(
                f"clip {clip_id!r}: frame {index} dimensions drifted "
                f"({unmarked.shape} vs {shape})"
            )
        counts.append(frame_diff(FramePair(index, unmarked, marked), params))
    flags = [c >= params.area_threshold for c in counts]
    trace = VisibilityTrace(
        clip_id=clip_id,
        flags=flags,
        diff_pixel_counts=counts,
        params=params,
        fps=fps,
    )
    return trace, derive_intervals(trace, params)


def candidate_document(
    clip_id: str, trace: VisibilityTrace, candidates: IntervalSet
) -> dict:
    return {
        "clip_id": clip_id,
        "candidates": candidates.to_pairs(),
        "params": asdict(trace.params),
        "diff_counts": list(trace.diff_pixel_counts),
    }


def load_candidate_documents(paths: Iterable[Path]) -> dict[str, IntervalSet]:
    """Read per-clip candidate documents into clip_id -> candidate intervals."""
    out: dict[str, IntervalSet] = {}
    for path in paths:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        out[doc["clip_id"]] = IntervalSet.from_pairs(doc.get("candidates", ()))
    return out
