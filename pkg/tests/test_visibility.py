from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

import oracles
from conftest import FRAME_SHAPE, GRAY, render_frames
from vianqa.visibility import (
    ArrayFrameSource,
    DiffParams,
    DiskFrameSource,
    FrameAlignmentError,
    FramePair,
    VisibilityTrace,
    derive_clip,
    derive_intervals,
    frame_diff,
)

P = DiffParams()


def gray_frame(value=GRAY, shape=FRAME_SHAPE):
    h, w = shape
    return np.full((h, w, 3), value, dtype=np.uint8)


class TestFrameDiff:
    def test_identical_frames(self):
        frame = gray_frame()
        assert frame_diff(FramePair(0, frame, frame.copy()), P) == 0

    def test_red_patch_counted_on_downscaled_grid(self):
        unmarked = gray_frame()
        marked = unmarked.copy()
        marked[20:30, 20:30] = (255, 0, 0)  # 10x10 pure red
        assert frame_diff(FramePair(0, unmarked, marked), P) == 100 // (2 * 2)

    def test_red_patch_full_resolution(self):
        unmarked = gray_frame()
        marked = unmarked.copy()
        marked[20:30, 20:30] = (255, 0, 0)
        params = DiffParams(downscale_factor=1)
        assert frame_diff(FramePair(0, unmarked, marked), params) == 100

    def test_illumination_only_shift_rejected(self):
        unmarked = gray_frame()
        marked = np.clip(unmarked.astype(np.int16) + 50, 0, 255).astype(np.uint8)
        assert frame_diff(FramePair(0, unmarked, marked), P) == 0

    def test_size_mismatch_raises(self):
        with pytest.raises(FrameAlignmentError, match="shape"):
            frame_diff(FramePair(0, gray_frame(), gray_frame(shape=(54, 100))), P)

    def test_monotonic_in_channel_threshold(self):
        unmarked = gray_frame()
        marked = unmarked.copy()
        marked[10:40, 10:40] = (160, 20, 20)  # moderate red shift
        counts = [
            frame_diff(FramePair(0, unmarked, marked), DiffParams(channel_threshold=t))
            for t in (10, 40, 80, 200)
        ]
        assert counts == sorted(counts, reverse=True)

    def test_alpha_channel_ignored(self):
        unmarked = gray_frame()
        rgba_marked = np.dstack([unmarked, np.full(FRAME_SHAPE, 255, np.uint8)])
        rgba_unmarked = np.dstack([unmarked, np.zeros(FRAME_SHAPE, np.uint8)])
        assert frame_diff(FramePair(0, rgba_unmarked, rgba_marked), P) == 0


def trace_from_flags(flags, params=P):
    return VisibilityTrace(
        clip_id="t",
        flags=list(flags),
        diff_pixel_counts=[params.area_threshold if f else 0 for f in flags],
        params=params,
    )


class TestDeriveIntervals:
    def test_all_false(self):
        assert derive_intervals(trace_from_flags([False] * 60)).is_empty

    def test_contiguous_run(self):
        flags = [15 <= i <= 45 for i in range(60)]
        result = derive_intervals(trace_from_flags(flags))
        assert result.to_pairs() == [[0.5, 46 / 30]]

    def test_gap_fill_merges(self):
        flags = [(10 <= i <= 20) or (23 <= i <= 40) for i in range(60)]
        result = derive_intervals(trace_from_flags(flags))
        assert result.to_pairs() == [[10 / 30, 41 / 30]]

    def test_gap_beyond_threshold_stays_split(self):
        flags = [(10 <= i <= 20) or (24 <= i <= 40) for i in range(60)]
        result = derive_intervals(trace_from_flags(flags))
        assert result.to_pairs() == [[10 / 30, 21 / 30], [24 / 30, 41 / 30]]

    def test_short_flicker_dropped(self):
        flags = [i == 30 for i in range(60)]
        assert derive_intervals(trace_from_flags(flags)).is_empty

    def test_min_length_after_merge(self):
        # Two 1-frame blips merged across a small gap pass the length filter.
        flags = [i in (10, 12) for i in range(60)]
        result = derive_intervals(trace_from_flags(flags))
        assert result.to_pairs() == [[10 / 30, 13 / 30]]

    @settings(max_examples=300, deadline=None)
    @given(
        st.lists(st.booleans(), min_size=60, max_size=60),
        st.integers(min_value=0, max_value=5),
        st.integers(min_value=1, max_value=6),
    )
    def test_matches_oracle(self, flags, gap, min_frames):
        params = DiffParams(gap_fill_frames=gap, min_interval_frames=min_frames)
        result = derive_intervals(trace_from_flags(flags, params), params)
        assert result.to_pairs() == [
            [a, b] for a, b in oracles.merge_runs_oracle(flags, gap, min_frames)
        ]

    def test_bounds_and_frame_alignment(self):
        rng = random.Random(2)
        for _ in range(50):
            flags = [rng.random() < 0.4 for _ in range(60)]
            for start, end in derive_intervals(trace_from_flags(flags)):
                assert 0.0 <= start < end <= 2.0
                assert (start * 30) == pytest.approx(round(start * 30))
                assert (end * 30) == pytest.approx(round(end * 30))


class TestDeriveClip:
    def test_red_patch_first_second(self):
        schedule = [i < 30 for i in range(60)]
        source = ArrayFrameSource({"clipA": render_frames(schedule)})
        trace, candidates = derive_clip("clipA", source)
        assert trace.flags == schedule
        assert candidates.to_pairs() == [[0.0, 1.0]]

    def test_two_windows(self):
        schedule = [(5 <= i <= 15) or (40 <= i <= 55) for i in range(60)]
        source = ArrayFrameSource({"c": render_frames(schedule)})
        _, candidates = derive_clip("c", source)
        assert candidates.to_pairs() == [[5 / 30, 16 / 30], [40 / 30, 56 / 30]]

    def test_flicker_dropped(self):
        schedule = [i == 10 for i in range(60)]
        source = ArrayFrameSource({"c": render_frames(schedule)})
        _, candidates = derive_clip("c", source)
        assert candidates.is_empty

    def test_illumination_only_clip_empty(self):
        source = ArrayFrameSource(
            {"c": render_frames([False] * 60, illumination_frames=range(10, 50))}
        )
        trace, candidates = derive_clip("c", source)
        assert not any(trace.flags)
        assert candidates.is_empty

    def test_determinism(self):
        schedule = [(7 <= i <= 25) for i in range(60)]
        frames = render_frames(schedule)
        source = ArrayFrameSource({"c": frames})
        first = derive_clip("c", source)
        second = derive_clip("c", source)
        assert first[0].flags == second[0].flags
        assert first[1] == second[1]

    def test_missing_frame_raises(self):
        frames = render_frames([False] * 59)
        source = ArrayFrameSource({"c": frames})
        with pytest.raises(FrameAlignmentError, match="missing frame"):
            derive_clip("c", source)

    def test_dimension_drift_raises(self):
        frames = render_frames([False] * 60)
        frames["unmarked"][30] = gray_frame(shape=(54, 100))
        frames["marked"][30] = gray_frame(shape=(54, 100))
        source = ArrayFrameSource({"c": frames})
        with pytest.raises(FrameAlignmentError, match="drift"):
            derive_clip("c", source)


class TestDiskFrameSource:
    def test_round_trip_through_png(self, tmp_path):
        schedule = [10 <= i <= 20 for i in range(24)]
        frames = render_frames(schedule)
        for variant in ("unmarked", "marked"):
            directory = tmp_path / "clipX" / variant
            directory.mkdir(parents=True)
            for index, frame in enumerate(frames[variant]):
                Image.fromarray(frame).save(directory / f"frame_{index:04d}.png")
        source = DiskFrameSource(tmp_path, n_frames=24)
        assert source.clip_ids() == ["clipX"]
        trace, candidates = derive_clip("clipX", source, n_frames=24)
        assert trace.flags == schedule
        assert candidates.to_pairs() == [[10 / 30, 21 / 30]]

    def test_missing_file_raises(self, tmp_path):
        (tmp_path / "c" / "unmarked").mkdir(parents=True)
        (tmp_path / "c" / "marked").mkdir(parents=True)
        source = DiskFrameSource(tmp_path, n_frames=1)
        with pytest.raises(FrameAlignmentError, match="missing frame file"):
            derive_clip("c", source, n_frames=1)

    def test_undecodable_file_raises(self, tmp_path):
        for variant in ("unmarked", "marked"):
            directory = tmp_path / "c" / variant
            directory.mkdir(parents=True)
            (directory / "frame_0000.png").write_bytes(b"not a png")
        source = DiskFrameSource(tmp_path, n_frames=1)
        with pytest.raises(FrameAlignmentError, match="undecodable"):
            derive_clip("c", source, n_frames=1)


class TestDiffParamsValidation:
    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            DiffParams(channel_threshold=-1)
        with pytest.raises(ValueError):
            DiffParams(downscale_factor=0)
