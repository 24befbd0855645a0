from __future__ import annotations

import random
from decimal import Decimal

import pytest

import oracles
from conftest import make_clip, synthetic_clips
from vianqa.dataset import generate_qa
from vianqa.grammar import AnswerBlock
from vianqa.intervals import IntervalSet
from vianqa.rewards import GroundTruthBundle
from vianqa.scoring import (
    PredictionRecord,
    ScoringError,
    loc_iou,
    mean_display,
    report_table,
    round_half_up,
    score,
)


def ivs(*pairs):
    return IntervalSet.from_pairs(pairs)


def perfect_prediction(clip) -> PredictionRecord:
    gt = GroundTruthBundle.from_qa(generate_qa(clip))
    return PredictionRecord(
        clip_id=clip.clip_id,
        answers=AnswerBlock(q1=gt.y_ano, q2=gt.y_def, q3=gt.y_obj, q4=gt.gt_intervals),
    )


class TestLocIoU:
    def test_both_empty(self):
        assert loc_iou(IntervalSet(), IntervalSet()) == 1.0

    def test_one_empty(self):
        assert loc_iou(IntervalSet(), ivs((0.1, 0.5))) == 0.0
        assert loc_iou(ivs((0.1, 0.5)), IntervalSet()) == 0.0

    def test_half_overlap(self):
        assert loc_iou(ivs((0.0, 1.0)), ivs((0.0, 2.0))) == pytest.approx(0.5)

    def test_multi_interval_set_iou(self):
        assert loc_iou(ivs((0.0, 0.5), (1.5, 2.0)), ivs((0.0, 2.0))) == pytest.approx(0.5)

    def test_missing_pred_treated_as_empty(self):
        assert loc_iou(None, IntervalSet()) == 1.0
        assert loc_iou(None, ivs((0.1, 0.5))) == 0.0

    def test_symmetry_and_identity(self):
        rng = random.Random(5)
        for _ in range(50):
            a = _random_set(rng)
            b = _random_set(rng)
            assert loc_iou(a, b) == pytest.approx(loc_iou(b, a))
            assert loc_iou(a, a) == 1.0

    def test_matches_grid_oracle(self):
        rng = random.Random(6)
        for _ in range(100):
            a, b = _random_set(rng), _random_set(rng)
            if a.is_empty or b.is_empty:
                continue
            assert loc_iou(a, b) == pytest.approx(
                oracles.grid_set_iou(a.to_pairs(), b.to_pairs()), abs=2e-3
            )

    def test_single_interval_equals_pairwise_max(self):
        rng = random.Random(7)
        for _ in range(50):
            a = _random_set(rng, exactly=1)
            b = _random_set(rng, exactly=1)
            assert loc_iou(a, b) == pytest.approx(loc_iou(a, b, use_pairwise_max=True))


def _random_set(rng: random.Random, max_intervals: int = 3, exactly=None) -> IntervalSet:
    n = exactly if exactly is not None else rng.randint(0, max_intervals)
    if n == 0:
        return IntervalSet()
    edges = sorted(rng.sample(range(2001), 2 * n))
    return IntervalSet.from_pairs(
        [(edges[2 * i] / 1000, edges[2 * i + 1] / 1000) for i in range(n)]
    )


class TestRounding:
    @pytest.mark.parametrize(
        "scores,expected",
        [
            ((60.7, 37.6, 49.6, 81.9), "57.5"),
            ((91.2, 77.8, 82.3, 93.7), "86.3"),
            ((40.8, 31.3, 31.1, 65.0), "42.1"),  # exact .05 must round up
            ((33.9, 31.0, 31.9, 65.8), "40.7"),
        ],
    )
    def test_mean_display(self, scores, expected):
        assert str(mean_display(scores)) == expected

    def test_round_half_up_on_floats(self):
        assert str(round_half_up(57.45)) == "57.5"
        assert str(round_half_up(41.225)) == "41.2"
        assert round_half_up(100.0) == Decimal("100.0")


class TestScore:
    def test_perfect_predictions(self, small_clips):
        preds = [perfect_prediction(c) for c in small_clips]
        report = score(preds, small_clips, "standard_test")
        assert report.task_scores() == (100.0, 100.0, 100.0, 100.0)
        assert report.avg == 100.0
        assert report.n_missing == 0

    def test_avg_identity(self, small_clips):
        preds = [perfect_prediction(c) for c in small_clips[::2]]
        report = score(preds, small_clips, "standard_test")
        assert report.avg == (
            report.detect_acc + report.defect_acc + report.loc_miou + report.object_acc
        ) / 4

    def test_missing_predictions_score_zero(self, small_clips):
        report = score([], small_clips, "standard_test")
        assert report.task_scores() == (0.0, 0.0, 0.0, 0.0)
        assert report.n_missing == len(small_clips)

    def test_unknown_clip_rejected(self, small_clips):
        preds = [
            PredictionRecord(clip_id="nope", answers=AnswerBlock(q1="A"))
        ]
        with pytest.raises(ScoringError, match="nope"):
            score(preds, small_clips, "standard_test")

    def test_duplicate_prediction_rejected(self, small_clips):
        pred = perfect_prediction(small_clips[0])
        with pytest.raises(ScoringError, match="duplicate"):
            score([pred, pred], small_clips, "standard_test")

    def test_permutation_invariance(self, small_clips):
        preds = [perfect_prediction(c) for c in small_clips[:8]]
        report_a = score(preds, small_clips, "standard_test")
        report_b = score(list(reversed(preds)), small_clips, "standard_test")
        assert report_a.task_scores() == report_b.task_scores()

    def test_per_category_breakdown(self, small_clips):
        preds = [perfect_prediction(c) for c in small_clips]
        report = score(preds, small_clips, "standard_test")
        assert set(report.per_category) == {c.object_category for c in small_clips}
        for scores in report.per_category.values():
            assert scores["avg"] == 100.0

    def test_exclude_empty_gt_mode(self):
        clips = [
            make_clip("a", defect="hole", intervals=[(0.5, 1.5)], splits=("standard_test",)),
            make_clip("b", defect="none", intervals=[], splits=("standard_test",)),
        ]
        preds = []
        for clip in clips:
            p = perfect_prediction(clip)
            preds.append(
                PredictionRecord(
                    clip_id=p.clip_id,
                    answers=AnswerBlock(
                        q1=p.answers.q1,
                        q2=p.answers.q2,
                        q3=p.answers.q3,
                        q4=ivs((0.5, 1.5)),  # hallucinated on the normal clip
                    ),
                )
            )
        default = score(preds, clips, "standard_test")
        assert default.loc_miou == pytest.approx(50.0)  # (1.0 + 0.0) / 2
        excluded = score(preds, clips, "standard_test", exclude_empty_gt_from_miou=True)
        assert excluded.loc_miou == pytest.approx(100.0)

    def test_split_filtering(self):
        clips = [
            make_clip("tr", splits=("standard_train",)),
            make_clip("te", splits=("standard_test",)),
        ]
        report = score([perfect_prediction(clips[1])], clips, "standard_test")
        assert report.n_scored == 1
        with pytest.raises(ScoringError):
            score([perfect_prediction(clips[0])], clips, "standard_test")


class TestReportTable:
    def test_single_row(self, small_clips):
        report = score([perfect_prediction(c) for c in small_clips], small_clips,
                       "standard_test")
        table = report_table({"oracle": report})
        assert "oracle" in table and "100.0" in table
        assert table.splitlines()[0].split() == [
            "Model", "Detect.", "Class.", "Loc.", "Class.", "Avg."
        ]

    def test_rounding_in_table(self):
        report = score(
            [perfect_prediction(c) for c in synthetic_clips(8)],
            synthetic_clips(8),
            "standard_test",
        )
        assert "100.0" in report_table({"m": report})

    def test_empty_map_rejected(self):
        with pytest.raises(ValueError):
            report_table({})
