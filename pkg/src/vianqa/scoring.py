"""Benchmark scoring: per-task accuracy, localization mIoU, and their mean.

Classification tasks score the fraction of clips whose predicted option
letter matches ground truth. Localization scores the mean per-clip IoU
between predicted and annotated interval sets, using set-IoU by default
(total intersection over total union), with pairwise-max IoU available
behind a flag. The headline number is the arithmetic mean of the four task
scores, displayed at one decimal with round-half-up.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Optional, Sequence

from .dataset import ClipRecord, DistractorPolicy, generate_qa
from .grammar import AnswerBlock
from .intervals import IntervalSet, set_intersection_length, set_union_length
from .rewards import GroundTruthBundle, iou_max

TASK_COLUMNS = ("detect_acc", "defect_acc", "loc_miou", "object_acc")


class ScoringError(ValueError):
    """A prediction file references unknown clips or is internally invalid."""


@dataclass(frozen=True)
class PredictionRecord:
    clip_id: str
    answers: AnswerBlock
    raw_response: Optional[str] = None


@dataclass
class ScoreReport:
    detect_acc: float
    defect_acc: float
    loc_miou: float
    object_acc: float
    avg: float
    n_scored: int
    n_missing: int
    per_category: dict[str, dict[str, float]] = field(default_factory=dict)

    def task_scores(self) -> tuple[float, float, float, float]:
        return (self.detect_acc, self.defect_acc, self.loc_miou, self.object_acc)

    def to_json_dict(self) -> dict:
        return {
            "detect_acc": self.detect_acc,
            "defect_acc": self.defect_acc,
            "loc_miou": self.loc_miou,
            "object_acc": self.object_acc,
            "avg": self.avg,
            "display": {
                "detect_acc": str(round_half_up(self.detect_acc)),
                "defect_acc": str(round_half_up(self.defect_acc)),
                "loc_miou": str(round_half_up(self.loc_miou)),
                "object_acc": str(round_half_up(self.object_acc)),
                "avg": str(round_half_up(self.avg)),
            },
            "n_scored": self.n_scored,
            "n_missing": self.n_missing,
            "per_category": self.per_category,
        }


def round_half_up(value: float, decimals: int = 1) -> Decimal:
    """Round-half-up display rounding on the decimal value of the float.

    Uses repr() so that e.g. (40.8+31.3+31.1+65.0)/4 displays as 42.1, which
    plain binary rounding would miss.
    """
    quantum = Decimal(1).scaleb(-decimals)
    return Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP)


def mean_display(task_scores: Sequence[float], decimals: int = 1) -> Decimal:
    """Arithmetic mean of task scores, rounded half-up for display."""
    total = sum(Decimal(repr(s)) for s in task_scores)
    mean = total / Decimal(len(task_scores))
    return mean.quantize(Decimal(1).scaleb(-decimals), rounding=ROUND_HALF_UP)


def loc_iou(
    pred: Optional[IntervalSet],
    gt: IntervalSet,
    use_pairwise_max: bool = False,
) -> float:
    """Per-clip localization IoU.

    Both empty -> 1.0 (correct abstention on a normal clip); exactly one
    empty -> 0.0; otherwise set-IoU over the full sets, or pairwise-max IoU
    when use_pairwise_max is set.
    """
    pred = pred if pred is not None else IntervalSet()
    if pred.is_empty and gt.is_empty:
        return 1.0
    if pred.is_empty or gt.is_empty:
        return 0.0
    if use_pairwise_max:
        return iou_max(pred, gt)
    return set_intersection_length(pred, gt) / set_union_length(pred, gt)


def _aggregate(rows: list[dict[str, float]]) -> dict[str, float]:
    n = len(rows)
    out = {}
    for key in TASK_COLUMNS:
        out[key] = 100.0 * sum(row[key] for row in rows) / n if n else 0.0
    out["avg"] = (
        out["detect_acc"] + out["defect_acc"] + out["loc_miou"] + out["object_acc"]
    ) / 4
    return out


def score(
    preds: Iterable[PredictionRecord],
    clips: Sequence[ClipRecord],
    protocol_split: Optional[str] = None,
    policy: DistractorPolicy = DistractorPolicy(),
    use_pairwise_max: bool = False,
    exclude_empty_gt_from_miou: bool = False,
) -> ScoreReport:
    """Score predictions against the manifest for one protocol split.

    Clips without a prediction score 0 on every task and are counted in
    n_missing. Predictions for clips outside the manifest (or the selected
    split) raise ScoringError. exclude_empty_gt_from_miou switches the
    localization denominator to clips with annotated intervals only.
    """
    selected = [
        c for c in clips if protocol_split is None or protocol_split in c.splits
    ]
    if not selected:
        raise ScoringError(f"no clips selected for split {protocol_split!r}")
    by_id = {c.clip_id: c for c in selected}

    pred_map: dict[str, PredictionRecord] = {}
    for pred in preds:
        if pred.clip_id not in by_id:
            raise ScoringError(
                f"prediction references unknown clip {pred.clip_id!r} "
                f"(split {protocol_split!r})"
            )
        if pred.clip_id in pred_map:
            raise ScoringError(f"duplicate prediction for clip {pred.clip_id!r}")
        pred_map[pred.clip_id] = pred

    rows = []
    loc_rows = []
    n_missing = 0
    for clip in selected:
        gt = GroundTruthBundle.from_qa(generate_qa(clip, policy))
        pred = pred_map.get(clip.clip_id)
        if pred is None:
            n_missing += 1
            answers = AnswerBlock()
            missing = True
        else:
            answers = pred.answers
            missing = False
        iou = (
            0.0
            if missing
            else loc_iou(answers.q4, gt.gt_intervals, use_pairwise_max)
        )
        row = {
            "category": clip.object_category,
            "detect_acc": 1.0 if answers.q1 == gt.y_ano else 0.0,
            "defect_acc": 1.0 if answers.q2 == gt.y_def else 0.0,
            "object_acc": 1.0 if answers.q3 == gt.y_obj else 0.0,
            "loc_miou": iou,
            "loc_scoreable": not (exclude_empty_gt_from_miou and gt.gt_intervals.is_empty),
        }
        rows.append(row)
        if row["loc_scoreable"]:
            loc_rows.append(row)

    def summarize(subset: list[dict]) -> dict[str, float]:
        agg = _aggregate(subset)
        if exclude_empty_gt_from_miou:
            scoreable = [r for r in subset if r["loc_scoreable"]]
            agg["loc_miou"] = (
                100.0 * sum(r["loc_miou"] for r in scoreable) / len(scoreable)
                if scoreable
                else 0.0
            )
            agg["avg"] = (
                agg["detect_acc"] + agg["defect_acc"] + agg["loc_miou"] + agg["object_acc"]
            ) / 4
        return agg

    overall = summarize(rows)
    per_category: dict[str, dict[str, float]] = {}
    for category in sorted({r["category"] for r in rows}):
        per_category[category] = {
            k: v
            for k, v in summarize([r for r in rows if r["category"] == category]).items()
        }

    return ScoreReport(
        detect_acc=overall["detect_acc"],
        defect_acc=overall["defect_acc"],
        loc_miou=overall["loc_miou"],
        object_acc=overall["object_acc"],
        avg=overall["avg"],
        n_scored=len(pred_map),
        n_missing=n_missing,
        per_category=per_category,
    )


def report_table(reports: dict[str, ScoreReport]) -> str:
    """Aligned plain-text leaderboard: Detect./Class./Loc./Class./Avg."""
    if not reports:
        raise ValueError("report_table requires at least one report")
    headers = ("Model", "Detect.", "Class.", "Loc.", "Class.", "Avg.")
    rows = []
    for name, report in reports.items():
        rows.append(
            (
                name,
                str(round_half_up(report.detect_acc)),
                str(round_half_up(report.defect_acc)),
                str(round_half_up(report.loc_miou)),
                str(round_half_up(report.object_acc)),
                str(round_half_up(report.avg)),
            )
        )
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in rows)) for i in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * w for w in widths),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)
