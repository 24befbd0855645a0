"""Rule-based reward family and group-relative advantages.

Four components: a format reward over the strict grammar verdict, an answer
reward over anomaly detection and object classification, a semantic-gated
defect reward (defect credit only when anomaly detection is also correct),
and a visibility-aware temporal reward with four cases: correct abstention,
missed visibility, hallucinated visibility, and matched visibility scored by
maximum pairwise IoU with a discovery bonus and an interval-count penalty.

Advantages standardize each response's composite reward against the mean and
population standard deviation of its sampled group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .grammar import EMPTY_ANSWERS, AnswerBlock, StructuredResponse
from .intervals import IntervalSet, pair_iou

VIS_CASES = ("both_empty", "missed", "hallucinated", "matched")


@dataclass(frozen=True)
class RewardConfig:
    alpha_bon: float = 0.3
    alpha_iou: float = 0.7
    alpha_pen: float = -0.3
    count_lambda: float = 0.5
    semantic_gate_enabled: bool = True
    flat_iou_mode: bool = False
    component_weights: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    std_epsilon: float = 1e-8
    # When True, answer-derived rewards only see fields from format-valid
    # responses (strict-format-gated extraction); default is lenient.
    gate_answers_on_format: bool = False

    def __post_init__(self):
        if self.alpha_iou < 0:
            raise ValueError("alpha_iou must be >= 0")
        if self.count_lambda < 0:
            raise ValueError("count_lambda must be >= 0")
        if self.alpha_pen > 0:
            raise ValueError("alpha_pen must be <= 0")
        if len(self.component_weights) != 4 or any(
            w < 0 for w in self.component_weights
        ):
            raise ValueError("component_weights must be four non-negative reals")
        if self.std_epsilon <= 0:
            raise ValueError("std_epsilon must be positive")


@dataclass(frozen=True)
class GroundTruthBundle:
    y_ano: str  # "A" (defect present) or "B" (normal)
    y_def: str
    y_obj: str
    gt_intervals: IntervalSet

    @classmethod
    def from_qa(cls, instances) -> "GroundTruthBundle":
        by_task = {qa.task: qa for qa in instances}
        return cls(
            y_ano=by_task["Q1_detect"].gt_letter,
            y_def=by_task["Q2_defect"].gt_letter,
            y_obj=by_task["Q3_object"].gt_letter,
            gt_intervals=by_task["Q4_localize"].gt_intervals,
        )


@dataclass(frozen=True)
class RewardBreakdown:
    r_fmt: int
    r_ans: int
    r_sg: int
    r_vis: float
    total: float
    diagnostics: dict[str, str] = field(default_factory=dict, compare=False)

    def to_json_dict(self) -> dict:
        return {
            "r_fmt": self.r_fmt,
            "r_ans": self.r_ans,
            "r_sg": self.r_sg,
            "r_vis": self.r_vis,
            "total": self.total,
            "diagnostics": dict(self.diagnostics),
        }


def reward_format(resp: StructuredResponse) -> int:
    return 1 if resp.format_ok else 0


def reward_answer(answers: AnswerBlock, gt: GroundTruthBundle) -> int:
    """Sum of two independent indicators: anomaly detection and object class.

    Object credit is unconditional; missing or unparsable fields contribute 0.
    """
    score = 0
    if answers.q1 is not None and answers.q1 == gt.y_ano:
        score += 1
    if answers.q3 is not None and answers.q3 == gt.y_obj:
        score += 1
    return score


def reward_semantic_gated(
    answers: AnswerBlock, gt: GroundTruthBundle, cfg: RewardConfig = RewardConfig()
) -> int:
    defect_correct = answers.q2 is not None and answers.q2 == gt.y_def
    if not cfg.semantic_gate_enabled:
        return 1 if defect_correct else 0
    anomaly_correct = answers.q1 is not None and answers.q1 == gt.y_ano
    return 1 if (defect_correct and anomaly_correct) else 0


def iou_max(pred: IntervalSet, gt: IntervalSet) -> float:
    """Maximum pairwise IoU between predicted and ground-truth intervals.

    Both sets must be non-empty; callers branch on emptiness first.
    """
    if pred.is_empty or gt.is_empty:
        raise ValueError("iou_max requires both interval sets to be non-empty")
    return max(pair_iou(p, g) for p in pred.intervals for g in gt.intervals)


def visibility_case(n_pred: int, n_gt: int) -> str:
    if n_pred == 0 and n_gt == 0:
        return "both_empty"
    if n_pred == 0:
        return "missed"
    if n_gt == 0:
        return "hallucinated"
    return "matched"


def reward_visibility(
    pred: Optional[IntervalSet], gt: IntervalSet, cfg: RewardConfig = RewardConfig()
) -> float:
    """Visibility-aware temporal reward.

    A missing or unparsable q4 is treated as an empty prediction set (the
    model asserts no visible interval). With flat_iou_mode the ablation
    variant is used instead: plain IoU_max, 1.0 for a correct empty
    prediction, 0.0 when exactly one side is empty.
    """
    pred = pred if pred is not None else IntervalSet()
    m, n = len(pred), len(gt)
    case = visibility_case(m, n)
    if cfg.flat_iou_mode:
        if case == "both_empty":
            return 1.0
        if case in ("missed", "hallucinated"):
            return 0.0
        return iou_max(pred, gt)
    if case == "both_empty":
        return 1.0
    if case in ("missed", "hallucinated"):
        return cfg.alpha_pen
    decay = math.exp(-cfg.count_lambda * abs(m - n))
    return cfg.alpha_bon + cfg.alpha_iou * iou_max(pred, gt) * decay


def reward_total(
    resp: StructuredResponse,
    gt: GroundTruthBundle,
    cfg: RewardConfig = RewardConfig(),
) -> RewardBreakdown:
    """Composite reward: weighted sum of the four components."""
    answers = resp.answer
    if cfg.gate_answers_on_format and not resp.format_ok:
        answers = EMPTY_ANSWERS
    r_fmt = reward_format(resp)
    r_ans = reward_answer(answers, gt)
    r_sg = reward_semantic_gated(answers, gt, cfg)
    r_vis = reward_visibility(answers.q4, gt.gt_intervals, cfg)
    w_fmt, w_ans, w_sg, w_vis = cfg.component_weights
    total = w_fmt * r_fmt + w_ans * r_ans + w_sg * r_sg + w_vis * r_vis
    n_pred = len(answers.q4) if answers.q4 is not None else 0
    diagnostics = {
        "vis_case": visibility_case(n_pred, len(gt.gt_intervals)),
        "gate": (
            "disabled"
            if not cfg.semantic_gate_enabled
            else ("open" if answers.q1 == gt.y_ano else "closed")
        ),
    }
    if answers.q4 is None:
        diagnostics["q4"] = "missing or unparsable; treated as empty prediction"
    return RewardBreakdown(
        r_fmt=r_fmt, r_ans=r_ans, r_sg=r_sg, r_vis=r_vis, total=total,
        diagnostics=diagnostics,
    )


def group_advantages(
    rewards: Sequence[float], cfg: RewardConfig = RewardConfig()
) -> list[float]:
    """Standardize rewards against their group mean and population std.

    A zero-variance group yields exactly zero advantages; otherwise the
    denominator is floored at cfg.std_epsilon.
    """
    if len(rewards) == 0:
        raise ValueError("group_advantages requires a non-empty group")
    if min(rewards) == max(rewards):
        return [0.0] * len(rewards)
    mean = sum(rewards) / len(rewards)
    variance = sum((r - mean) ** 2 for r in rewards) / len(rewards)
    std = max(math.sqrt(variance), cfg.std_epsilon)
    return [(r - mean) / std for r in rewards]
