"""Clip records, manifest I/O, and QA-pair generation.

Each 2-second inspection clip carries object/defect labels, protocol split
tags, and a ground-truth visible-time interval set, and expands into four
coupled QA instances: anomaly detection (Q1), defect classification (Q2),
object classification (Q3), and visible-time localization (Q4).
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Union

from . import taxonomy
from .intervals import DEFAULT_DURATION_SEC, IntervalError, IntervalSet

TASKS = ("Q1_detect", "Q2_defect", "Q3_object", "Q4_localize")

Q1_OPTIONS = (
    ("A", "Yes, a defect is present."),
    ("B", "No, the object looks normal."),
)

QUESTION_TEXT = {
    "Q1_detect": "Is there a defect or anomaly present on the object in this video?",
    "Q2_defect": "Which type of structural defect, if any, is present on the object?",
    "Q3_object": "Which object category best describes the object in this video?",
    "Q4_localize": (
        "During which time interval(s) of the 2-second clip is the anomaly "
        "visibly present? Answer [] if no anomaly is visible."
    ),
}


class ManifestError(ValueError):
    """A manifest document violates the clip schema or invariants."""

    def __init__(self, message: str, clip_id: str | None = None):
        self.clip_id = clip_id
        if clip_id is not None:
            message = f"clip {clip_id!r}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class ClipRecord:
    clip_id: str
    object_category: str
    anomaly_status: str  # "normal" | "abnormal"
    defect_type: str  # taxonomy.DEFECT_TYPES or "none"
    splits: tuple[str, ...] = ()
    gt_intervals: IntervalSet = field(default_factory=IntervalSet)
    semantic_group: str = ""
    duration_sec: float = DEFAULT_DURATION_SEC
    fps: int = 30
    frame_root: str | None = None
    verified: bool = False

    def __post_init__(self):
        group = taxonomy.group_of(self.object_category)
        if self.semantic_group and self.semantic_group != group:
            raise ManifestError(
                f"semantic_group {self.semantic_group!r} does not match taxonomy "
                f"group {group!r} for category {self.object_category!r}",
                self.clip_id,
            )
        object.__setattr__(self, "semantic_group", group)
        taxonomy.check_defect(self.defect_type)
        if self.anomaly_status not in taxonomy.ANOMALY_STATUSES:
            raise ManifestError(
                f"anomaly_status must be one of {taxonomy.ANOMALY_STATUSES}, "
                f"got {self.anomaly_status!r}",
                self.clip_id,
            )
        if (self.anomaly_status == "normal") != (self.defect_type == taxonomy.NO_DEFECT):
            raise ManifestError(
                f"anomaly_status {self.anomaly_status!r} inconsistent with "
                f"defect_type {self.defect_type!r}",
                self.clip_id,
            )
        for tag in self.splits:
            if tag not in taxonomy.SPLIT_TAGS:
                raise ManifestError(f"unknown split tag {tag!r}", self.clip_id)
        for protocol in ("standard", "unseen"):
            tags = [t for t in self.splits if t.startswith(protocol)]
            if len(tags) > 1:
                raise ManifestError(
                    f"clip carries multiple {protocol} split tags: {tags}", self.clip_id
                )
        for start, end in self.gt_intervals:
            if not (0.0 <= start < end <= self.duration_sec):
                raise ManifestError(
                    f"gt interval [{start}, {end}] outside [0, {self.duration_sec}]",
                    self.clip_id,
                )
        # Review decisions may override the normal/empty coupling; unverified
        # normal clips must not carry intervals.
        if self.anomaly_status == "normal" and self.gt_intervals and not self.verified:
            raise ManifestError(
                "normal clip carries non-empty gt_intervals without review override",
                self.clip_id,
            )

    def to_json_dict(self) -> dict:
        doc = {
            "clip_id": self.clip_id,
            "object_category": self.object_category,
            "semantic_group": self.semantic_group,
            "anomaly_status": self.anomaly_status,
            "defect_type": self.defect_type,
            "splits": list(self.splits),
            "gt_intervals": self.gt_intervals.to_pairs(),
            "verified": self.verified,
        }
        if self.frame_root is not None:
            doc["frame_root"] = self.frame_root
        return doc


@dataclass(frozen=True)
class QAInstance:
    qa_id: str
    clip_id: str
    task: str
    question_text: str
    options: tuple[tuple[str, str], ...] = ()
    gt_letter: str | None = None
    gt_intervals: IntervalSet | None = None

    def to_json_dict(self) -> dict:
        doc = {
            "qa_id": self.qa_id,
            "clip_id": self.clip_id,
            "task": self.task,
            "question": self.question_text,
            "options": [list(pair) for pair in self.options],
        }
        if self.gt_letter is not None:
            doc["gt_letter"] = self.gt_letter
        if self.gt_intervals is not None:
            doc["gt_intervals"] = self.gt_intervals.to_pairs()
        return doc


@dataclass(frozen=True)
class DistractorPolicy:
    """How Q2/Q3 option lists are built. Orderings are seeded by clip_id."""

    q3_option_count: int = 4
    seed_salt: str = ""

    def __post_init__(self):
        if not (2 <= self.q3_option_count <= len(taxonomy.ALL_CATEGORIES)):
            raise ValueError(
                f"q3_option_count must be in [2, {len(taxonomy.ALL_CATEGORIES)}]"
            )


def _rng_for(clip_id: str, task: str, salt: str) -> random.Random:
    digest = hashlib.sha256(f"{clip_id}:{task}:{salt}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def generate_qa(
    clip: ClipRecord, policy: DistractorPolicy = DistractorPolicy()
) -> list[QAInstance]:
    """Expand one clip into its four QA instances, deterministically."""

    # Q1: fixed two-way options.
    q1_gt = "A" if clip.anomaly_status == "abnormal" else "B"
    q1 = QAInstance(
        qa_id=f"{clip.clip_id}:q1",
        clip_id=clip.clip_id,
        task="Q1_detect",
        question_text=QUESTION_TEXT["Q1_detect"],
        options=Q1_OPTIONS,
        gt_letter=q1_gt,
    )

    # Q2: seven-way (six defect types + no-defect), shuffled per clip.
    q2_labels = list(taxonomy.DEFECT_TYPES) + [taxonomy.NO_DEFECT_OPTION_LABEL]
    _rng_for(clip.clip_id, "Q2_defect", policy.seed_salt).shuffle(q2_labels)
    q2_options = tuple(zip(_LETTERS, q2_labels))
    q2_target = (
        taxonomy.NO_DEFECT_OPTION_LABEL
        if clip.defect_type == taxonomy.NO_DEFECT
        else clip.defect_type
    )
    q2_gt = next(letter for letter, label in q2_options if label == q2_target)
    q2 = QAInstance(
        qa_id=f"{clip.clip_id}:q2",
        clip_id=clip.clip_id,
        task="Q2_defect",
        question_text=QUESTION_TEXT["Q2_defect"],
        options=q2_options,
        gt_letter=q2_gt,
    )

    # Q3: correct category + distractors sampled from the other categories.
    rng = _rng_for(clip.clip_id, "Q3_object", policy.seed_salt)
    pool = [c for c in taxonomy.ALL_CATEGORIES if c != clip.object_category]
    distractors = rng.sample(pool, policy.q3_option_count - 1)
    q3_labels = distractors + [clip.object_category]
    rng.shuffle(q3_labels)
    q3_options = tuple(zip(_LETTERS, q3_labels))
    q3_gt = next(letter for letter, label in q3_options if label == clip.object_category)
    q3 = QAInstance(
        qa_id=f"{clip.clip_id}:q3",
        clip_id=clip.clip_id,
        task="Q3_object",
        question_text=QUESTION_TEXT["Q3_object"],
        options=q3_options,
        gt_letter=q3_gt,
    )

    q4 = QAInstance(
        qa_id=f"{clip.clip_id}:q4",
        clip_id=clip.clip_id,
        task="Q4_localize",
        question_text=QUESTION_TEXT["Q4_localize"],
        gt_intervals=clip.gt_intervals,
    )
    return [q1, q2, q3, q4]


Source = Union[str, Path, bytes, IO]


def _read_document(source: Source) -> dict:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "clips" not in doc:
        raise ManifestError('manifest must be an object with a "clips" array')
    return doc


def clip_from_json(entry: dict, duration: float, fps: int) -> ClipRecord:
    if not isinstance(entry, dict):
        raise ManifestError(f"clip entry must be an object, got {type(entry).__name__}")
    clip_id = entry.get("clip_id")
    if not isinstance(clip_id, str) or not clip_id:
        raise ManifestError("clip entry missing clip_id")
    required = ("object_category", "anomaly_status", "defect_type")
    for key in required:
        if key not in entry:
            raise ManifestError(f"missing field {key!r}", clip_id)
    splits = entry.get("splits")
    if splits is None and "split" in entry:
        splits = [entry["split"]]
    splits = tuple(splits or ())
    try:
        gt = IntervalSet.from_pairs(entry.get("gt_intervals", ()), duration)
    except IntervalError as exc:
        raise ManifestError(str(exc), clip_id) from exc
    try:
        return ClipRecord(
            clip_id=clip_id,
            object_category=entry["object_category"],
            anomaly_status=entry["anomaly_status"],
            defect_type=entry["defect_type"],
            splits=splits,
            gt_intervals=gt,
            semantic_group=entry.get("semantic_group", ""),
            duration_sec=duration,
            fps=fps,
            frame_root=entry.get("frame_root"),
            verified=bool(entry.get("verified", False)),
        )
    except taxonomy.TaxonomyError as exc:
        raise ManifestError(str(exc), clip_id) from exc


def load_manifest(source: Source) -> list[ClipRecord]:
    """Load and validate a manifest document; duplicate clip_ids are rejected."""
    doc = _read_document(source)
    duration = float(doc.get("duration_sec", DEFAULT_DURATION_SEC))
    fps = int(doc.get("fps", 30))
    clips = []
    seen: set[str] = set()
    for entry in doc["clips"]:
        clip = clip_from_json(entry, duration, fps)
        if clip.clip_id in seen:
            raise ManifestError("duplicate clip_id", clip.clip_id)
        seen.add(clip.clip_id)
        clips.append(clip)
    return clips


def manifest_document(
    clips: Iterable[ClipRecord],
    protocol: str = "all",
    duration: float = DEFAULT_DURATION_SEC,
    fps: int = 30,
) -> dict:
    return {
        "protocol": protocol,
        "fps": fps,
        "duration_sec": duration,
        "clips": [clip.to_json_dict() for clip in clips],
    }


@dataclass
class CountReport:
    """Diagnostic comparison of a manifest against the published figures."""

    protocol: str
    n_clips: int
    n_normal: int
    n_abnormal: int
    n_qa_pairs: int
    split_counts: dict[str, int]
    split_categories: dict[str, int]
    warnings: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "n_clips": self.n_clips,
            "n_normal": self.n_normal,
            "n_abnormal": self.n_abnormal,
            "n_qa_pairs": self.n_qa_pairs,
            "split_counts": self.split_counts,
            "split_categories": self.split_categories,
            "warnings": self.warnings,
        }


def validate_counts(clips: list[ClipRecord], protocol: str = "standard") -> CountReport:
    """Compare clip/QA/split counts with the published figures.

    Mismatches are reported as warnings, never errors: the published totals
    disagree among themselves (1,410 + 2,613 = 4,023 clips and 16,092 QA
    pairs versus split sums of 4,014), so a hard failure would reject real
    data.
    """
    if protocol not in ("standard", "unseen"):
        raise ValueError(f"protocol must be 'standard' or 'unseen', got {protocol!r}")
    pub = taxonomy.PUBLISHED
    n = len(clips)
    n_normal = sum(1 for c in clips if c.anomaly_status == "normal")
    split_counts = {tag: 0 for tag in taxonomy.SPLIT_TAGS}
    split_cats: dict[str, set[str]] = {tag: set() for tag in taxonomy.SPLIT_TAGS}
    for clip in clips:
        for tag in clip.splits:
            split_counts[tag] += 1
            split_cats[tag].add(clip.object_category)

    warnings = []

    def expect(label: str, got: int, want: int):
        if got != want:
            warnings.append(f"{label}: got {got}, published figure is {want}")

    train_tag, test_tag = f"{protocol}_train", f"{protocol}_test"
    expect(f"{train_tag} clips", split_counts[train_tag], pub[f"{train_tag}_clips"])
    expect(f"{test_tag} clips", split_counts[test_tag], pub[f"{test_tag}_clips"])
    if protocol == "unseen":
        expect(
            "unseen_train categories",
            len(split_cats["unseen_train"]),
            pub["unseen_train_categories"],
        )
        expect(
            "unseen_test categories",
            len(split_cats["unseen_test"]),
            pub["unseen_test_categories"],
        )
        overlap = split_cats["unseen_train"] & split_cats["unseen_test"]
        if overlap:
            warnings.append(
                f"unseen protocol train/test categories overlap: {sorted(overlap)}"
            )
    expect("normal clips", n_normal, pub["normal_clips"])
    expect("abnormal clips", n - n_normal, pub["abnormal_clips"])
    expect("total clips", n, pub["total_clips"])
    expect("QA pairs (4 x clips)", 4 * n, pub["qa_pairs"])

    return CountReport(
        protocol=protocol,
        n_clips=n,
        n_normal=n_normal,
        n_abnormal=n - n_normal,
        n_qa_pairs=4 * n,
        split_counts=split_counts,
        split_categories={tag: len(cats) for tag, cats in split_cats.items()},
        warnings=warnings,
    )
