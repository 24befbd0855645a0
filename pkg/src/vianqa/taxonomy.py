"""Fixed object and defect taxonomies for the inspection-clip dataset.

48 fine-grained object categories organized into 17 semantic groups, six
structural defect types plus the no-defect marker, and the published split
sizes used by count validation.
"""

from __future__ import annotations

DEFECT_TYPES = ("crack", "scratch", "concavity", "bulge", "broken", "hole")
NO_DEFECT = "none"
NO_DEFECT_OPTION_LABEL = "no defect"

ANOMALY_STATUSES = ("normal", "abnormal")

SPLIT_TAGS = ("standard_train", "standard_test", "unseen_train", "unseen_test")

# group -> fine-grained categories
SEMANTIC_GROUPS: dict[str, tuple[str, ...]] = {
    "ashtray": ("ashtray0",),
    "bottle": ("bottle0", "bottle1", "bottle3"),
    "bowl": ("bowl0", "bowl1", "bowl2", "bowl3", "bowl4", "bowl5"),
    "bucket": ("bucket0", "bucket1"),
    "cabinet": ("cabinet0",),
    "cap": ("cap0", "cap1", "cap2", "cap3", "cap4", "cap5"),
    "chair": ("chair0",),
    "cup": ("cup0", "cup1", "cup2"),
    "desk": ("desk0",),
    "eraser": ("eraser0",),
    "headset": ("headset0", "headset1"),
    "helmet": ("helmet0", "helmet1", "helmet2", "helmet3"),
    "jar": ("jar0",),
    "microphone": ("microphone0", "microphone1"),
    "shelf": ("shelf0",),
    "tap": ("tap0", "tap1"),
    "vase": (
        "vase0", "vase1", "vase2", "vase3", "vase4", "vase5",
        "vase6", "vase7", "vase8", "vase9", "vase10",
    ),
}

CATEGORY_TO_GROUP: dict[str, str] = {
    category: group
    for group, categories in SEMANTIC_GROUPS.items()
    for category in categories
}

ALL_CATEGORIES: tuple[str, ...] = tuple(CATEGORY_TO_GROUP)

# Per-group standard-split clip counts (train, test); documentation and test
# fixtures, summing to the published 2913 / 1101.
GROUP_STANDARD_COUNTS: dict[str, tuple[int, int]] = {
    "ashtray": (54, 18),
    "bottle": (183, 69),
    "bowl": (378, 129),
    "bucket": (132, 54),
    "cabinet": (75, 15),
    "cap": (360, 144),
    "chair": (66, 24),
    "cup": (162, 54),
    "desk": (63, 21),
    "eraser": (54, 18),
    "headset": (108, 36),
    "helmet": (252, 108),
    "jar": (54, 18),
    "microphone": (111, 39),
    "shelf": (66, 30),
    "tap": (126, 54),
    "vase": (669, 270),
}

# Published benchmark figures the count validator compares against.
PUBLISHED = {
    "standard_train_clips": 2913,
    "standard_test_clips": 1101,
    "unseen_train_clips": 2952,
    "unseen_test_clips": 1062,
    "unseen_train_categories": 36,
    "unseen_test_categories": 12,
    "normal_clips": 1410,
    "abnormal_clips": 2613,
    "total_clips": 4023,
    "qa_pairs": 16092,
}


class TaxonomyError(ValueError):
    """Unknown object category or defect type."""


def group_of(category: str) -> str:
    try:
        return CATEGORY_TO_GROUP[category]
    except KeyError:
        raise TaxonomyError(f"unknown object category: {category!r}") from None


def check_defect(defect_type: str) -> str:
    if defect_type != NO_DEFECT and defect_type not in DEFECT_TYPES:
        raise TaxonomyError(f"unknown defect type: {defect_type!r}")
    return defect_type
