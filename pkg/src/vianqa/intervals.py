"""Time-interval sets over a fixed-duration clip.

An interval set is an ordered, pairwise-disjoint list of [start, end) spans
in seconds, bounded by the clip duration (2.0 s by default). Everything else
in the toolkit (QA ground truth, parsed q4 answers, derived visibility
candidates, review decisions) carries its temporal payload as one of these.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

DEFAULT_DURATION_SEC = 2.0


class IntervalError(ValueError):
    """An interval violates the [0, duration] / start < end invariants."""


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, disjoint (start, end) pairs within [0, duration]."""

    intervals: tuple[tuple[float, float], ...] = ()

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[Sequence[float]],
        duration: float = DEFAULT_DURATION_SEC,
    ) -> "IntervalSet":
        """Validate raw (start, end) pairs and normalize them.

        Raises IntervalError on out-of-range or inverted pairs. Overlapping
        or touching intervals are merged so the invariants hold.
        """
        checked = []
        for pair in pairs:
            if len(pair) != 2:
                raise IntervalError(f"interval must be a [start, end] pair, got {pair!r}")
            start, end = float(pair[0]), float(pair[1])
            if not (0.0 <= start < end <= duration):
                raise IntervalError(
                    f"interval [{start}, {end}] outside 0 <= start < end <= {duration}"
                )
            checked.append((start, end))
        return cls(_merge(checked))

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def total_length(self) -> float:
        return sum(e - s for s, e in self.intervals)

    def to_pairs(self) -> list[list[float]]:
        return [[s, e] for s, e in self.intervals]


EMPTY = IntervalSet()


def _merge(pairs: list[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    if not pairs:
        return ()
    pairs = sorted(pairs)
    merged = [pairs[0]]
    for start, end in pairs[1:]:
        last_start, last_end = merged[-1]
        if start <= last_end:
            merged[-1] = (last_start, max(last_end, end))
        else:
            merged.append((start, end))
    return tuple(merged)


def pair_intersection(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Overlap length of two single intervals."""
    return max(0.0, min(a[1], b[1]) - max(a[0], b[0]))


def pair_union(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Union length of two single intervals (covers the disjoint case)."""
    return (a[1] - a[0]) + (b[1] - b[0]) - pair_intersection(a, b)


def pair_iou(a: tuple[float, float], b: tuple[float, float]) -> float:
    union = pair_union(a, b)
    if union <= 0.0:
        return 0.0
    return pair_intersection(a, b) / union


def set_intersection_length(a: IntervalSet, b: IntervalSet) -> float:
    return sum(pair_intersection(x, y) for x in a.intervals for y in b.intervals)


def set_union_length(a: IntervalSet, b: IntervalSet) -> float:
    # Both sets are internally disjoint, so inclusion-exclusion reduces to this.
    return a.total_length() + b.total_length() - set_intersection_length(a, b)
