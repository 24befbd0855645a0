"""Parsing and validation of perception-structured model responses.

Two grammars are supported. The benchmark grammar is a <think> section
followed by an <answer> block holding <q1>..<q4> tags. The structured
grammar adds <global_perception> and <segment_perception> sections ahead of
<think>, all four exactly once and in that order.

Parsing is dual-track: a strict verdict (`format_ok`, feeding the format
reward) and best-effort field extraction (feeding the answer rewards) that
still works on malformed input. `parse` never raises on any input string;
all failures are encoded as violations or per-field parse errors.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .intervals import DEFAULT_DURATION_SEC, IntervalSet

GRAMMARS = ("benchmark", "structured")

SECTION_ORDER = {
    "benchmark": ("think", "answer"),
    "structured": ("global_perception", "segment_perception", "think", "answer"),
}

# Advisory word budgets for the structured grammar; exceeding them is a
# warning, never a format failure.
WORD_LIMITS = {"global_perception": 80, "segment_perception": 80, "think": 60}

LENGTH_CAP = 64 * 1024

Q_FIELDS = ("q1", "q2", "q3", "q4")

_Q_PATTERNS = {
    name: re.compile(rf"<{name}>(.*?)</{name}>", re.DOTALL) for name in Q_FIELDS
}
_Q_OPEN = {name: f"<{name}>" for name in Q_FIELDS}


class ViolationCode(str, enum.Enum):
    MISSING_SECTION = "missing_section"
    SECTION_OUT_OF_ORDER = "section_out_of_order"
    DUPLICATE_SECTION = "duplicate_section"
    UNCLOSED_TAG = "unclosed_tag"
    TRAILING_TEXT_AFTER_ANSWER = "trailing_text_after_answer"
    NON_QTAG_INSIDE_ANSWER = "non_qtag_inside_answer"
    UNPARSABLE_FIELD = "unparsable_field"
    MARKDOWN_FENCE = "markdown_fence"


@dataclass(frozen=True)
class Violation:
    code: ViolationCode
    location: int = 0
    note: str = ""

    def to_json_dict(self) -> dict:
        return {"code": self.code.value, "location": self.location, "note": self.note}


class IntervalParseError(ValueError):
    """The q4 payload is not a well-formed interval list."""


@dataclass(frozen=True)
class AnswerBlock:
    q1: Optional[str] = None
    q2: Optional[str] = None
    q3: Optional[str] = None
    q4: Optional[IntervalSet] = None
    parse_errors: dict[str, str] = field(default_factory=dict, compare=False)

    def missing_fields(self) -> list[str]:
        return [name for name in Q_FIELDS if getattr(self, name) is None]


EMPTY_ANSWERS = AnswerBlock()


@dataclass(frozen=True)
class StructuredResponse:
    grammar: str
    think: Optional[str]
    answer: AnswerBlock
    format_ok: bool
    global_perception: Optional[str] = None
    segment_perception: Optional[str] = None
    violations: tuple[Violation, ...] = field(default=(), compare=False)
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def section(self, name: str) -> Optional[str]:
        return getattr(self, name)


def parse_letter(text: str, allowed: str = "") -> str:
    """Normalize an option-letter answer; raises ValueError if not a letter."""
    cleaned = text.strip().strip("().").strip().upper()
    if len(cleaned) != 1 or not ("A" <= cleaned <= "Z"):
        raise ValueError(f"not a single option letter: {text.strip()!r}")
    if allowed and cleaned not in allowed:
        raise ValueError(f"letter {cleaned!r} not among allowed {allowed!r}")
    return cleaned


def _reject_constant(name: str):
    raise IntervalParseError(f"non-numeric token {name!r}")


def _to_float(value) -> float:
    try:
        return float(value)
    except OverflowError as exc:
        raise IntervalParseError(f"number out of float range: {value!r}") from exc


def parse_intervals(
    text: str,
    duration: float = DEFAULT_DURATION_SEC,
    warnings: Optional[list[str]] = None,
) -> IntervalSet:
    """Parse a q4 payload: "[]", "[s,e]", or "[[s,e], ...]".

    Out-of-range endpoints are clamped to [0, duration] with a warning;
    intervals left empty by clamping are dropped with a warning. Malformed
    syntax, non-numeric tokens, and start >= end raise IntervalParseError.
    """
    stripped = text.strip()
    if not stripped:
        raise IntervalParseError("empty q4 payload")
    try:
        payload = json.loads(stripped, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise IntervalParseError(f"malformed interval list: {exc.msg}") from exc
    if not isinstance(payload, list):
        raise IntervalParseError("interval payload must be a JSON array")
    if payload == []:
        return IntervalSet()
    if all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in payload):
        pairs = [payload]  # single-interval form [s, e]
    else:
        pairs = payload
    out = []
    for pair in pairs:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair
            )
        ):
            raise IntervalParseError(f"expected [start, end] pair, got {pair!r}")
        start, end = _to_float(pair[0]), _to_float(pair[1])
        if start >= end:
            raise IntervalParseError(f"start >= end in [{start}, {end}]")
        clamped = (max(0.0, min(start, duration)), max(0.0, min(end, duration)))
        if clamped != (start, end) and warnings is not None:
            warnings.append(
                f"interval [{start}, {end}] clamped to clip bounds [0, {duration}]"
            )
        if clamped[0] >= clamped[1]:
            if warnings is not None:
                warnings.append(
                    f"interval [{start}, {end}] empty after clamping; dropped"
                )
            continue
        out.append(clamped)
    return IntervalSet.from_pairs(out, duration)


def _occurrences(raw: str, token: str) -> list[int]:
    out, pos = [], raw.find(token)
    while pos != -1:
        out.append(pos)
        pos = raw.find(token, pos + 1)
    return out


def _scan_sections(raw: str, grammar: str):
    """Strict structural scan; returns (violations, spans).

    spans maps section name -> (body_start, body_end) for sections whose
    open/close pair was uniquely located, regardless of other violations.
    """
    sections = SECTION_ORDER[grammar]
    violations: list[Violation] = []
    spans: dict[str, tuple[int, int]] = {}
    positions: dict[str, tuple[list[int], list[int]]] = {}

    for name in sections:
        opens = _occurrences(raw, f"<{name}>")
        closes = _occurrences(raw, f"</{name}>")
        positions[name] = (opens, closes)
        if not opens and not closes:
            violations.append(
                Violation(ViolationCode.MISSING_SECTION, 0, f"<{name}> missing")
            )
        elif len(opens) > 1 or len(closes) > 1:
            where = (opens + closes)[1] if len(opens) > 1 else closes[1]
            violations.append(
                Violation(
                    ViolationCode.DUPLICATE_SECTION, where, f"<{name}> repeated"
                )
            )
        elif len(opens) != len(closes):
            where = opens[0] if opens else closes[0]
            violations.append(
                Violation(
                    ViolationCode.UNCLOSED_TAG,
                    where,
                    f"<{name}> opened without matching </{name}>"
                    if opens
                    else f"</{name}> without matching <{name}>",
                )
            )
        elif closes[0] < opens[0]:
            violations.append(
                Violation(
                    ViolationCode.UNCLOSED_TAG,
                    closes[0],
                    f"</{name}> appears before <{name}>",
                )
            )
        else:
            spans[name] = (opens[0] + len(name) + 2, closes[0])

    if len(spans) == len(sections):
        boundaries = []
        for name in sections:
            body_start, body_end = spans[name]
            boundaries.append((body_start - len(name) - 2, name, "open"))
            boundaries.append((body_end, name, "close"))
        expected = [(name, kind) for name in sections for kind in ("open", "close")]
        actual_sorted = sorted(boundaries)
        if [(n, k) for _, n, k in actual_sorted] != expected:
            violations.append(
                Violation(
                    ViolationCode.SECTION_OUT_OF_ORDER,
                    actual_sorted[0][0],
                    "sections not in required order",
                )
            )
        else:
            _check_gaps(raw, spans, sections, grammar, violations)

    return violations, spans


def _check_gaps(raw, spans, sections, grammar, violations):
    def nonspace(segment: str, offset: int) -> Optional[int]:
        for i, ch in enumerate(segment):
            if not ch.isspace():
                return offset + i
        return None

    first_open = spans[sections[0]][0] - len(sections[0]) - 2
    if grammar == "structured":
        pos = nonspace(raw[:first_open], 0)
        if pos is not None:
            violations.append(
                Violation(
                    ViolationCode.SECTION_OUT_OF_ORDER,
                    pos,
                    "text before first section",
                )
            )
    for prev, nxt in zip(sections, sections[1:]):
        gap_start = spans[prev][1] + len(prev) + 3
        gap_end = spans[nxt][0] - len(nxt) - 2
        pos = nonspace(raw[gap_start:gap_end], gap_start)
        if pos is not None:
            violations.append(
                Violation(
                    ViolationCode.SECTION_OUT_OF_ORDER,
                    pos,
                    f"text between </{prev}> and <{nxt}>",
                )
            )
    tail_start = spans["answer"][1] + len("</answer>")
    pos = nonspace(raw[tail_start:], tail_start)
    if pos is not None:
        violations.append(
            Violation(
                ViolationCode.TRAILING_TEXT_AFTER_ANSWER, pos, "text after </answer>"
            )
        )


def _extract_answers(raw: str, answer_span, duration: float):
    """Best-effort q-field extraction plus structural answer-body checks."""
    violations: list[Violation] = []
    warnings: list[str] = []
    errors: dict[str, str] = {}
    values: dict[str, object] = {name: None for name in Q_FIELDS}

    if answer_span is not None:
        body_start, body_end = answer_span
        region = raw[body_start:body_end]
        offset = body_start
    else:
        region, offset = raw, 0

    covered: list[tuple[int, int]] = []
    for name in Q_FIELDS:
        matches = list(_Q_PATTERNS[name].finditer(region))
        if not matches:
            continue
        if len(matches) > 1 and answer_span is not None:
            violations.append(
                Violation(
                    ViolationCode.DUPLICATE_SECTION,
                    offset + matches[1].start(),
                    f"<{name}> repeated inside answer",
                )
            )
        match = matches[0]
        covered.extend((m.start(), m.end()) for m in matches)
        content = match.group(1)
        try:
            if name == "q1":
                values[name] = parse_letter(content, allowed="AB")
            elif name in ("q2", "q3"):
                values[name] = parse_letter(content)
            else:
                values[name] = parse_intervals(content, duration, warnings)
        except (ValueError, IntervalParseError) as exc:
            errors[name] = str(exc)

    if answer_span is not None:
        leftover = list(region)
        for start, end in covered:
            for i in range(start, end):
                leftover[i] = " "
        for i, ch in enumerate(leftover):
            if not ch.isspace():
                violations.append(
                    Violation(
                        ViolationCode.NON_QTAG_INSIDE_ANSWER,
                        offset + i,
                        "non q-tag content inside <answer>",
                    )
                )
                break

    block = AnswerBlock(
        q1=values["q1"],
        q2=values["q2"],
        q3=values["q3"],
        q4=values["q4"],
        parse_errors=errors,
    )
    return block, violations, warnings


def parse(
    raw: str,
    grammar: str = "structured",
    duration: float = DEFAULT_DURATION_SEC,
    length_cap: int = LENGTH_CAP,
) -> StructuredResponse:
    """Parse arbitrary text against one of the response grammars.

    Never raises: the strict verdict lands in format_ok/violations and field
    extraction is best-effort even for invalid input.
    """
    if grammar not in GRAMMARS:
        raise ValueError(f"grammar must be one of {GRAMMARS}, got {grammar!r}")
    violations: list[Violation] = []
    if len(raw) > length_cap:
        violations.append(
            Violation(
                ViolationCode.TRAILING_TEXT_AFTER_ANSWER,
                length_cap,
                f"input exceeded {length_cap}-character cap; truncated",
            )
        )
        raw = raw[:length_cap]

    fence = raw.find("```")
    if fence != -1:
        violations.append(
            Violation(ViolationCode.MARKDOWN_FENCE, fence, "markdown fence present")
        )

    scan_violations, spans = _scan_sections(raw, grammar)
    violations.extend(scan_violations)

    answers, answer_violations, warnings = _extract_answers(
        raw, spans.get("answer"), duration
    )
    violations.extend(answer_violations)

    sections = {name: None for name in SECTION_ORDER["structured"]}
    for name in SECTION_ORDER[grammar]:
        if name in spans and name != "answer":
            body_start, body_end = spans[name]
            sections[name] = raw[body_start:body_end].strip()

    warn = list(warnings)
    if grammar == "structured":
        for name, limit in WORD_LIMITS.items():
            body = sections.get(name)
            if body is not None and len(body.split()) > limit:
                warn.append(f"<{name}> exceeds the advisory {limit}-word limit")

    return StructuredResponse(
        grammar=grammar,
        global_perception=sections["global_perception"],
        segment_perception=sections["segment_perception"],
        think=sections["think"],
        answer=answers,
        format_ok=not violations,
        violations=tuple(violations),
        warnings=tuple(warn),
    )


def format_intervals(intervals: IntervalSet) -> str:
    if intervals.is_empty:
        return "[]"
    return "[" + ",".join(f"[{repr(s)},{repr(e)}]" for s, e in intervals) + "]"


def render_canonical(resp: StructuredResponse) -> str:
    """Serialize a valid response so that parsing it again is the identity."""
    if not resp.format_ok:
        raise ValueError("render_canonical requires a response with format_ok=True")
    parts = []
    for name in SECTION_ORDER[resp.grammar]:
        if name == "answer":
            lines = []
            for q in ("q1", "q2", "q3"):
                value = getattr(resp.answer, q)
                if value is not None:
                    lines.append(f"<{q}>{value}</{q}>")
            if resp.answer.q4 is not None:
                lines.append(f"<q4>{format_intervals(resp.answer.q4)}</q4>")
            body = "\n".join(lines)
        else:
            body = resp.section(name) or ""
        parts.append(f"<{name}>\n{body}\n</{name}>")
    return "\n".join(parts)


@dataclass(frozen=True)
class RejectedTrace:
    index: int
    trace: str
    diagnoses: tuple[Violation, ...]


@dataclass
class FilterReport:
    kept: list[str]
    rejected: list[RejectedTrace]

    @property
    def n_kept(self) -> int:
        return len(self.kept)

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)


def filter_sft_traces(
    traces: Iterable[str],
    grammar: str = "structured",
    duration: float = DEFAULT_DURATION_SEC,
) -> FilterReport:
    """Partition candidate reasoning traces for supervised fine-tuning.

    A trace is kept iff its strict format verdict passes and all four answer
    fields are present and parsable; everything else is rejected with
    violation diagnoses.
    """
    kept: list[str] = []
    rejected: list[RejectedTrace] = []
    for index, trace in enumerate(traces):
        resp = parse(trace, grammar=grammar, duration=duration)
        diagnoses = list(resp.violations)
        for name in resp.answer.missing_fields():
            message = resp.answer.parse_errors.get(name, f"{name} missing")
            diagnoses.append(
                Violation(ViolationCode.UNPARSABLE_FIELD, 0, f"{name}: {message}")
            )
        if resp.format_ok and not resp.answer.missing_fields():
            kept.append(trace)
        else:
            rejected.append(RejectedTrace(index, trace, tuple(diagnoses)))
    return FilterReport(kept=kept, rejected=rejected)
