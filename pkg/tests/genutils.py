"""Random generators for grammar tests: valid documents and fuzz inputs."""

from __future__ import annotations

import random

from vianqa.grammar import SECTION_ORDER, format_intervals
from vianqa.intervals import IntervalSet

WORDS = (
    "the", "object", "looks", "normal", "a", "crack", "runs", "along",
    "rim", "visible", "from", "frame", "ten", "red", "region", "appears",
    "briefly", "surface", "matte", "clay", "no", "defect", "evidence",
)


def prose(rng: random.Random, max_words: int = 20) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(rng.randint(0, max_words)))


def random_interval_set(rng: random.Random, max_intervals: int = 3) -> IntervalSet:
    n = rng.randint(0, max_intervals)
    edges = sorted(rng.sample(range(0, 2001), 2 * n)) if n else []
    pairs = []
    for i in range(n):
        start, end = edges[2 * i] / 1000, edges[2 * i + 1] / 1000
        if start < end:
            pairs.append((start, end))
    return IntervalSet.from_pairs(pairs)


def valid_document(rng: random.Random, grammar: str, full_answers: bool = True) -> str:
    parts = []
    for name in SECTION_ORDER[grammar]:
        if name == "answer":
            lines = []
            if full_answers or rng.random() < 0.8:
                lines.append(f"<q1>{rng.choice('AB')}</q1>")
            if full_answers or rng.random() < 0.8:
                lines.append(f"<q2>{rng.choice('ABCDEFG')}</q2>")
            if full_answers or rng.random() < 0.8:
                lines.append(f"<q3>{rng.choice('ABCD')}</q3>")
            if full_answers or rng.random() < 0.8:
                lines.append(f"<q4>{format_intervals(random_interval_set(rng))}</q4>")
            body = "\n".join(lines)
        else:
            body = prose(rng)
        parts.append(f"<{name}>\n{body}\n</{name}>")
    return "\n".join(parts)


MUTATION_SNIPPETS = (
    "``` ",
    "</think>",
    "<answer>",
    "<q4>[[0.1,0.9]]</q4>",
    "\x00\x7f",
    "stray text",
    "<q1>A",
    "[[1.0,0.5]]",
    "</global_perception>",
)


def fuzz_input(rng: random.Random) -> str:
    """Random fuzz case: raw noise or a mutated nearly-valid document."""
    kind = rng.random()
    if kind < 0.35:
        length = rng.randint(0, 200)
        return "".join(chr(rng.randint(1, 0x2FFF)) for _ in range(length))
    doc = valid_document(rng, rng.choice(("benchmark", "structured")))
    if kind < 0.45:
        return doc
    mutated = doc
    for _ in range(rng.randint(1, 4)):
        op = rng.randrange(4)
        if op == 0 and mutated:
            cut = rng.randrange(len(mutated))
            mutated = mutated[:cut] + mutated[cut + rng.randint(0, 20):]
        elif op == 1:
            pos = rng.randrange(len(mutated) + 1)
            mutated = mutated[:pos] + rng.choice(MUTATION_SNIPPETS) + mutated[pos:]
        elif op == 2 and mutated:
            pos = rng.randrange(len(mutated))
            mutated = mutated[:pos] + chr(rng.randint(1, 0xFFFF)) + mutated[pos + 1:]
        else:
            mutated = mutated + mutated[: rng.randint(0, 40)]
    return mutated
