"""Deterministic, trait-parameterised stand-in for a language model.

The mock keeps belief dynamics cheap and reproducible. Summaries are
canonical tally lines, long-term memory is a running total plus recent
daily lines, and opinions flip with a probability driven by the share of
believers in memory and the persona's susceptibility.

Two settings shape how memory turns into evidence. ``recall_days`` limits
the opinion step to the most recent daily lines of long-term memory.
``short_term_persuades`` decides whether a bare same-day summary can move
an opinion; by default only consolidated long-term memory can.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, NamedTuple, Sequence

import numpy as np

from ..persona import Persona, SusceptibilityWeights, susceptibility_score
from .base import NO_CONVERSATIONS, OpinionDraft, clip_tweet

if TYPE_CHECKING:
    from ..agent import Message, Opinion

_HEARD = re.compile(r"heard (\d+) believe, (\d+) disbelieve, (\d+) official")
_TOTAL = re.compile(r"^over (\d+) days?: heard (\d+) believe, (\d+) disbelieve, (\d+) official$")
_DAY_LINE = re.compile(r"^day \d+: ")
_RAW_DAY = re.compile(r"^day \d+:$")
_RAW = re.compile(r"^(OFFICIAL|agent\d+) \(belief=([01])\): ?(.*)$", re.M)


class Tally(NamedTuple):
    believe: int
    disbelieve: int
    official: int


@dataclass(frozen=True)
class MockBackendConfig:
    official_weight: float = 3.0
    recall_days: int = 2
    short_term_persuades: bool = False
    susceptibility: SusceptibilityWeights = field(default_factory=SusceptibilityWeights)
    seed: int = 0

    def __post_init__(self):
        if self.official_weight < 1:
            raise ValueError("official_weight must be >= 1")
        if self.recall_days < 1:
            raise ValueError("recall_days must be >= 1")


def mock_summarize(messages: Sequence[Message]) -> str:
    if not messages:
        return NO_CONVERSATIONS
    official = sum(1 for m in messages if m.kind == "official")
    believe = sum(1 for m in messages if m.belief == 1)
    return format_tally(Tally(believe, len(messages) - believe, official))


def format_tally(tally: Tally) -> str:
    return f"heard {tally.believe} believe, {tally.disbelieve} disbelieve, {tally.official} official"


def parse_tally(text: str) -> Tally | None:
    """First tally line in ``text``; ``None`` when there is none."""
    m = _HEARD.search(text)
    if m is None:
        return None
    return Tally(*(int(g) for g in m.groups()))


def parse_raw_messages(text: str) -> list[tuple[str, int, str]]:
    """(speaker, belief, tweet) for every raw message line in ``text``."""
    return [(m.group(1), int(m.group(2)), m.group(3)) for m in _RAW.finditer(text)]


def raw_tally(text: str) -> Tally | None:
    lines = parse_raw_messages(text)
    if not lines:
        return None
    official = sum(1 for speaker, _, _ in lines if speaker == "OFFICIAL")
    believe = sum(b for _, b, _ in lines)
    return Tally(believe, len(lines) - believe, official)


def weighted_votes(tally: Tally, official_weight: float) -> tuple[float, float]:
    """(believe, disbelieve) votes with each official refutation worth ``official_weight``."""
    peer_disbelieve = tally.disbelieve - tally.official
    return float(tally.believe), peer_disbelieve + official_weight * tally.official


def flip_probability(prev_belief: int, believer_share: float, susceptibility: float) -> float:
    if prev_belief == 0:
        return susceptibility * believer_share
    return (1.0 - susceptibility) * (1.0 - believer_share)


def mock_integrate(long_term: str, short_term: str, cap: int) -> str:
    """Fold today's tally into the running total; keep recent daily lines under ``cap``."""
    days, total = 0, Tally(0, 0, 0)
    details: list[str] = []
    if long_term:
        lines = long_term.splitlines()
        m = _TOTAL.match(lines[0])
        if m:
            days = int(m.group(1))
            total = Tally(*(int(g) for g in m.groups()[1:]))
            details = [ln for ln in lines[1:] if _DAY_LINE.match(ln)]
    today = parse_tally(short_term) or raw_tally(short_term) or Tally(0, 0, 0)
    days += 1
    total = Tally(*(a + b for a, b in zip(total, today)))
    first_line = short_term.splitlines()[0] if short_term else NO_CONVERSATIONS
    details.append(f"day {days}: {first_line}")
    header = f"over {days} day{'s' if days != 1 else ''}: {format_tally(total)}"
    while details and len(header) + sum(len(d) + 1 for d in details) > cap:
        details.pop(0)
    return "\n".join([header, *details])


_BELIEVE_KEPT = (
    "Still convinced that {topic}. {b} of the {n} voices I remember agree with me.",
    "I keep hearing it and I keep believing it: {topic}. Count so far: {b} believe, {d} doubt.",
    "Nothing has changed my mind. {b} people out of {n} say the same about {topic}.",
    "{name} here. I believe {topic}, and {b} of the people I talked to do too.",
)
_BELIEVE_CHANGED = (
    "I changed my mind: {topic} now sounds right to me. {b} of {n} people I heard believe it.",
    "After hearing {b} believers against {d} doubters I have to admit it: {topic}.",
    "{name} here, switching sides. Too many voices ({b} of {n}) say {topic} is true.",
)
_DISBELIEVE_KEPT = (
    "Still not buying that {topic}. Only {b} of the {n} voices I remember believe it.",
    "I remain skeptical: {topic} does not hold up. {d} doubters versus {b} believers so far.",
    "{name} here. I do not believe {topic}; {d} of the {n} people I heard agree.",
    "No evidence has convinced me that {topic}. The count is {b} for and {d} against.",
)
_DISBELIEVE_CHANGED = (
    "I was wrong before. {topic} does not check out; {d} of {n} people I heard doubt it.",
    "Changed my view after {d} doubters and {o} official statement(s): {topic} is false.",
    "{name} here, stepping back. With {d} of {n} voices against it, I no longer believe {topic}.",
)


class MockBackend:
    """Tally-driven backend with trait-dependent flip probabilities."""

    name = "mock"
    max_concurrency = 1

    def __init__(self, config: MockBackendConfig | None = None):
        self.config = config or MockBackendConfig()
        self.calls = 0

    def summarize(self, messages, *, persona=None, topic=""):
        self.calls += 1
        return mock_summarize(messages)

    def integrate(self, long_term, short_term, *, cap, persona=None, topic=""):
        self.calls += 1
        return mock_integrate(long_term, short_term, cap)

    def form_opinion(
        self, persona, memory, previous, *, topic, rng=None, with_reasoning=True
    ) -> OpinionDraft:
        self.calls += 1
        if rng is None:
            rng = np.random.default_rng(self.config.seed)
        evidence = read_memory(memory, self.config.recall_days)
        return mock_form_opinion(
            self.config, persona, evidence.tally, previous, rng,
            topic=topic,
            with_reasoning=with_reasoning,
            persuadable=evidence.consolidated or self.config.short_term_persuades,
            echo_from=evidence.raw,
        )


class Evidence(NamedTuple):
    tally: Tally
    consolidated: bool
    raw: list[tuple[str, int, str]] | None = None


def read_memory(memory: str, recall_days: int) -> Evidence:
    """Tally found in a memory text and whether it is consolidated memory.

    Understands the mock long-term layout (the tally covers only the newest
    ``recall_days`` daily lines), a single short-term tally line, and raw
    message logs. Raw logs accumulated across days carry ``day N:`` markers
    and count as consolidated; a bare tally line or unmarked log does not.
    """
    lines = memory.splitlines()
    if lines and _TOTAL.match(lines[0]):
        days = [parse_tally(ln) for ln in lines[1:] if _DAY_LINE.match(ln)]
        recent = [t for t in days[-recall_days:] if t is not None]
        total = Tally(*(sum(col) for col in zip(Tally(0, 0, 0), *recent)))
        return Evidence(total, True)
    tally = parse_tally(memory)
    if tally is not None:
        return Evidence(tally, False)
    raw = parse_raw_messages(memory)
    if raw:
        consolidated = any(_RAW_DAY.match(ln) for ln in lines)
        return Evidence(raw_tally(memory), consolidated, raw)
    return Evidence(Tally(0, 0, 0), False)


def mock_form_opinion(
    config: MockBackendConfig,
    persona: Persona,
    tally: Tally,
    previous: Opinion,
    rng: np.random.Generator,
    *,
    topic: str = "the news",
    with_reasoning: bool = True,
    persuadable: bool = True,
    echo_from: Sequence[tuple[str, int, str]] | None = None,
) -> OpinionDraft:
    """One opinion update from a (believe, disbelieve, official) tally.

    The share of believers is taken to be the previous belief when the
    tally is empty or ``persuadable`` is false, so the opinion never moves.
    ``echo_from`` holds raw message lines when no summary exists; the tweet
    then repeats the latest matching one.
    """
    believe, disbelieve = weighted_votes(tally, config.official_weight)
    total = believe + disbelieve
    share = believe / total if total > 0 and persuadable else float(previous.belief)
    sigma = susceptibility_score(persona, config.susceptibility)
    p_flip = flip_probability(previous.belief, share, sigma)
    # draw unconditionally so the stream position does not depend on the branch
    u = rng.random()
    belief = 1 - previous.belief if u < p_flip else previous.belief
    changed = belief != previous.belief

    if echo_from is not None:
        tweet = _echo_tweet(echo_from, belief, topic)
    else:
        if belief:
            templates = _BELIEVE_CHANGED if changed else _BELIEVE_KEPT
        else:
            templates = _DISBELIEVE_CHANGED if changed else _DISBELIEVE_KEPT
        template = templates[int(rng.integers(len(templates)))]
        tweet = template.format(
            topic=topic,
            name=persona.name,
            b=tally.believe,
            d=tally.disbelieve,
            o=tally.official,
            n=tally.believe + tally.disbelieve,
        )
        tweet = tweet[0].upper() + tweet[1:]

    reasoning = ""
    if with_reasoning:
        verdict = ("now believe" if belief else "now reject") if changed else (
            "still believe" if belief else "still reject"
        )
        reasoning = (
            f"As a {persona.age}-year-old with {persona.education.value} education and "
            f"{persona.traits.describe()}, I weigh what I remember: {tally.believe} believe, "
            f"{tally.disbelieve} disbelieve, {tally.official} official refutation(s). "
            f"Believer share {share:.2f}, my readiness to follow others {sigma:.2f}, "
            f"chance of changing my mind {p_flip:.2f}. I {verdict} the story."
        )
    return OpinionDraft(belief, clip_tweet(tweet), reasoning)


def _echo_tweet(lines: Sequence[tuple[str, int, str]], belief: int, topic: str) -> str:
    for _, b, tweet in reversed(lines):
        if b == belief and tweet:
            return tweet
    return f"I believe {topic}." if belief else f"I do not believe {topic}."
