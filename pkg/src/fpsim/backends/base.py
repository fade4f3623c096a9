"""Backend interface, ablation switches and shared text helpers."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, NamedTuple, Protocol, Sequence, runtime_checkable

if TYPE_CHECKING:
    import numpy as np

    from ..agent import Message, Opinion
    from ..persona import Persona

NO_CONVERSATIONS = "No conversations today."
OFFICIAL = "OFFICIAL"
TWEET_CHAR_CAP = 560


class OpinionDraft(NamedTuple):
    belief: int
    tweet: str
    reasoning: str


@runtime_checkable
class OpinionBackend(Protocol):
    """Cognition substrate behind the three memory/opinion operations."""

    name: str
    max_concurrency: int

    def summarize(self, messages: Sequence[Message], *, persona: Persona, topic: str) -> str: ...

    def integrate(
        self, long_term: str, short_term: str, *, cap: int, persona: Persona, topic: str
    ) -> str: ...

    def form_opinion(
        self,
        persona: Persona,
        memory: str,
        previous: Opinion,
        *,
        topic: str,
        rng: np.random.Generator | None = None,
        with_reasoning: bool = True,
    ) -> OpinionDraft: ...


@dataclass(frozen=True)
class AblationFlags:
    disable_long_term: bool = False
    disable_short_term: bool = False
    disable_reasoning: bool = False

    def as_dict(self) -> dict[str, bool]:
        return {
            "disable_long_term": self.disable_long_term,
            "disable_short_term": self.disable_short_term,
            "disable_reasoning": self.disable_reasoning,
        }


@dataclass(frozen=True)
class Pipeline:
    """Which reflection steps an agent runs each day."""

    summarize_short_term: bool = True
    integrate_long_term: bool = True
    keep_long_term: bool = True
    request_reasoning: bool = True

    @property
    def opinion_memory(self) -> str:
        """Which memory the opinion step reads: ``long_term`` or ``short_term``."""
        return "long_term" if self.keep_long_term else "short_term"


FULL_PIPELINE = Pipeline()


def apply_ablation(flags: AblationFlags, pipeline: Pipeline = FULL_PIPELINE) -> Pipeline:
    """Switch off the components named by ``flags``.

    Without short-term reflection the raw message log is appended to
    long-term memory in place of an integrated summary.
    """
    if flags.disable_short_term:
        pipeline = replace(pipeline, summarize_short_term=False, integrate_long_term=False)
    if flags.disable_long_term:
        pipeline = replace(pipeline, keep_long_term=False, integrate_long_term=False)
    if flags.disable_reasoning:
        pipeline = replace(pipeline, request_reasoning=False)
    return pipeline


def format_message(msg: Message) -> str:
    speaker = OFFICIAL if msg.speaker_id == OFFICIAL else f"agent{msg.speaker_id}"
    return f"{speaker} (belief={msg.belief}): {msg.tweet}"


def format_messages(messages: Sequence[Message]) -> str:
    return "\n".join(format_message(m) for m in messages)


def clip_tweet(text: str, cap: int = TWEET_CHAR_CAP) -> str:
    text = " ".join(text.split())
    if len(text) <= cap:
        return text
    cut = text[: cap - 3].rsplit(" ", 1)[0]
    return cut + "..."


def keep_tail(text: str, cap: int) -> str:
    """Drop whole leading lines until ``text`` fits in ``cap`` characters."""
    if len(text) <= cap:
        return text
    lines = text.splitlines()
    while lines and len("\n".join(lines)) > cap:
        lines.pop(0)
    if lines:
        return "\n".join(lines)
    return text[-cap:]


def keep_head(text: str, cap: int) -> str:
    """Cut ``text`` to ``cap`` characters at a word boundary when possible."""
    if len(text) <= cap:
        return text
    cut = text[:cap]
    space = cut.rfind(" ")
    return cut[:space] if space > cap // 2 else cut


_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")


def render_template(template: str, **values: str) -> str:
    """Substitute ``{name}`` placeholders; every placeholder must be supplied."""
    missing = sorted({m for m in _PLACEHOLDER.findall(template) if m not in values})
    if missing:
        raise KeyError(f"unresolved placeholder(s): {missing}")
    return _PLACEHOLDER.sub(lambda m: str(values[m.group(1)]), template)


def placeholders(template: str) -> set[str]:
    return set(_PLACEHOLDER.findall(template))
