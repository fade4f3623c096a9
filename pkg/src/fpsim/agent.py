"""Dynamic opinion agents: dual memory, daily reflection and opinion updates."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Union

from .backends.base import (
    FULL_PIPELINE,
    NO_CONVERSATIONS,
    OFFICIAL,
    Pipeline,
    clip_tweet,
    format_messages,
    keep_head,
    keep_tail,
)
from .exceptions import BackendError, ConfigError, PipelineOrderError
from .labels import PopulationLabel, classify_state
from .persona import Persona

if TYPE_CHECKING:
    import numpy as np

    from .backends.base import OpinionBackend

DEFAULT_LONG_TERM_CAP = 2000

SpeakerId = Union[int, str]


class MessageKind(str, enum.Enum):
    PEER = "peer"
    OFFICIAL = "official"


@dataclass(frozen=True)
class Message:
    speaker_id: SpeakerId
    belief: int
    tweet: str
    kind: MessageKind = MessageKind.PEER

    def __post_init__(self):
        if self.belief not in (0, 1):
            raise ValueError(f"belief must be 0 or 1, got {self.belief!r}")
        if self.kind is MessageKind.OFFICIAL and self.belief != 0:
            raise ValueError("official messages always carry belief 0")

    @classmethod
    def official(cls, tweet: str) -> "Message":
        return cls(OFFICIAL, 0, tweet, MessageKind.OFFICIAL)


@dataclass(frozen=True)
class Opinion:
    belief: int
    tweet: str
    reasoning: str = ""
    day: int = 0


@dataclass
class MemoryState:
    short_term: str = ""
    long_term: str = ""
    long_term_char_cap: int = DEFAULT_LONG_TERM_CAP


class Phase(enum.IntEnum):
    """Position within the fixed daily pipeline."""

    LISTENING = 0
    SHORT_TERM_DONE = 1
    LONG_TERM_DONE = 2
    OPINION_DONE = 3


def initial_tweet(topic: str, belief: int) -> str:
    if belief:
        return clip_tweet(f"Just read that {topic}. I believe it and people need to know.")
    return clip_tweet(f"Seeing posts claiming {topic}. I am not convinced it is true.")


@dataclass
class AgentState:
    persona: Persona
    topic: str
    opinion: Opinion
    initial_belief: int
    memory: MemoryState = field(default_factory=MemoryState)
    belief_history: list[int] = field(default_factory=list)
    inbox: list[Message] = field(default_factory=list)
    label: PopulationLabel = PopulationLabel.SUSCEPTIBLE
    pipeline: Pipeline = FULL_PIPELINE
    phase: Phase = Phase.LISTENING
    error: str | None = None

    @property
    def id(self) -> int:
        return self.persona.id

    @property
    def days_completed(self) -> int:
        return len(self.belief_history)

    def _require(self, phase: Phase, step: str) -> None:
        if self.phase is not phase:
            raise PipelineOrderError(
                f"agent {self.id}: {step} called during phase {self.phase.name}, "
                f"expected {phase.name}"
            )

    def receive(self, msg: Message) -> "AgentState":
        self._require(Phase.LISTENING, "receive")
        self.inbox.append(msg)
        return self

    def reflect_short_term(self, backend: OpinionBackend) -> "AgentState":
        self._require(Phase.LISTENING, "reflect_short_term")
        if not self.inbox:
            self.memory.short_term = NO_CONVERSATIONS
        elif self.pipeline.summarize_short_term:
            self.memory.short_term = backend.summarize(
                list(self.inbox), persona=self.persona, topic=self.topic
            )
        else:
            self.memory.short_term = format_messages(self.inbox)
        self.phase = Phase.SHORT_TERM_DONE
        return self

    def reflect_long_term(self, backend: OpinionBackend) -> "AgentState":
        self._require(Phase.SHORT_TERM_DONE, "reflect_long_term")
        mem = self.memory
        cap = mem.long_term_char_cap
        if not self.pipeline.keep_long_term:
            mem.long_term = ""
        elif self.pipeline.integrate_long_term:
            merged = backend.integrate(
                mem.long_term, mem.short_term, cap=cap, persona=self.persona, topic=self.topic
            )
            mem.long_term = keep_head(merged, cap)
        elif self.inbox:
            # raw accumulation: no summary, oldest lines fall off at the cap
            block = f"day {self.days_completed + 1}:\n{mem.short_term}"
            joined = f"{mem.long_term}\n{block}" if mem.long_term else block
            mem.long_term = keep_tail(joined, cap)
        self.phase = Phase.LONG_TERM_DONE
        return self

    def update_opinion(
        self, backend: OpinionBackend, rng: np.random.Generator | None = None
    ) -> "AgentState":
        self._require(Phase.LONG_TERM_DONE, "update_opinion")
        day = self.days_completed + 1
        memory = getattr(self.memory, self.pipeline.opinion_memory)
        draft = backend.form_opinion(
            self.persona,
            memory,
            self.opinion,
            topic=self.topic,
            rng=rng,
            with_reasoning=self.pipeline.request_reasoning,
        )
        if draft.belief not in (0, 1):
            raise ValueError(f"backend returned belief {draft.belief!r}")
        reasoning = draft.reasoning if self.pipeline.request_reasoning else ""
        self.opinion = Opinion(
            belief=int(draft.belief),
            tweet=clip_tweet(draft.tweet) or self.opinion.tweet,
            reasoning=reasoning,
            day=day,
        )
        self.belief_history.append(self.opinion.belief)
        self.phase = Phase.OPINION_DONE
        return self

    def hold_opinion(self, reason: str) -> "AgentState":
        """Skip the rest of today's pipeline and keep yesterday's opinion."""
        if self.phase is Phase.OPINION_DONE:
            raise PipelineOrderError(f"agent {self.id}: opinion already updated today")
        day = self.days_completed + 1
        prev = self.opinion
        self.opinion = Opinion(prev.belief, prev.tweet, prev.reasoning, day)
        self.belief_history.append(prev.belief)
        self.error = reason
        self.phase = Phase.OPINION_DONE
        return self

    def end_of_day(self) -> "AgentState":
        self._require(Phase.OPINION_DONE, "end_of_day")
        self.inbox.clear()
        self.memory.short_term = ""
        self.label = classify_state([self.initial_belief, *self.belief_history])
        self.error = None
        self.phase = Phase.LISTENING
        return self

    def run_day(
        self, backend: OpinionBackend, rng: np.random.Generator | None = None
    ) -> dict:
        """Reflect, update and close the day; returns the transcript record.

        A backend failure at any step leaves long-term memory as it was this
        morning and keeps the previous opinion.
        """
        long_before = self.memory.long_term
        try:
            self.reflect_short_term(backend)
            self.reflect_long_term(backend)
            self.update_opinion(backend, rng)
        except BackendError as exc:
            self.memory.long_term = long_before
            self.hold_opinion(f"{type(exc).__name__}: {exc}")
        error = self.error
        short_term = self.memory.short_term
        self.end_of_day()
        return self.record(short_term=short_term, error=error)

    def record(self, short_term: str | None = None, error: str | None = None) -> dict:
        rec = {
            "id": self.id,
            "day": self.opinion.day,
            "belief": self.opinion.belief,
            "tweet": self.opinion.tweet,
            "reasoning": self.opinion.reasoning,
            "short_term": self.memory.short_term if short_term is None else short_term,
            "long_term": self.memory.long_term,
            "label": self.label.value,
        }
        if error is not None:
            rec["error"] = error
        return rec


def init_agent(
    persona: Persona,
    initially_infected: bool,
    topic: str,
    *,
    pipeline: Pipeline = FULL_PIPELINE,
    long_term_char_cap: int = DEFAULT_LONG_TERM_CAP,
) -> AgentState:
    if not topic or not topic.strip():
        raise ConfigError("topic must be a non-empty string")
    if long_term_char_cap < 1:
        raise ConfigError("long_term_char_cap must be positive")
    belief = 1 if initially_infected else 0
    return AgentState(
        persona=persona,
        topic=topic,
        opinion=Opinion(belief=belief, tweet=initial_tweet(topic, belief), day=0),
        initial_belief=belief,
        memory=MemoryState(long_term_char_cap=long_term_char_cap),
        label=PopulationLabel.INFECTED if belief else PopulationLabel.SUSCEPTIBLE,
        pipeline=pipeline,
    )
