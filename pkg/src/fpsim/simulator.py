"""Agent interaction simulator: the daily contact, intervention and update loop."""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .agent import DEFAULT_LONG_TERM_CAP, AgentState, Message, init_agent
from .backends.base import (
    AblationFlags,
    OpinionBackend,
    apply_ablation,
    render_template,
)
from .backends.llm import LlmBackend, LlmBackendConfig, load_prompt
from .backends.mock import MockBackend, MockBackendConfig
from .exceptions import ConfigError
from .labels import PopulationLabel, classify_state
from .persona import Persona, TraitProfile, generate_population, load_name_pool

__all__ = [
    "InterventionSchedule",
    "PopulationCounts",
    "PopulationLabel",
    "SimulationConfig",
    "SimulationTrace",
    "apply_intervention",
    "classify_state",
    "derive_seed",
    "make_backend",
    "run_simulation",
    "schedule_interactions",
    "tally_populations",
]

logger = logging.getLogger(__name__)

_SEED_MASK = (1 << 64) - 1
_DAY_MULTIPLIER = 0x9E3779B97F4A7C15


def derive_seed(run_seed: int, agent_id: int, day: int) -> int:
    """Seed of one agent's random stream on one day."""
    return (run_seed ^ agent_id ^ ((day * _DAY_MULTIPLIER) & _SEED_MASK)) & _SEED_MASK


@dataclass(frozen=True)
class InterventionSchedule:
    """Days on which the official agent broadcasts a refutation.

    ``mode`` is ``none``, ``on_days`` (explicit ``days``) or ``every_k``
    (``start``, ``start + k``, ...).
    """

    mode: str = "none"
    days: tuple[int, ...] = ()
    start: int = 1
    k: int = 1

    def __post_init__(self):
        if self.mode not in ("none", "on_days", "every_k"):
            raise ConfigError(f"unknown intervention mode {self.mode!r}")
        if self.mode == "every_k" and self.k < 1:
            raise ConfigError("every_k needs k >= 1")
        object.__setattr__(self, "days", tuple(sorted(set(int(d) for d in self.days))))

    @classmethod
    def none(cls) -> "InterventionSchedule":
        return cls()

    @classmethod
    def on_days(cls, days: Iterable[int]) -> "InterventionSchedule":
        return cls(mode="on_days", days=tuple(days))

    @classmethod
    def every_k(cls, start: int, k: int) -> "InterventionSchedule":
        return cls(mode="every_k", start=start, k=k)

    _SPEC = re.compile(r"^\s*(none|on_days|every_k)\s*(?:\(([^)]*)\))?\s*$")

    @classmethod
    def parse(cls, text: str) -> "InterventionSchedule":
        """Parse ``none``, ``on_days(1,7)`` or ``every_k(1,3)``."""
        m = cls._SPEC.match(str(text))
        if m is None:
            raise ConfigError(f"unknown intervention spec {text!r}")
        mode, args = m.group(1), m.group(2)
        try:
            values = [int(a) for a in args.split(",") if a.strip()] if args else []
        except ValueError:
            raise ConfigError(f"intervention arguments must be integers: {text!r}") from None
        if mode == "none":
            if values:
                raise ConfigError("intervention 'none' takes no arguments")
            return cls.none()
        if mode == "on_days":
            if not values:
                raise ConfigError("on_days needs at least one day")
            return cls.on_days(values)
        if len(values) != 2:
            raise ConfigError("every_k takes exactly two arguments: every_k(start, k)")
        return cls.every_k(*values)

    def __str__(self) -> str:
        if self.mode == "on_days":
            return f"on_days({','.join(map(str, self.days))})"
        if self.mode == "every_k":
            return f"every_k({self.start},{self.k})"
        return "none"

    def days_for(self, horizon: int) -> list[int]:
        if self.mode == "on_days":
            return [d for d in self.days if d <= horizon]
        if self.mode == "every_k":
            return list(range(self.start, horizon + 1, self.k))
        return []

    def is_active(self, day: int) -> bool:
        if self.mode == "on_days":
            return day in self.days
        if self.mode == "every_k":
            return day >= self.start and (day - self.start) % self.k == 0
        return False

    def validate(self, horizon: int) -> None:
        bad = [d for d in self.days if not 1 <= d <= horizon]
        if self.mode == "every_k" and not 1 <= self.start <= horizon:
            bad.append(self.start)
        if bad:
            raise ConfigError(f"intervention day(s) {bad} outside [1, {horizon}]")


@dataclass
class SimulationConfig:
    topic: str
    n_agents: int = 30
    horizon: int = 15
    contacts_per_day: tuple[int, int] = (2, 5)
    n_initially_infected: int = 1
    trait_profile: TraitProfile = field(default_factory=TraitProfile)
    intervention: InterventionSchedule = field(default_factory=InterventionSchedule)
    backend: str = "mock"
    run_seed: int = 0
    symmetric_contacts: bool = False
    long_term_char_cap: int = DEFAULT_LONG_TERM_CAP
    ablation: AblationFlags = field(default_factory=AblationFlags)
    mock: MockBackendConfig = field(default_factory=MockBackendConfig)
    llm: LlmBackendConfig = field(default_factory=LlmBackendConfig)
    name_pool: str | None = None

    def __post_init__(self):
        self.contacts_per_day = tuple(self.contacts_per_day)

    def validate(self) -> "SimulationConfig":
        if not isinstance(self.topic, str) or not self.topic.strip():
            raise ConfigError("topic must be a non-empty string")
        if self.n_agents < 2:
            raise ConfigError(f"n_agents must be >= 2, got {self.n_agents}")
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if len(self.contacts_per_day) != 2:
            raise ConfigError("contacts_per_day must be [c_min, c_max]")
        c_min, c_max = self.contacts_per_day
        if not 1 <= c_min <= c_max <= self.n_agents - 1:
            raise ConfigError(
                f"contacts_per_day {list(self.contacts_per_day)} must satisfy "
                f"1 <= c_min <= c_max <= n_agents - 1 = {self.n_agents - 1}"
            )
        if not 0 <= self.n_initially_infected <= self.n_agents:
            raise ConfigError(
                f"n_initially_infected must be in [0, {self.n_agents}], got {self.n_initially_infected}"
            )
        if self.backend not in ("mock", "llm"):
            raise ConfigError(f"backend must be 'mock' or 'llm', got {self.backend!r}")
        if self.long_term_char_cap < 1:
            raise ConfigError("long_term_char_cap must be positive")
        if not 0 <= self.run_seed <= _SEED_MASK:
            raise ConfigError("run_seed must be an unsigned 64-bit integer")
        self.intervention.validate(self.horizon)
        return self


@dataclass(frozen=True)
class PopulationCounts:
    day: int
    S: int
    I: int
    R: int

    @property
    def total(self) -> int:
        return self.S + self.I + self.R


@dataclass
class SimulationTrace:
    config: SimulationConfig
    personas: list[Persona]
    counts: list[PopulationCounts] = field(default_factory=list)
    records: list[list[dict]] = field(default_factory=list)
    edges: list[list[tuple[int, int]]] = field(default_factory=list)
    interventions: list[dict] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.config.run_seed

    @property
    def n_agents(self) -> int:
        return self.config.n_agents

    @property
    def horizon(self) -> int:
        return len(self.counts) - 1

    def series(self, label: str) -> np.ndarray:
        return np.array([getattr(c, label) for c in self.counts])

    def beliefs(self, day: int) -> list[int]:
        return [rec["belief"] for rec in self.records[day]]

    @property
    def final_beliefs(self) -> list[int]:
        return self.beliefs(len(self.records) - 1)

    def tweets(self, first_day: int = 1) -> list[str]:
        return [rec["tweet"] for day in self.records[first_day:] for rec in day]


def schedule_interactions(
    agent_ids: Sequence[int] | int,
    c_range: tuple[int, int],
    rng: np.random.Generator,
    symmetric: bool = False,
) -> list[tuple[int, int]]:
    """Directed (listener, speaker) pairs for one day, sorted.

    Each listener draws ``c`` uniformly from ``c_range`` and hears ``c``
    distinct other agents.
    """
    ids = list(range(agent_ids)) if isinstance(agent_ids, int) else sorted(agent_ids)
    n = len(ids)
    if n < 2:
        raise ConfigError("need at least two agents to schedule interactions")
    c_min, c_max = c_range
    if not 1 <= c_min <= c_max:
        raise ConfigError(f"invalid contact range {c_range}")
    if c_max > n - 1:
        raise ConfigError(f"c_max={c_max} exceeds the {n - 1} other agents available")
    pairs = []
    for listener in ids:
        c = int(rng.integers(c_min, c_max, endpoint=True))
        others = [a for a in ids if a != listener]
        chosen = rng.choice(len(others), size=c, replace=False)
        pairs.extend((listener, others[j]) for j in chosen)
    if symmetric:
        pairs = pairs + [(s, l) for l, s in pairs]
    return sorted(set(pairs))


def official_statement(topic: str) -> str:
    return render_template(load_prompt("official"), topic=topic).strip()


def apply_intervention(
    day: int, schedule: InterventionSchedule, agents: Sequence[AgentState], topic: str | None = None
) -> list[Message]:
    """Deliver one official refutation to every agent if ``day`` is scheduled."""
    if day < 1:
        raise ValueError(f"intervention day must be >= 1, got {day}")
    if not schedule.is_active(day) or not agents:
        return []
    msg = Message.official(official_statement(topic or agents[0].topic))
    for agent in agents:
        agent.receive(msg)
    return [msg] * len(agents)


def tally_populations(agents: Sequence[AgentState], day: int = 0) -> PopulationCounts:
    counts = {label: 0 for label in PopulationLabel}
    for agent in agents:
        counts[agent.label] += 1
    tally = PopulationCounts(
        day,
        counts[PopulationLabel.SUSCEPTIBLE],
        counts[PopulationLabel.INFECTED],
        counts[PopulationLabel.RECOVERED],
    )
    believers = sum(a.opinion.belief for a in agents)
    if tally.I != believers:
        raise AssertionError(f"day {day}: {tally.I} infected but {believers} believers")
    return tally


def make_backend(config: SimulationConfig) -> OpinionBackend:
    if config.backend == "llm":
        return LlmBackend(config.llm)
    return MockBackend(config.mock)


def _update_order(ids: list[int], order: str, day: int, seed: int) -> list[int]:
    if order == "ascending":
        return ids
    if order == "descending":
        return ids[::-1]
    if order == "shuffled":
        perm = np.random.default_rng([seed, day, 7]).permutation(len(ids))
        return [ids[i] for i in perm]
    raise ValueError(f"unknown update order {order!r}")


def run_simulation(
    config: SimulationConfig,
    backend: OpinionBackend | None = None,
    *,
    update_order: str = "ascending",
    on_day: Callable[[PopulationCounts], None] | None = None,
) -> SimulationTrace:
    """Run the full ``horizon``-day simulation and return its trace.

    Agents hear each other's opinions as of the end of the previous day,
    so the within-day update order does not affect the result. A backend
    failure for one agent-day keeps that agent's previous opinion.
    """
    config.validate()
    backend = backend or make_backend(config)
    rng = np.random.default_rng(config.run_seed)
    pool = load_name_pool(config.name_pool)
    personas = generate_population(rng, config.n_agents, config.trait_profile, pool)
    infected = set(
        int(i) for i in rng.choice(config.n_agents, size=config.n_initially_infected, replace=False)
    )
    pipeline = apply_ablation(config.ablation)
    agents = [
        init_agent(
            p, p.id in infected, config.topic,
            pipeline=pipeline, long_term_char_cap=config.long_term_char_cap,
        )
        for p in personas
    ]
    by_id = {a.id: a for a in agents}
    ids = sorted(by_id)

    trace = SimulationTrace(config=config, personas=personas)
    trace.records.append([a.record(short_term="") for a in agents])
    trace.edges.append([])
    trace.counts.append(tally_populations(agents, 0))
    if on_day:
        on_day(trace.counts[0])

    workers = max(1, int(getattr(backend, "max_concurrency", 1)))
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for day in range(1, config.horizon + 1):
            snapshot = {a.id: (a.opinion.belief, a.opinion.tweet) for a in agents}
            edges = schedule_interactions(
                ids, config.contacts_per_day, rng, symmetric=config.symmetric_contacts
            )
            delivered = apply_intervention(day, config.intervention, agents, config.topic)
            if delivered:
                trace.interventions.append({"day": day, "delivered": len(delivered)})
            for listener, speaker in edges:
                belief, tweet = snapshot[speaker]
                by_id[listener].receive(Message(speaker, belief, tweet))

            def step(agent_id: int) -> dict:
                agent_rng = np.random.default_rng(derive_seed(config.run_seed, agent_id, day))
                return by_id[agent_id].run_day(backend, agent_rng)

            order = _update_order(ids, update_order, day, config.run_seed)
            if executor is None:
                results = [step(i) for i in order]
            else:
                results = list(executor.map(step, order))
            day_records = sorted(results, key=lambda r: r["id"])
            for rec in day_records:
                if "error" in rec:
                    logger.warning("day %d agent %d kept previous opinion: %s", day, rec["id"], rec["error"])
                    trace.errors.append({"day": day, "id": rec["id"], "error": rec["error"]})
            trace.records.append(day_records)
            trace.edges.append(edges)
            counts = tally_populations(agents, day)
            if counts.total != config.n_agents:
                raise AssertionError(f"day {day}: counts do not partition the population")
            trace.counts.append(counts)
            if on_day:
                on_day(counts)
    finally:
        if executor is not None:
            executor.shutdown()
    return trace
