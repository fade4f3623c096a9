"""Agent personas: names, ages, education levels and Big Five traits."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .exceptions import ConfigError

MIN_AGE = 18
MAX_AGE = 64

TRAIT_NAMES = (
    "openness",
    "conscientiousness",
    "extraversion",
    "agreeableness",
    "neuroticism",
)


class Polarity(str, enum.Enum):
    HIGH = "high"
    LOW = "low"

    @property
    def sign(self) -> int:
        return 1 if self is Polarity.HIGH else -1


class SamplingRule(str, enum.Enum):
    RANDOM = "random_5050"
    FORCE_HIGH = "force_high"
    FORCE_LOW = "force_low"


class Education(str, enum.Enum):
    PRIMARY = "primary"
    SECONDARY = "secondary"
    BACHELOR = "bachelor"
    MASTER = "master"
    DOCTORATE = "doctorate"

    @property
    def rank(self) -> int:
        """Rank centred on bachelor: primary=-2 ... doctorate=+2."""
        return _EDUCATION_ORDER.index(self) - 2


_EDUCATION_ORDER = list(Education)


@dataclass(frozen=True)
class TraitVector:
    openness: Polarity
    conscientiousness: Polarity
    extraversion: Polarity
    agreeableness: Polarity
    neuroticism: Polarity

    def __post_init__(self):
        for name in TRAIT_NAMES:
            value = getattr(self, name)
            if not isinstance(value, Polarity):
                object.__setattr__(self, name, Polarity(value))

    def as_dict(self) -> dict[str, str]:
        return {name: getattr(self, name).value for name in TRAIT_NAMES}

    def describe(self) -> str:
        """Comma-separated phrase such as ``high openness, low neuroticism``."""
        return ", ".join(f"{getattr(self, n).value} {n}" for n in TRAIT_NAMES)


@dataclass(frozen=True)
class TraitProfile:
    """Per-dimension sampling rule for :func:`sample_traits`."""

    openness: SamplingRule = SamplingRule.RANDOM
    conscientiousness: SamplingRule = SamplingRule.RANDOM
    extraversion: SamplingRule = SamplingRule.RANDOM
    agreeableness: SamplingRule = SamplingRule.RANDOM
    neuroticism: SamplingRule = SamplingRule.RANDOM

    def __post_init__(self):
        for name in TRAIT_NAMES:
            value = getattr(self, name)
            if not isinstance(value, SamplingRule):
                object.__setattr__(self, name, SamplingRule(value))

    @classmethod
    def random(cls) -> "TraitProfile":
        return cls()

    @classmethod
    def credulous(cls) -> "TraitProfile":
        return cls(agreeableness=SamplingRule.FORCE_HIGH, neuroticism=SamplingRule.FORCE_HIGH)

    @classmethod
    def skeptical(cls) -> "TraitProfile":
        return cls(agreeableness=SamplingRule.FORCE_LOW, neuroticism=SamplingRule.FORCE_LOW)

    @classmethod
    def uniform(cls, rule: SamplingRule | str) -> "TraitProfile":
        rule = SamplingRule(rule)
        return cls(**{name: rule for name in TRAIT_NAMES})

    @classmethod
    def from_name(cls, name: str) -> "TraitProfile":
        try:
            return PROFILES[name]
        except KeyError:
            raise ConfigError(
                f"unknown trait profile {name!r}; expected one of {sorted(PROFILES)}"
            ) from None

    @classmethod
    def from_mapping(cls, rules: Mapping[str, str]) -> "TraitProfile":
        unknown = set(rules) - set(TRAIT_NAMES)
        if unknown:
            raise ConfigError(f"unknown trait dimension(s): {sorted(unknown)}")
        try:
            return cls(**{k: SamplingRule(v) for k, v in rules.items()})
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def name(self) -> str | None:
        for key, profile in PROFILES.items():
            if profile == self:
                return key
        return None

    def as_dict(self) -> dict[str, str]:
        return {name: getattr(self, name).value for name in TRAIT_NAMES}


PROFILES = {
    "random": TraitProfile.random(),
    "credulous": TraitProfile.credulous(),
    "skeptical": TraitProfile.skeptical(),
}


@dataclass(frozen=True)
class Persona:
    id: int
    name: str
    age: int
    education: Education
    traits: TraitVector

    def __post_init__(self):
        if not MIN_AGE <= self.age <= MAX_AGE:
            raise ValueError(f"age {self.age} outside [{MIN_AGE}, {MAX_AGE}]")
        if not isinstance(self.education, Education):
            object.__setattr__(self, "education", Education(self.education))

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "age": self.age,
            "education": self.education.value,
            "traits": self.traits.as_dict(),
        }


@dataclass(frozen=True)
class SusceptibilityWeights:
    """Coefficients of :func:`susceptibility_score`."""

    base: float = 0.5
    agreeableness: float = 0.15
    neuroticism: float = 0.15
    education: float = 0.05
    floor: float = 0.05
    ceiling: float = 0.95


def sample_traits(rng: np.random.Generator, profile: TraitProfile) -> TraitVector:
    values = {}
    for name in TRAIT_NAMES:
        rule = getattr(profile, name)
        if rule is SamplingRule.FORCE_HIGH:
            values[name] = Polarity.HIGH
        elif rule is SamplingRule.FORCE_LOW:
            values[name] = Polarity.LOW
        else:
            values[name] = Polarity.HIGH if rng.random() < 0.5 else Polarity.LOW
    return TraitVector(**values)


def generate_persona(
    rng: np.random.Generator,
    profile: TraitProfile,
    name_pool: Sequence[str],
    persona_id: int = 0,
) -> Persona:
    if not name_pool:
        raise ConfigError("name pool is empty")
    name = name_pool[int(rng.integers(len(name_pool)))]
    age = int(rng.integers(MIN_AGE, MAX_AGE, endpoint=True))
    education = _EDUCATION_ORDER[int(rng.integers(len(_EDUCATION_ORDER)))]
    traits = sample_traits(rng, profile)
    return Persona(id=persona_id, name=name, age=age, education=education, traits=traits)


def generate_population(
    rng: np.random.Generator,
    n: int,
    profile: TraitProfile,
    name_pool: Sequence[str] | None = None,
) -> list[Persona]:
    """Personas with ids ``0..n-1``."""
    pool = load_name_pool() if name_pool is None else name_pool
    return [generate_persona(rng, profile, pool, persona_id=i) for i in range(n)]


def susceptibility_score(
    persona: Persona, weights: SusceptibilityWeights = SusceptibilityWeights()
) -> float:
    """Probability-like readiness to adopt what others believe.

    High agreeableness and neuroticism raise the score; each education
    step above bachelor lowers it.
    """
    t = persona.traits
    raw = (
        weights.base
        + weights.agreeableness * t.agreeableness.sign
        + weights.neuroticism * t.neuroticism.sign
        - weights.education * persona.education.rank
    )
    return float(min(max(raw, weights.floor), weights.ceiling))


def parse_name_pool(text: str) -> list[str]:
    return [line.strip() for line in text.splitlines() if line.strip()]


def load_name_pool(path: str | Path | None = None) -> list[str]:
    """Read a UTF-8 name list, one per line. Defaults to the bundled pool."""
    if path is None:
        text = resources.files("fpsim.data").joinpath("names.txt").read_text("utf-8")
    else:
        try:
            text = Path(path).read_text("utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read name pool: {exc}") from None
    names = parse_name_pool(text)
    if not names:
        raise ConfigError(f"name pool {path or 'names.txt'} has no names")
    return names
