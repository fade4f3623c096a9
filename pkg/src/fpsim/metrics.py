"""Propagation metrics for one run and distinct-n opinion diversity."""

from __future__ import annotations

import math
import re
import string
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .validation import check_beliefs

HALF_NEVER = ">1"

_PUNCT = re.compile(f"[{re.escape(string.punctuation)}]")


def belief_average(beliefs: Sequence[int]) -> float:
    return float(np.mean(check_beliefs(beliefs)))


def belief_variance(beliefs: Sequence[int]) -> float:
    """Population variance (divides by N, not N - 1)."""
    return float(np.var(check_beliefs(beliefs)))


def _series(counts, label: str) -> np.ndarray:
    if isinstance(counts, dict):
        return np.asarray(counts[label])
    return np.array([c[label] if isinstance(c, dict) else getattr(c, label) for c in counts])


def _horizon(counts) -> int:
    T = len(_series(counts, "I")) - 1
    if T < 1:
        raise ValueError("need counts for day 0 and at least one simulated day")
    return T


def infection_rate(counts) -> float:
    """Final infected count per simulated day, ``I(T) / T``."""
    return float(_series(counts, "I")[-1]) / _horizon(counts)


def recovery_rate(counts) -> float:
    return float(_series(counts, "R")[-1]) / _horizon(counts)


def peak_metrics(counts, population: int) -> tuple[float, float]:
    """``(max I / N, first day of the max / T)`` over days 1..T."""
    T = _horizon(counts)
    I = _series(counts, "I")[1:]
    k = int(np.argmax(I))  # earliest on ties
    return float(I[k]) / population, (k + 1) / T


def half_time_norm(counts, population: int) -> float:
    """First day with ``I >= N/2`` divided by T; ``inf`` when never reached.

    Day 0 counts, so a population that starts half infected gives 0.
    """
    T = _horizon(counts)
    I = _series(counts, "I")
    hits = np.flatnonzero(I >= population / 2)
    return float(hits[0]) / T if hits.size else math.inf


def tokenize(text: str) -> list[str]:
    return _PUNCT.sub(" ", text.lower()).split()


def distinct_n(texts: Iterable[str], n: int) -> float:
    """Unique n-grams over total n-grams; n-grams never span two texts."""
    if n < 1:
        raise ValueError("n must be >= 1")
    seen: set[tuple[str, ...]] = set()
    total = 0
    for text in texts:
        toks = tokenize(text)
        grams = [tuple(toks[i : i + n]) for i in range(len(toks) - n + 1)]
        total += len(grams)
        seen.update(grams)
    return len(seen) / total if total else 0.0


@dataclass(frozen=True)
class MetricsReport:
    belief_average: float
    belief_variance: float
    infection_rate: float
    recovery_rate: float
    peak_fraction: float
    peak_time_norm: float
    half_time_norm: float
    distinct_1: float
    distinct_2: float

    def as_record(self) -> dict:
        rec = asdict(self)
        if math.isinf(self.half_time_norm):
            rec["half_time_norm"] = HALF_NEVER
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "MetricsReport":
        values = dict(rec)
        if values.get("half_time_norm") == HALF_NEVER:
            values["half_time_norm"] = math.inf
        return cls(**{k: float(values[k]) for k in cls.__dataclass_fields__})


def metrics_from_parts(counts, final_beliefs: Sequence[int], tweets: Iterable[str]) -> MetricsReport:
    beliefs = check_beliefs(final_beliefs)
    N = len(beliefs)
    S, I, R = (_series(counts, k) for k in ("S", "I", "R"))
    if np.any(S + I + R != N):
        raise ValueError(f"counts do not sum to the population size {N}")
    if I[-1] != beliefs.sum():
        raise ValueError(f"final infected count {I[-1]} disagrees with {beliefs.sum()} believers")
    tweets = list(tweets)
    peak_fraction, peak_time = peak_metrics(counts, N)
    return MetricsReport(
        belief_average=belief_average(beliefs),
        belief_variance=belief_variance(beliefs),
        infection_rate=infection_rate(counts),
        recovery_rate=recovery_rate(counts),
        peak_fraction=peak_fraction,
        peak_time_norm=peak_time,
        half_time_norm=half_time_norm(counts, N),
        distinct_1=distinct_n(tweets, 1),
        distinct_2=distinct_n(tweets, 2),
    )


def compute_metrics(trace) -> MetricsReport:
    """Metrics of a finished simulation trace (tweets from days 1..T)."""
    return metrics_from_parts(trace.counts, trace.final_beliefs, trace.tweets(first_day=1))
