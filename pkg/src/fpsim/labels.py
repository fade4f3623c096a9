"""Population labels under the re-infectable SIR rule."""

from __future__ import annotations

import enum
from typing import Sequence


class PopulationLabel(str, enum.Enum):
    SUSCEPTIBLE = "susceptible"
    INFECTED = "infected"
    RECOVERED = "recovered"


LEGAL_TRANSITIONS = frozenset(
    {
        (PopulationLabel.SUSCEPTIBLE, PopulationLabel.SUSCEPTIBLE),
        (PopulationLabel.SUSCEPTIBLE, PopulationLabel.INFECTED),
        (PopulationLabel.INFECTED, PopulationLabel.INFECTED),
        (PopulationLabel.INFECTED, PopulationLabel.RECOVERED),
        (PopulationLabel.RECOVERED, PopulationLabel.RECOVERED),
        (PopulationLabel.RECOVERED, PopulationLabel.INFECTED),
    }
)


def classify_state(belief_history: Sequence[int]) -> PopulationLabel:
    """Label from a chronological belief sequence, newest last.

    Infected if the newest belief is 1, recovered if some earlier entry was
    1, susceptible otherwise. Recovered agents can be infected again.
    """
    if len(belief_history) == 0:
        raise ValueError("belief history is empty")
    if belief_history[-1] == 1:
        return PopulationLabel.INFECTED
    if any(b == 1 for b in belief_history[:-1]):
        return PopulationLabel.RECOVERED
    return PopulationLabel.SUSCEPTIBLE
