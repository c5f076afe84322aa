"""Map ballot-card interpretations to bounded assorter values.

A plurality contest is audited one (reported winner, reported loser) pair at
a time: a card with a valid vote for the winner scores 1, for the loser 0,
and anything else (other candidate, invalid, contest absent) scores 1/2, so
the winner really beat the loser exactly when the population mean exceeds 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import EmptyContest


class Vote(str, Enum):
    WINNER = "winner"
    LOSER = "loser"
    OTHER = "other"
    INVALID = "invalid"


@dataclass(frozen=True)
class CardInterpretation:
    """How a human read one ballot card relative to a (winner, loser) pair."""

    contest_present: bool
    vote: Vote


@dataclass(frozen=True)
class ReportedTallies:
    """Reported vote counts for one (winner, loser) pair.

    N_w and N_l are the votes reported for the pair; N_c counts every other
    card (other candidates, invalid, no vote); N = N_w + N_l + N_c.
    """

    N_w: int
    N_l: int
    N_c: int

    def __post_init__(self) -> None:
        if min(self.N_w, self.N_l, self.N_c) < 0:
            raise ValueError("tallies must be nonnegative")

    @property
    def N(self) -> int:
        return self.N_w + self.N_l + self.N_c


def plurality_assort(card: CardInterpretation) -> float:
    """Assorter value of one card: winner 1, loser 0, everything else 1/2."""
    if not card.contest_present:
        return 0.5
    if card.vote is Vote.WINNER:
        return 1.0
    if card.vote is Vote.LOSER:
        return 0.0
    return 0.5


def polling_eta0(t: ReportedTallies) -> float:
    """Assorter mean implied by the reported tallies: (N_w + N_c/2)/N."""
    if t.N == 0:
        raise EmptyContest("no ballot cards reported")
    return (t.N_w + t.N_c / 2.0) / t.N


def theta_prime(theta: float, b: float) -> float:
    """Population assorter mean after diluting with a fraction b of blanks."""
    return theta * (1.0 - b) + b / 2.0
