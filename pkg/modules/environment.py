"""
Pricing Environment Module
Round-by-round interaction protocol: the seller posts a price, the buyer's
truthful response is computed, the adversary may corrupt it within budget,
and the round is recorded
"""

import math
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Protocol, Sequence, Tuple

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import LOG_FORMAT, LOG_DATE_FORMAT
from modules.core import (
    DyadicPrice, Feedback, RoundRecord, EpisodeConfig, Valuation,
    EpisodeExhausted, true_feedback
)

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AdversaryIntent:
    """Whether the adversary is willing to spend a corruption this round"""

    willing: bool


class Adversary(Protocol):
    """Two-phase corruption strategy.

    intent() is called before the round's price is known and may only look
    at the history; corrupt() is called after the price and the truthful
    feedback are revealed, and returns the feedback the seller observes.
    """

    def intent(self, history: Sequence[RoundRecord]) -> AdversaryIntent:
        ...

    def corrupt(self, price: DyadicPrice, truth: Feedback,
                history: Sequence[RoundRecord]) -> Feedback:
        ...


@dataclass(frozen=True)
class EnvState:
    """Read-only snapshot of an environment"""

    config: EpisodeConfig
    current_round: int
    budget_remaining: int
    history: Tuple[RoundRecord, ...]


class PricingEnvironment:
    """Live state of one episode: round counter, remaining budget, history"""

    def __init__(self, config: EpisodeConfig, adversary: Adversary):
        """
        Initialize the environment for one episode

        Args:
            config: Episode configuration (horizon, valuation, budget)
            adversary: Corruption strategy, used by this episode only
        """
        self.config = config
        self.adversary = adversary
        self.horizon = config.horizon
        self.valuation = config.valuation
        self.current_round = 1
        self.budget_remaining = config.corruption_budget
        self.history: List[RoundRecord] = []
        self.intents: List[bool] = []

    @property
    def rounds_remaining(self) -> int:
        return self.horizon - self.current_round + 1

    @property
    def corruptions_used(self) -> int:
        return self.config.corruption_budget - self.budget_remaining

    def post_price(self, price: DyadicPrice) -> Feedback:
        """
        Play one round at the given price

        Args:
            price: Price posted by the seller

        Returns:
            Feedback observed by the seller (possibly corrupted)

        Raises:
            EpisodeExhausted: all T rounds have already been played
        """
        if self.current_round > self.horizon:
            raise EpisodeExhausted(f"Round {self.current_round} is past the horizon {self.horizon}")

        # Intent is fixed before the adversary sees the price
        intent = self.adversary.intent(self.history)
        truth = true_feedback(price, self.valuation)

        observed = truth
        if intent.willing and self.budget_remaining > 0:
            observed = self.adversary.corrupt(price, truth, self.history)
        corrupted = observed != truth
        if corrupted:
            self.budget_remaining -= 1

        record = RoundRecord(
            t=self.current_round,
            price=price,
            true_feedback=truth,
            observed_feedback=observed,
            corrupted=corrupted,
            revenue=price.value if truth.sale else 0.0
        )
        self.history.append(record)
        self.intents.append(intent.willing)
        self.current_round += 1
        return observed

    def snapshot(self) -> EnvState:
        return EnvState(
            config=self.config,
            current_round=self.current_round,
            budget_remaining=self.budget_remaining,
            history=tuple(self.history)
        )


def episode_regret(history: Sequence[RoundRecord], v: Valuation, horizon: int) -> float:
    """
    Regret T * v* - sum of revenues over a complete history

    Raises:
        ValueError: history does not hold exactly T rounds
    """
    if len(history) != horizon:
        raise ValueError(f"History holds {len(history)} rounds, expected {horizon}")
    # every term v* - r_t is non-negative, so the sum is too
    return math.fsum(v.value - record.revenue for record in history)


def replay_intents(adversary: Adversary, history: Sequence[RoundRecord]) -> List[bool]:
    """Re-derive each round's willing bit from the history prefix alone"""
    return [adversary.intent(history[:t]).willing for t in range(len(history))]
