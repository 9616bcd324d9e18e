"""
Core Module
Domain primitives shared by every other module: exact dyadic prices,
valuations, feedback bits, round records, episode configuration and results
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import total_ordering
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import LOG_FORMAT, LOG_DATE_FORMAT, MAX_PRICE_LEVEL, DEFAULT_DELTA

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)


# ==================== ERRORS ====================

class PricingLabError(Exception):
    """Base class for every error raised by the lab"""


class ConfigError(PricingLabError, ValueError):
    """Invalid configuration, rejected before any round is played"""


class EpisodeExhausted(PricingLabError):
    """A price was posted after the last round of the horizon"""


class TreeContractError(PricingLabError, ValueError):
    """Navigation outside the interval tree (child of a leaf, parent of the root)"""


class VerificationError(PricingLabError, AssertionError):
    """A per-step analysis identity did not hold"""

    def __init__(self, check: str, message: str, step_index: Optional[int] = None):
        self.check = check
        self.step_index = step_index
        prefix = f"[{check}]" if step_index is None else f"[{check} @ step {step_index}]"
        super().__init__(f"{prefix} {message}")


# ==================== IDENTIFIERS ====================

class AlgorithmId(str, Enum):
    COMMIT_KNOWN = 'commit-known'
    COMMIT_UNKNOWN = 'commit-unknown'
    MAJORITY_VOTE = 'majority-vote'
    PLAIN_BSEARCH = 'plain-bsearch'

    @property
    def is_meta(self) -> bool:
        return self in (AlgorithmId.COMMIT_KNOWN, AlgorithmId.COMMIT_UNKNOWN)


class AdversaryKind(str, Enum):
    NO_CORRUPTION = 'no-corruption'
    MIMIC_LOW_INSTANCE = 'mimic-low-instance'
    LEAF_TRAP = 'leaf-trap'
    COMMIT_STALL = 'commit-stall'
    RANDOM_BUDGET = 'random-budget'


class CheckResult(str, Enum):
    PASS = 'pass'
    FAIL = 'fail'


class StepKind(str, Enum):
    DESCEND_LEFT = 'descend-left'
    DESCEND_RIGHT = 'descend-right'
    BACKTRACK = 'backtrack'
    COMMIT_CONTINUE = 'commit-continue'
    COMMIT_FAIL = 'commit-fail'
    # cut short by the end of the horizon
    TRUNCATED = 'truncated'


@dataclass(frozen=True)
class StepOutcome:
    """What one search step did and how many rounds it spent"""

    kind: StepKind
    rounds_consumed: int

    @property
    def is_fail(self) -> bool:
        return self.kind in (StepKind.BACKTRACK, StepKind.COMMIT_FAIL)


def parse_enum(enum_cls, value, what: str):
    """Coerce a string (or member) into an enum member, raising ConfigError"""
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(str(value).strip().lower())
    except ValueError:
        choices = ', '.join(member.value for member in enum_cls)
        raise ConfigError(f"Unknown {what} '{value}' (choices: {choices})") from None


def parse_real(text: Union[str, float, int, Fraction]) -> float:
    """Parse a decimal or a fraction such as '1/3' into a float"""
    if isinstance(text, (float, int)):
        return float(text)
    try:
        return float(Fraction(str(text).strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"Not a real number: '{text}'") from None


# ==================== PRICES AND FEEDBACK ====================

@total_ordering
@dataclass(frozen=True, eq=False)
class DyadicPrice:
    """Exact price numerator / 2^level on the dyadic grid of [0, 1]"""

    numerator: int
    level: int

    def __post_init__(self):
        if not 0 <= self.level <= MAX_PRICE_LEVEL:
            raise ConfigError(f"Price level {self.level} outside [0, {MAX_PRICE_LEVEL}]")
        if not 0 <= self.numerator <= (1 << self.level):
            raise ConfigError(f"Price {self.numerator}/2^{self.level} outside [0, 1]")

    def reduced(self) -> Tuple[int, int]:
        """Lowest-terms (numerator, level) pair"""
        if self.numerator == 0:
            return 0, 0
        trailing = (self.numerator & -self.numerator).bit_length() - 1
        shift = min(trailing, self.level)
        return self.numerator >> shift, self.level - shift

    @property
    def value(self) -> float:
        return math.ldexp(self.numerator, -self.level)

    @property
    def is_zero(self) -> bool:
        return self.numerator == 0

    @property
    def is_one(self) -> bool:
        return self.numerator == (1 << self.level)

    def _scaled(self, level: int) -> int:
        return self.numerator << (level - self.level)

    def __eq__(self, other):
        if not isinstance(other, DyadicPrice):
            return NotImplemented
        return self.reduced() == other.reduced()

    def __lt__(self, other):
        if not isinstance(other, DyadicPrice):
            return NotImplemented
        level = max(self.level, other.level)
        return self._scaled(level) < other._scaled(level)

    def __hash__(self):
        return hash(self.reduced())

    def __str__(self):
        numerator, level = self.reduced()
        return f"{numerator}/{1 << level}"


@dataclass(frozen=True)
class Valuation:
    """The buyers' common valuation v* in [0, 1)"""

    value: float

    def __post_init__(self):
        value = float(self.value)
        if not (0.0 <= value < 1.0):
            raise ConfigError(f"Valuation must lie in [0, 1), got {self.value}")
        object.__setattr__(self, 'value', value)


@dataclass(frozen=True)
class Feedback:
    """Binary sale / no-sale signal"""

    sale: bool

    @staticmethod
    def of(sale: bool) -> 'Feedback':
        return SALE if sale else NO_SALE

    def flipped(self) -> 'Feedback':
        return NO_SALE if self.sale else SALE


SALE = Feedback(True)
NO_SALE = Feedback(False)


def price_value(p: DyadicPrice) -> float:
    """Exact float value of a dyadic price"""
    return p.value


def true_feedback(p: DyadicPrice, v: Valuation) -> Feedback:
    """Truthful feedback: a sale happens iff the price does not exceed v*"""
    return Feedback.of(p.value <= v.value)


def left_check_passes(price: DyadicPrice, sale: bool) -> bool:
    # L = 0 passes by default
    return price.is_zero or sale


def right_check_passes(price: DyadicPrice, sale: bool) -> bool:
    # R = 1 passes by default
    return price.is_one or not sale


@dataclass(frozen=True)
class RoundRecord:
    """One round: posted price, truthful and observed feedback, realized revenue"""

    t: int
    price: DyadicPrice
    true_feedback: Feedback
    observed_feedback: Feedback
    corrupted: bool
    revenue: float

    def __post_init__(self):
        if self.corrupted != (self.true_feedback != self.observed_feedback):
            raise ConfigError(f"Round {self.t}: corrupted flag disagrees with feedback pair")

    def regret(self, v: Valuation) -> float:
        return v.value - self.revenue


# ==================== EPISODES ====================

@dataclass(frozen=True)
class EpisodeConfig:
    """Full specification of one T-round interaction"""

    horizon: int
    valuation: Valuation
    corruption_budget: int
    algorithm_id: AlgorithmId
    adversary_id: AdversaryKind
    seed: int
    delta: float = DEFAULT_DELTA
    adversary_params: Tuple[Tuple[str, float], ...] = ()
    verify: bool = True
    record_steps: bool = True

    def __post_init__(self):
        if not isinstance(self.valuation, Valuation):
            object.__setattr__(self, 'valuation', Valuation(parse_real(self.valuation)))
        object.__setattr__(self, 'algorithm_id', parse_enum(AlgorithmId, self.algorithm_id, 'algorithm'))
        object.__setattr__(self, 'adversary_id', parse_enum(AdversaryKind, self.adversary_id, 'adversary'))
        if isinstance(self.adversary_params, dict):
            object.__setattr__(self, 'adversary_params', tuple(sorted(self.adversary_params.items())))

        if int(self.horizon) != self.horizon or self.horizon < 2:
            raise ConfigError(f"Horizon must be an integer >= 2, got {self.horizon}")
        if self.horizon > (1 << MAX_PRICE_LEVEL):
            raise ConfigError(f"Horizon {self.horizon} exceeds 2^{MAX_PRICE_LEVEL}")
        if int(self.corruption_budget) != self.corruption_budget or self.corruption_budget < 0:
            raise ConfigError(f"Corruption budget must be a non-negative integer, got {self.corruption_budget}")
        if self.corruption_budget > self.horizon:
            raise ConfigError(f"Corruption budget {self.corruption_budget} exceeds horizon {self.horizon}")
        if not (0.0 < self.delta < 1.0):
            raise ConfigError(f"Delta must lie in (0, 1), got {self.delta}")
        if not 0 <= self.seed < (1 << 64):
            raise ConfigError(f"Seed must be a 64-bit unsigned integer, got {self.seed}")

    def adversary_param(self, name: str, default: Any = None) -> Any:
        return dict(self.adversary_params).get(name, default)

    def describe(self) -> Dict[str, Any]:
        """Flat dict of the config fields, used for result rows"""
        return {
            'horizon': self.horizon,
            'budget': self.corruption_budget,
            'valuation': self.valuation.value,
            'algorithm': self.algorithm_id.value,
            'adversary': self.adversary_id.value,
            'adversary_params': ';'.join(f"{k}={v}" for k, v in self.adversary_params),
            'delta': self.delta,
            'seed': self.seed,
        }


@dataclass
class EpisodeResult:
    """Full trace of one episode"""

    config: EpisodeConfig
    rounds: List[RoundRecord]
    total_regret: float
    corruptions_used: int
    ledger: Optional[Any] = None
    step_trace: List[Any] = field(default_factory=list)
    leaf_counters: Dict[Any, int] = field(default_factory=dict)
    committed_leaf: Optional[Any] = None
    intents: List[bool] = field(default_factory=list)
