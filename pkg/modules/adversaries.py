"""
Adversaries Module
Budget-constrained corruption strategies. Each one decides whether it is
willing to corrupt from the history alone, and only then sees the price
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import (
    LOG_FORMAT, LOG_DATE_FORMAT, DEFAULT_FLIP_PROBABILITY,
    DEFAULT_LEAF_TRAP_OFFSET, DEFAULT_MIMIC_LOW, DEFAULT_MIMIC_HIGH
)
from modules.core import (
    AdversaryKind, ConfigError, DyadicPrice, EpisodeConfig, Feedback,
    RoundRecord, Valuation, SALE, NO_SALE, left_check_passes, parse_enum, parse_real,
    right_check_passes
)
from modules.environment import AdversaryIntent
from modules.tree import (
    NodeRef, TreeParams, ROOT, endpoints, is_ancestor, leaf_at, leaf_of, left_child,
    midpoint, parent, right_child
)

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)

WILLING = AdversaryIntent(True)
UNWILLING = AdversaryIntent(False)

# Accepted parameters per kind
PARAMETERS = {
    AdversaryKind.NO_CORRUPTION: (),
    AdversaryKind.MIMIC_LOW_INSTANCE: ('v_low', 'burn'),
    AdversaryKind.LEAF_TRAP: ('offset',),
    AdversaryKind.COMMIT_STALL: (),
    AdversaryKind.RANDOM_BUDGET: ('flip_probability',),
}


@dataclass(frozen=True)
class AdversarySpec:
    """Adversary kind plus kind-specific parameters, validated at construction"""

    kind: AdversaryKind
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        kind = parse_enum(AdversaryKind, self.kind, 'adversary')
        object.__setattr__(self, 'kind', kind)

        unknown = set(self.params) - set(PARAMETERS[kind])
        if unknown:
            raise ConfigError(f"Adversary {kind.value} does not take parameters {sorted(unknown)}")

        params = dict(self.params)
        if 'v_low' in params:
            params['v_low'] = Valuation(parse_real(params['v_low'])).value
        if 'burn' in params:
            params['burn'] = _non_negative_int(params['burn'], 'burn')
        if 'offset' in params:
            offset = int(parse_real(params['offset']))
            if offset == 0:
                raise ConfigError("leaf-trap offset must be non-zero (the trap must be a wrong leaf)")
            params['offset'] = offset
        if 'flip_probability' in params:
            probability = parse_real(params['flip_probability'])
            if not 0.0 <= probability <= 1.0:
                raise ConfigError(f"flip_probability must lie in [0, 1], got {probability}")
            params['flip_probability'] = probability
        object.__setattr__(self, 'params', params)

    @classmethod
    def parse(cls, text: str) -> 'AdversarySpec':
        """
        Parse 'kind[:key=value;key=value]'

        Example: 'mimic-low-instance:v_low=1/3;burn=4'
        """
        kind, _, rest = text.strip().partition(':')
        params = {}
        for item in filter(None, (part.strip() for part in rest.split(';'))):
            key, sep, value = item.partition('=')
            if not sep:
                raise ConfigError(f"Malformed adversary parameter '{item}' in '{text}'")
            params[key.strip()] = value.strip()
        return cls(kind=kind, params=params)

    def to_text(self) -> str:
        if not self.params:
            return self.kind.value
        body = ';'.join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind.value}:{body}"

    def as_config_params(self):
        return tuple(sorted(self.params.items()))


def _non_negative_int(value: Any, name: str) -> int:
    number = parse_real(value)
    if number < 0 or int(number) != number:
        raise ConfigError(f"{name} must be a non-negative integer, got {value}")
    return int(number)


# ==================== STRATEGIES ====================

class BaseAdversary:
    """Never willing; reports the truth"""

    kind = AdversaryKind.NO_CORRUPTION

    def intent(self, history: Sequence[RoundRecord]) -> AdversaryIntent:
        return UNWILLING

    def corrupt(self, price: DyadicPrice, truth: Feedback,
                history: Sequence[RoundRecord]) -> Feedback:
        return truth

    def __repr__(self):
        return f"{type(self).__name__}()"


class NoCorruption(BaseAdversary):
    pass


class MimicLowInstance(BaseAdversary):
    """Makes the first `burn` rounds look like an instance with valuation v_low"""

    kind = AdversaryKind.MIMIC_LOW_INSTANCE

    def __init__(self, v_low: Valuation, burn: int):
        self.v_low = v_low
        self.burn = burn

    def intent(self, history):
        return WILLING if len(history) < self.burn else UNWILLING

    def corrupt(self, price, truth, history):
        return Feedback.of(price.value <= self.v_low.value)

    def __repr__(self):
        return f"MimicLowInstance(v_low={self.v_low.value}, burn={self.burn})"


class SearchPhase(str, Enum):
    CHECK_LEFT = 'check-left'
    CHECK_RIGHT = 'check-right'
    MIDPOINT = 'midpoint'
    LEAF_SECOND = 'leaf-second'


class SearchTracker:
    """
    Follows the seller's backtracking search from posted prices and observed feedback

    A search step posts L, R and then M when the check passed. A leaf block
    posts L and then R or L again; a block that fails at L may stop after one
    round, which shows up as the next price not belonging to the leaf.
    Reports the phase and node of the upcoming round.
    """

    def __init__(self, depth: int):
        self.depth = depth
        self._reset()

    def _reset(self):
        self.phase = SearchPhase.CHECK_LEFT
        self.node = ROOT
        self.left_passed = True
        self._seen = 0
        self._last: Optional[RoundRecord] = None

    def follow(self, history: Sequence[RoundRecord]) -> Tuple[SearchPhase, NodeRef]:
        # a shorter or different history is a replay from the start
        if len(history) < self._seen or (self._seen and history[self._seen - 1] != self._last):
            self._reset()
        for t in range(self._seen, len(history)):
            self._advance(history[t])
        self._seen = len(history)
        self._last = history[-1] if history else None
        return self.phase, self.node

    def _backtrack(self):
        if self.node.depth > 0:
            self.node = parent(self.node)
        self.phase = SearchPhase.CHECK_LEFT

    def _close_block(self, passed: bool):
        if passed:
            self.phase = SearchPhase.CHECK_LEFT
        else:
            self._backtrack()

    def _advance(self, record: RoundRecord):
        price, sale = record.price, record.observed_feedback.sale
        left, right = endpoints(self.node)

        if self.phase == SearchPhase.LEAF_SECOND:
            if price == right:
                self._close_block(self.left_passed and right_check_passes(price, sale))
                return
            if price == left and self.left_passed:
                self._close_block(left_check_passes(price, sale))
                return
            # one-round block failed at L; this round opens the parent's check
            self._backtrack()
            left, right = endpoints(self.node)

        if self.phase == SearchPhase.CHECK_LEFT:
            self.left_passed = left_check_passes(price, sale)
            self.phase = SearchPhase.LEAF_SECOND if self.node.depth == self.depth else SearchPhase.CHECK_RIGHT
        elif self.phase == SearchPhase.CHECK_RIGHT:
            if self.left_passed and right_check_passes(price, sale):
                self.phase = SearchPhase.MIDPOINT
            else:
                self._backtrack()
        else:
            self.node = right_child(self.node) if sale else left_child(self.node)
            self.phase = SearchPhase.CHECK_LEFT


class LeafTrap(BaseAdversary):
    """
    Steers the search onto a wrong leaf and keeps its checks passing

    Willing only while the tracked search sits on the target or one of its
    ancestors. There it answers midpoints toward the target and makes every
    endpoint check pass, so the wrong leaf looks correct until budget runs out.
    """

    kind = AdversaryKind.LEAF_TRAP

    def __init__(self, target_leaf: NodeRef):
        self.target_leaf = target_leaf
        self.tracker = SearchTracker(target_leaf.depth)

    def intent(self, history):
        _, node = self.tracker.follow(history)
        return WILLING if is_ancestor(node, self.target_leaf) else UNWILLING

    def corrupt(self, price, truth, history):
        phase, node = self.tracker.follow(history)
        if not is_ancestor(node, self.target_leaf):
            return truth
        left, right = endpoints(node)
        if phase == SearchPhase.MIDPOINT:
            if price != midpoint(node):
                return truth
            return Feedback.of(is_ancestor(right_child(node), self.target_leaf))
        if price == left:
            return SALE
        if price == right:
            return NO_SALE
        return truth

    def __repr__(self):
        return f"LeafTrap(target={self.target_leaf})"



class CommitStall(BaseAdversary):
    """Knocks the seller off the correct leaf by denying the sale at its left endpoint"""

    kind = AdversaryKind.COMMIT_STALL

    def __init__(self, star_leaf: NodeRef):
        self.star_leaf = star_leaf
        self.left, self.right = endpoints(star_leaf)

    def intent(self, history):
        if len(history) < 2:
            return UNWILLING
        last, previous = history[-1], history[-2]

        if last.price == self.left:
            # Arrived through the parent's midpoint, or mid-block on the leaf
            if last.observed_feedback.sale and previous.price in (self.left, self.right):
                return WILLING
            return UNWILLING

        if last.price == self.right and not last.observed_feedback.sale:
            # A passed block on the leaf, or arrival through the parent's midpoint from above
            if previous.price == self.left and previous.observed_feedback.sale:
                return WILLING
            if previous.price > self.right:
                return WILLING
        return UNWILLING

    def corrupt(self, price, truth, history):
        if price == self.left:
            return NO_SALE
        return truth

    def __repr__(self):
        return f"CommitStall(star={self.star_leaf})"


class RandomBudget(BaseAdversary):
    """Willing each round with a fixed probability; flips the truth while budget lasts"""

    kind = AdversaryKind.RANDOM_BUDGET

    def __init__(self, flip_probability: float, horizon: int, rng: np.random.Generator):
        self.flip_probability = flip_probability
        # one pre-drawn uniform per round keeps the willing bit a function of the round index
        self._draws = rng.random(horizon)

    def intent(self, history):
        t = len(history)
        if t < len(self._draws) and self._draws[t] < self.flip_probability:
            return WILLING
        return UNWILLING

    def corrupt(self, price, truth, history):
        return truth.flipped()

    def __repr__(self):
        return f"RandomBudget(p={self.flip_probability})"


# ==================== CONSTRUCTORS ====================

def no_corruption() -> NoCorruption:
    return NoCorruption()


def mimic_low_instance(v_low: Valuation, burn: int) -> MimicLowInstance:
    return MimicLowInstance(v_low, burn)


def leaf_trap(target_leaf: NodeRef) -> LeafTrap:
    return LeafTrap(target_leaf)


def commit_stall(star_leaf: NodeRef) -> CommitStall:
    return CommitStall(star_leaf)


def random_budget(flip_probability: float, horizon: int,
                  rng: Optional[np.random.Generator] = None) -> RandomBudget:
    return RandomBudget(flip_probability, horizon, rng if rng is not None else np.random.default_rng(0))


def trap_target(star: NodeRef, params: TreeParams, offset: int) -> NodeRef:
    """Wrong leaf `offset` positions from the correct one, reflected at the tree edge"""
    index = star.index + offset
    if not 0 <= index < params.leaf_count:
        index = star.index - offset
    index = min(max(index, 0), params.leaf_count - 1)
    if index == star.index:
        raise ConfigError(f"No wrong leaf at offset {offset} from {star}")
    return leaf_at(index, params)


def build_adversary(config: EpisodeConfig, rng: np.random.Generator) -> BaseAdversary:
    """
    Construct the adversary named by an episode config

    Args:
        config: Episode configuration carrying the adversary kind and parameters
        rng: The adversary's own random stream

    Returns:
        A fresh adversary instance for this episode only
    """
    kind = config.adversary_id
    spec = AdversarySpec(kind, dict(config.adversary_params))
    params = TreeParams.from_horizon(config.horizon)
    star = leaf_of(config.valuation, params)

    if kind == AdversaryKind.NO_CORRUPTION:
        return no_corruption()

    if kind == AdversaryKind.MIMIC_LOW_INSTANCE:
        default_low = DEFAULT_MIMIC_LOW if config.valuation.value >= 0.5 else DEFAULT_MIMIC_HIGH
        v_low = Valuation(parse_real(spec.params.get('v_low', default_low)))
        burn = spec.params.get('burn', config.corruption_budget)
        if burn > config.corruption_budget:
            raise ConfigError(f"Mimic burn {burn} exceeds the corruption budget {config.corruption_budget}")
        return mimic_low_instance(v_low, burn)

    if kind == AdversaryKind.LEAF_TRAP:
        offset = spec.params.get('offset', DEFAULT_LEAF_TRAP_OFFSET)
        return leaf_trap(trap_target(star, params, offset))

    if kind == AdversaryKind.COMMIT_STALL:
        return commit_stall(star)

    probability = spec.params.get('flip_probability', DEFAULT_FLIP_PROBABILITY)
    return random_budget(probability, config.horizon, rng)
