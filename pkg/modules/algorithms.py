"""
Algorithms Module
Seller-side pricing algorithms: the backtracking search with pluggable
commitment, the two commitment strategies, the lie-tolerant query budget
and the non-robust baselines
"""

import math
import logging
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import LOG_FORMAT, LOG_DATE_FORMAT
from modules.core import (
    AlgorithmId, CheckResult, EpisodeConfig, EpisodeExhausted,
    EpisodeResult, StepKind, StepOutcome, VerificationError,
    left_check_passes, right_check_passes
)
from modules.environment import Adversary, PricingEnvironment, episode_regret
from modules.tree import (
    NodeRef, TreeParams, ROOT, endpoints, midpoint, left_child, right_child, parent
)
from modules.adversaries import build_adversary
from modules.instrumentation import Ledger, final_report

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)

CommitStrategy = Callable[['SearchState', PricingEnvironment], StepOutcome]


@dataclass
class SearchState:
    """Root-to-current path plus the per-leaf pass counters s_l"""

    params: TreeParams
    path: List[NodeRef] = field(default_factory=lambda: [ROOT])
    leaf_counters: Dict[NodeRef, int] = field(default_factory=dict)

    @property
    def current(self) -> NodeRef:
        return self.path[-1]

    @property
    def at_leaf(self) -> bool:
        return self.params.is_leaf(self.current)

    def counter(self, leaf: NodeRef) -> int:
        return self.leaf_counters.get(leaf, 0)

    def bump(self, leaf: NodeRef) -> int:
        self.leaf_counters[leaf] = self.counter(leaf) + 1
        return self.leaf_counters[leaf]

    def push(self, node: NodeRef):
        if node.depth != self.current.depth + 1 or parent(node) != self.current:
            raise VerificationError('path_contiguity', f"{node} is not a child of {self.current}")
        self.path.append(node)

    def backtrack(self) -> NodeRef:
        if len(self.path) == 1:
            raise VerificationError('root_backtrack', "Search tried to leave the root")
        self.path.pop()
        return self.current


# ==================== CHECKS ====================

def safety_check(node: NodeRef, env: PricingEnvironment) -> CheckResult:
    """
    Post both endpoints of a node and test that v* can still lie inside

    Args:
        node: Interval [L, R) under test
        env: Environment to post the two prices into

    Returns:
        FAIL iff the observed feedback says no sale at L (L > 0) or sale at R (R < 1)
    """
    left, right = endpoints(node)
    sigma_left = env.post_price(left)
    sigma_right = env.post_price(right)
    if left_check_passes(left, sigma_left.sale) and right_check_passes(right, sigma_right.sale):
        return CheckResult.PASS
    return CheckResult.FAIL


# ==================== COMMITMENT ====================

def commit_known_step(state: SearchState, env: PricingEnvironment, C: int) -> StepOutcome:
    """
    One block at a leaf when the corruption budget C is known

    Up to C + 1 passes the block repeats the safety check; after that the
    leaf is trusted and only its left endpoint is posted.
    """
    leaf = state.current
    left, right = endpoints(leaf)

    if state.counter(leaf) <= C:
        result = safety_check(leaf, env)
        if result == CheckResult.FAIL:
            return StepOutcome(StepKind.COMMIT_FAIL, 2)
        state.bump(leaf)
        return StepOutcome(StepKind.COMMIT_CONTINUE, 2)

    env.post_price(left)
    return StepOutcome(StepKind.COMMIT_CONTINUE, 1)


def exploration_probability(s: int, delta: float, horizon: int) -> float:
    """q = min(4 ln(T / delta) / s, 1)"""
    return min(4.0 * math.log(horizon / delta) / s, 1.0)


def commit_unknown_step(state: SearchState, env: PricingEnvironment, delta: float,
                        T: int, rng: np.random.Generator) -> StepOutcome:
    """
    One two-round block at a leaf when the corruption budget is unknown

    Round one posts L. Round two probes R with a probability decaying in the
    leaf's pass counter and re-posts L otherwise.
    """
    leaf = state.current
    left, right = endpoints(leaf)

    sigma = env.post_price(left)
    if not left_check_passes(left, sigma.sale):
        return StepOutcome(StepKind.COMMIT_FAIL, 1)

    s = state.bump(leaf)
    explore = rng.random() < exploration_probability(s, delta, T)

    if explore:
        sigma = env.post_price(right)
        passed = right_check_passes(right, sigma.sale)
    else:
        sigma = env.post_price(left)
        passed = left_check_passes(left, sigma.sale)

    if not passed:
        return StepOutcome(StepKind.COMMIT_FAIL, 2)
    return StepOutcome(StepKind.COMMIT_CONTINUE, 2)


def make_commit_strategy(config: EpisodeConfig, rng: np.random.Generator) -> CommitStrategy:
    """Bind the configured commitment strategy to its parameters"""
    if config.algorithm_id == AlgorithmId.COMMIT_KNOWN:
        return partial(commit_known_step, C=config.corruption_budget)
    if config.algorithm_id == AlgorithmId.COMMIT_UNKNOWN:
        return partial(commit_unknown_step, delta=config.delta, T=config.horizon, rng=rng)
    raise ValueError(f"{config.algorithm_id.value} has no commitment strategy")


# ==================== SEARCH ====================

def meta_step(state: SearchState, env: PricingEnvironment,
              commit_strategy: CommitStrategy) -> Tuple[StepOutcome, SearchState]:
    """
    Advance the backtracking search by one step

    Args:
        state: Search state, updated in place
        env: Environment of the running episode
        commit_strategy: Block routine used once the search sits on a leaf

    Returns:
        Tuple of (outcome, state). A step cut by the end of the horizon comes
        back as TRUNCATED with the state left where the step started.
    """
    start_round = env.current_round
    try:
        if state.at_leaf:
            outcome = commit_strategy(state, env)
            if outcome.kind == StepKind.COMMIT_FAIL:
                state.backtrack()
            return outcome, state

        node = state.current
        if safety_check(node, env) == CheckResult.FAIL:
            state.backtrack()
            return StepOutcome(StepKind.BACKTRACK, 2), state

        if env.post_price(midpoint(node)).sale:
            state.push(right_child(node, state.params))
            return StepOutcome(StepKind.DESCEND_RIGHT, 3), state
        state.push(left_child(node, state.params))
        return StepOutcome(StepKind.DESCEND_LEFT, 3), state

    except EpisodeExhausted:
        return StepOutcome(StepKind.TRUNCATED, env.current_round - start_round), state


# ==================== QUERY BUDGET ====================

def _budget_holds(q: int, n: int, C: int) -> bool:
    m = q - C
    return (1 << m) > n * sum(math.comb(m, i) for i in range(C + 1))


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length()


def rivest_query_budget(n: int, C: int) -> int:
    """
    Smallest Q with 2^(Q - C) > n * sum_{i <= C} binom(Q - C, i)

    The left side grows at least as fast as the right in Q, so the
    predicate is monotone and a bisection over [C, C + 16(ceil(log2 n) + C)]
    finds the least Q exactly.
    """
    if n < 2 or C < 0:
        raise ValueError(f"Need n >= 2 and C >= 0, got n={n}, C={C}")

    low = C
    high = C + 16 * (ceil_log2(n) + C)
    while not _budget_holds(high, n, C):
        high *= 2

    # invariant: predicate false at low, true at high
    while high - low > 1:
        mid = (low + high) // 2
        if _budget_holds(mid, n, C):
            high = mid
        else:
            low = mid
    return high


# ==================== BASELINES ====================

def majority_vote_searcher(T: int, C: int, env: PricingEnvironment) -> Optional[NodeRef]:
    """
    Binary search that repeats each midpoint query 2C + 1 times

    Descends right when more than C of the repetitions report a sale, then
    posts the leaf's left endpoint until the horizon ends.

    Returns:
        The leaf reached, or None when the horizon ran out mid-search
    """
    params = TreeParams.from_horizon(T)
    votes = 2 * C + 1
    node = ROOT
    try:
        while not params.is_leaf(node):
            price = midpoint(node)
            sales = sum(env.post_price(price).sale for _ in range(votes))
            node = right_child(node) if sales > C else left_child(node)

        left, _ = endpoints(node)
        while env.rounds_remaining > 0:
            env.post_price(left)
    except EpisodeExhausted:
        return None
    return node


def plain_binary_search(T: int, env: PricingEnvironment) -> Optional[NodeRef]:
    """D unchecked midpoint queries, then the left endpoint forever"""
    return majority_vote_searcher(T, 0, env)


# ==================== EPISODES ====================

def seeded_streams(seed: int) -> Tuple[np.random.Generator, np.random.Generator]:
    """Independent seller and adversary generators derived from one seed"""
    seller_seq, adversary_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(seller_seq), np.random.default_rng(adversary_seq)


def run_episode(config: EpisodeConfig, adversary: Optional[Adversary] = None) -> EpisodeResult:
    """
    Play one full T-round episode

    Args:
        config: Validated episode configuration
        adversary: Overrides the adversary named in the config

    Returns:
        EpisodeResult with the round history, regret and, for the commitment
        algorithms, the ledger, step trace and leaf counters
    """
    seller_rng, adversary_rng = seeded_streams(config.seed)
    if adversary is None:
        adversary = build_adversary(config, adversary_rng)
    env = PricingEnvironment(config, adversary)
    params = TreeParams.from_horizon(config.horizon)

    logger.debug(f"Episode T={config.horizon} v*={config.valuation.value} C={config.corruption_budget} "
                 f"{config.algorithm_id.value} vs {adversary!r}")

    if not config.algorithm_id.is_meta:
        if config.algorithm_id == AlgorithmId.MAJORITY_VOTE:
            leaf = majority_vote_searcher(config.horizon, config.corruption_budget, env)
        else:
            leaf = plain_binary_search(config.horizon, env)
        return EpisodeResult(
            config=config,
            rounds=list(env.history),
            total_regret=episode_regret(env.history, config.valuation, config.horizon),
            corruptions_used=env.corruptions_used,
            committed_leaf=leaf,
            intents=list(env.intents)
        )

    state = SearchState(params)
    ledger = Ledger(params, config.valuation, verify=config.verify)
    commit_strategy = make_commit_strategy(config, seller_rng)
    step_trace = [ledger.snapshot()] if config.record_steps else []

    while env.rounds_remaining > 0:
        before = state.current
        first = len(env.history)
        outcome, state = meta_step(state, env, commit_strategy)
        snapshot = ledger.record_step(before, state.current, outcome, env.history[first:])
        if config.record_steps:
            step_trace.append(snapshot)

    total_regret = episode_regret(env.history, config.valuation, config.horizon)
    final = ledger.close(final_report(ledger, config, total_regret, env.corruptions_used))
    if config.record_steps:
        step_trace[-1] = final

    return EpisodeResult(
        config=config,
        rounds=list(env.history),
        total_regret=total_regret,
        corruptions_used=env.corruptions_used,
        ledger=ledger,
        step_trace=step_trace,
        leaf_counters=dict(state.leaf_counters),
        committed_leaf=state.current if state.at_leaf else None,
        intents=list(env.intents)
    )
