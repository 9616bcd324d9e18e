"""
Oracle Module
Brute-force reference implementations for small instances: graph distance by
BFS over an explicit tree, the lie-tolerant query budget by linear scan, and
exhaustive enumeration of every corruption pattern within budget
"""

import math
import logging
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import LOG_FORMAT, LOG_DATE_FORMAT
from modules.core import (
    AlgorithmId, AdversaryKind, EpisodeConfig, Feedback, VerificationError
)
from modules.environment import AdversaryIntent, PricingEnvironment
from modules.algorithms import majority_vote_searcher, rivest_query_budget, run_episode

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)

ORACLE_MAX_DEPTH = 6
ORACLE_HORIZONS = [4, 8, 16]
ORACLE_BUDGETS = [0, 1, 2]
ORACLE_ALGORITHMS = [AlgorithmId.COMMIT_KNOWN, AlgorithmId.MAJORITY_VOTE]


# ==================== DISTANCE ====================

def _tree_graph(D: int) -> Dict[Tuple[int, int], List[Tuple[int, int]]]:
    graph = {}
    for depth in range(D + 1):
        for index in range(2 ** depth):
            neighbours = []
            if depth > 0:
                neighbours.append((depth - 1, index // 2))
            if depth < D:
                neighbours.extend([(depth + 1, 2 * index), (depth + 1, 2 * index + 1)])
            graph[(depth, index)] = neighbours
    return graph


def bfs_distance(a, b, D: int) -> int:
    """Shortest path length between two nodes, by BFS over the materialized depth-D tree"""
    if D > ORACLE_MAX_DEPTH:
        raise ValueError(f"Oracle trees stop at depth {ORACLE_MAX_DEPTH}, got {D}")
    graph = _tree_graph(D)
    start, goal = (a.depth, a.index), (b.depth, b.index)
    seen = {start: 0}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == goal:
            return seen[node]
        for neighbour in graph[node]:
            if neighbour not in seen:
                seen[neighbour] = seen[node] + 1
                queue.append(neighbour)
    raise ValueError(f"{b} is not in the depth-{D} tree")


# ==================== QUERY BUDGET ====================

def budget_scan(n: int, C: int) -> int:
    """Least Q with 2^(Q - C) > n * sum_{i <= C} binom(Q - C, i), scanning Q upward"""
    q = C
    while True:
        m = q - C
        if 2 ** m > n * sum(math.comb(m, i) for i in range(C + 1)):
            return q
        q += 1


def budget_cross_check(n_values: Iterable[int], budgets: Iterable[int]) -> List[Tuple[int, int, int, int]]:
    """
    Compare rivest_query_budget with the scan and with the explicit ceiling

    Returns:
        (n, C, computed, expected) for every disagreement or ceiling breach
    """
    mismatches = []
    budgets = list(budgets)
    for n in n_values:
        log_n = 0
        while 2 ** log_n < n:
            log_n += 1
        for C in budgets:
            computed = rivest_query_budget(n, C)
            expected = budget_scan(n, C)
            if computed != expected or computed > C + 16 * (log_n + C):
                mismatches.append((n, C, computed, expected))
    return mismatches


# ==================== ADVERSARY ENUMERATION ====================

class OverrideAdversary:
    """Flips exactly the listed rounds (1-based) and nothing else"""

    def __init__(self, flips: FrozenSet[int]):
        self.flips = flips

    def intent(self, history) -> AdversaryIntent:
        return AdversaryIntent(len(history) + 1 in self.flips)

    def corrupt(self, price, truth: Feedback, history) -> Feedback:
        return truth.flipped()


def flip_patterns(rounds: int, C: int) -> Iterable[FrozenSet[int]]:
    for size in range(C + 1):
        for chosen in combinations(range(1, rounds + 1), size):
            yield frozenset(chosen)


def _depth(T: int) -> int:
    depth = 0
    while 2 ** depth < T:
        depth += 1
    return depth


def _correct_leaf_index(T: int, valuation: float) -> int:
    D = _depth(T)
    v = Fraction(valuation)
    for index in range(2 ** D):
        if Fraction(index, 2 ** D) <= v < Fraction(index + 1, 2 ** D):
            return index
    raise ValueError(f"No leaf holds {valuation}")


def grid_valuations(T: int) -> List[float]:
    """Leaf left endpoints and leaf centres of the depth-D tree"""
    D = _depth(T)
    values = []
    for index in range(2 ** D):
        values.append(index / 2 ** D)
        values.append((index + 0.5) / 2 ** D)
    return values


@dataclass
class Counterexample:
    valuation: float
    flips: Tuple[int, ...]
    check: str
    detail: str


@dataclass
class OracleVerdict:
    horizon: int
    budget: int
    algorithm: AlgorithmId
    patterns_checked: int = 0
    counterexamples: List[Counterexample] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def _check_commit_known(T: int, C: int, valuation: float, flips: FrozenSet[int]) -> Optional[Tuple[str, str]]:
    config = EpisodeConfig(
        horizon=T, valuation=valuation, corruption_budget=C,
        algorithm_id=AlgorithmId.COMMIT_KNOWN, adversary_id=AdversaryKind.NO_CORRUPTION,
        seed=0, record_steps=False
    )
    try:
        result = run_episode(config, adversary=OverrideAdversary(flips))
    except VerificationError as e:
        return e.check, str(e)

    if result.corruptions_used > C or result.corruptions_used != len(flips):
        return 'budget', f"used {result.corruptions_used} corruptions for {len(flips)} flips"

    star = _correct_leaf_index(T, valuation)
    for leaf, count in result.leaf_counters.items():
        if count > C and leaf.index != star:
            return 'wrong_leaf_commitment', f"true commitment at leaf {leaf.index}, correct leaf is {star}"

    ledger = result.ledger
    if ledger.wrong_leaf_fails > _depth(T) + C + ledger.correct_leaf_fails:
        return 'fail_count', f"N_F={ledger.wrong_leaf_fails} N_T={ledger.correct_leaf_fails}"
    return None


def _check_majority_vote(T: int, C: int, valuation: float, flips: FrozenSet[int],
                         rounds: int) -> Optional[Tuple[str, str]]:
    config = EpisodeConfig(
        horizon=rounds, valuation=valuation, corruption_budget=C,
        algorithm_id=AlgorithmId.MAJORITY_VOTE, adversary_id=AdversaryKind.NO_CORRUPTION,
        seed=0, record_steps=False
    )
    env = PricingEnvironment(config, OverrideAdversary(flips))
    leaf = majority_vote_searcher(T, C, env)

    if env.corruptions_used > C:
        return 'budget', f"used {env.corruptions_used} corruptions"
    star = _correct_leaf_index(T, valuation)
    if leaf is None or leaf.index != star:
        found = None if leaf is None else leaf.index
        return 'wrong_leaf_returned', f"returned leaf {found}, correct leaf is {star}"
    return None


def exhaustive_adversary_check(T: int, C: int, valuation: float,
                               algorithm: AlgorithmId) -> OracleVerdict:
    """
    Run the algorithm against every set of at most C flipped rounds

    Majority vote gets a horizon long enough to finish its search, so the
    returned leaf is always defined.

    Returns:
        OracleVerdict listing each failing pattern with the check it broke
    """
    verdict = OracleVerdict(horizon=T, budget=C, algorithm=algorithm)
    if algorithm == AlgorithmId.MAJORITY_VOTE:
        rounds = max(T, (2 * C + 1) * _depth(T) + 1)
    elif algorithm == AlgorithmId.COMMIT_KNOWN:
        rounds = T
    else:
        raise ValueError(f"Exhaustive checks cover deterministic algorithms only, got {algorithm.value}")

    for flips in flip_patterns(rounds, C):
        verdict.patterns_checked += 1
        if algorithm == AlgorithmId.COMMIT_KNOWN:
            failure = _check_commit_known(T, C, valuation, flips)
        else:
            failure = _check_majority_vote(T, C, valuation, flips, rounds)
        if failure is not None:
            check, detail = failure
            verdict.counterexamples.append(Counterexample(valuation, tuple(sorted(flips)), check, detail))
    return verdict


def run_oracle_suite(horizons: Iterable[int] = ORACLE_HORIZONS,
                     budgets: Iterable[int] = ORACLE_BUDGETS,
                     budget_range: Tuple[int, int] = (2 ** 12, 16)) -> bool:
    """
    Exhaustive adversary checks over every grid valuation plus the full
    query-budget cross-check

    Returns:
        True when no counterexample or mismatch was found
    """
    logger.info("=" * 60)
    logger.info("ORACLE SUITE")
    logger.info("=" * 60)

    ok = True
    budgets = list(budgets)
    for T in horizons:
        for C in budgets:
            for algorithm in ORACLE_ALGORITHMS:
                patterns = 0
                failures = []
                for valuation in grid_valuations(T):
                    verdict = exhaustive_adversary_check(T, C, valuation, algorithm)
                    patterns += verdict.patterns_checked
                    failures.extend(verdict.counterexamples)
                status = "OK" if not failures else f"{len(failures)} COUNTEREXAMPLES"
                logger.info(f"  T={T:<3} C={C} {algorithm.value:<14} {patterns:>7} patterns  {status}")
                for failure in failures[:5]:
                    logger.error(f"    v*={failure.valuation} flips={failure.flips} [{failure.check}] {failure.detail}")
                ok = ok and not failures

    n_max, c_max = budget_range
    logger.info(f"Query budget cross-check: n <= {n_max}, C <= {c_max}")
    mismatches = budget_cross_check(range(2, n_max + 1), range(c_max + 1))
    for n, C, computed, expected in mismatches[:10]:
        logger.error(f"  Q({n}, {C}) = {computed}, scan gives {expected}")
    logger.info(f"  {'OK' if not mismatches else f'{len(mismatches)} MISMATCHES'}")
    ok = ok and not mismatches

    logger.info("=" * 60)
    logger.info(f"ORACLE SUITE {'PASSED' if ok else 'FAILED'}")
    logger.info("=" * 60)
    return ok
