"""
Instrumentation Module
Ground-truth bookkeeping beside the search: potential, honest and corrupted
step counts, commitment failures, per-leaf tallies, and the regret bounds
evaluated at the end of an episode
"""

import math
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import LOG_FORMAT, LOG_DATE_FORMAT, BOUND_TOLERANCE
from modules.core import (
    AlgorithmId, EpisodeConfig, RoundRecord, StepKind, StepOutcome,
    Valuation, VerificationError
)
from modules.tree import NodeRef, TreeParams, endpoints, leaf_of, tree_distance

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)


class LeafClass(str, Enum):
    STAR = 'star'
    PLUS = 'plus'
    MINUS = 'minus'


def classify_leaf(leaf: NodeRef, v: Valuation) -> LeafClass:
    """PLUS if the leaf lies above v*, MINUS if below, STAR if it holds v*"""
    left, right = endpoints(leaf)
    if left.value > v.value:
        return LeafClass.PLUS
    if right.value <= v.value:
        return LeafClass.MINUS
    return LeafClass.STAR


@dataclass
class LeafTally:
    leaf_class: LeafClass
    blocks: int = 0
    corrupted_blocks: int = 0
    regret: float = 0.0


@dataclass(frozen=True)
class LedgerSnapshot:
    """Counters after a step. per_leaf is only filled on the final snapshot"""

    step_index: int
    potential: int
    honest_nonleaf_steps: int
    corrupted_nonleaf_steps: int
    correct_leaf_fails: int
    wrong_leaf_fails: int
    truncated_steps: int
    per_leaf: Optional[Dict[NodeRef, LeafTally]] = None


class Ledger:
    """Per-episode observer that sees v* and the corruption flags"""

    def __init__(self, params: TreeParams, valuation: Valuation, verify: bool = True):
        self.params = params
        self.valuation = valuation
        self.verify = verify
        self.star = leaf_of(valuation, params)

        self.step_index = 0
        self.potential = params.depth
        self.honest_nonleaf_steps = 0
        self.corrupted_nonleaf_steps = 0
        self.correct_leaf_fails = 0
        self.wrong_leaf_fails = 0
        self.truncated_steps = 0
        self.per_leaf: Dict[NodeRef, LeafTally] = {}
        self.report: Optional['BoundReport'] = None
        self.final: Optional[LedgerSnapshot] = None

    def _check(self, holds: bool, check: str, message: str):
        if self.verify and not holds:
            logger.error(f"Verification failed at step {self.step_index}: [{check}] {message}")
            raise VerificationError(check, message, step_index=self.step_index)

    def _tally(self, leaf: NodeRef) -> LeafTally:
        if leaf not in self.per_leaf:
            self.per_leaf[leaf] = LeafTally(classify_leaf(leaf, self.valuation))
        return self.per_leaf[leaf]

    def record_step(self, before: NodeRef, after: NodeRef, outcome: StepOutcome,
                    rounds: Sequence[RoundRecord]) -> LedgerSnapshot:
        """
        Account one search step and assert the potential identities

        Args:
            before: Node the step started at
            after: Node the search moved to
            outcome: What the step did
            rounds: Exactly the rounds the step consumed

        Returns:
            Snapshot of the counters after the step

        Raises:
            VerificationError: an identity failed while verify is on
        """
        self._check(len(rounds) == outcome.rounds_consumed, 'step_rounds',
                    f"{outcome.kind.value} reported {outcome.rounds_consumed} rounds, consumed {len(rounds)}")

        new_potential = tree_distance(after, self.star)
        change = new_potential - self.potential
        corrupted = any(record.corrupted for record in rounds)
        at_leaf = self.params.is_leaf(before)

        if at_leaf:
            tally = self._tally(before)
            # commit-round regret includes a block cut by the horizon
            tally.regret += math.fsum(self.valuation.value - record.revenue for record in rounds)

        if outcome.kind == StepKind.TRUNCATED:
            self.truncated_steps += 1
            self._check(change == 0, 'truncated_step_potential', f"truncated step moved from {before} to {after}")
        elif not at_leaf:
            self._check(len(rounds) <= 3, 'step_length', f"search step used {len(rounds)} rounds")
            if corrupted:
                self.corrupted_nonleaf_steps += 1
                self._check(abs(change) <= 1, 'corrupted_step_potential',
                            f"corrupted step at {before} changed potential by {change}")
            else:
                self.honest_nonleaf_steps += 1
                self._check(change == -1, 'honest_step_potential',
                            f"honest step at {before} changed potential by {change}")
        else:
            tally.blocks += 1
            if corrupted:
                tally.corrupted_blocks += 1
            if outcome.kind == StepKind.COMMIT_FAIL:
                if before == self.star:
                    self.correct_leaf_fails += 1
                    self._check(change == 1, 'commit_fail_potential',
                                f"failure at the correct leaf changed potential by {change}")
                else:
                    self.wrong_leaf_fails += 1
                    self._check(change == -1, 'commit_fail_potential',
                                f"failure at wrong leaf {before} changed potential by {change}")
            else:
                self._check(change == 0, 'commit_continue_potential',
                            f"continued block at {before} changed potential by {change}")

        self.potential = new_potential
        self.step_index += 1
        return self.snapshot()

    def snapshot(self, include_leaves: bool = False) -> LedgerSnapshot:
        per_leaf = None
        if include_leaves:
            per_leaf = {leaf: replace(tally) for leaf, tally in self.per_leaf.items()}
        return LedgerSnapshot(
            step_index=self.step_index,
            potential=self.potential,
            honest_nonleaf_steps=self.honest_nonleaf_steps,
            corrupted_nonleaf_steps=self.corrupted_nonleaf_steps,
            correct_leaf_fails=self.correct_leaf_fails,
            wrong_leaf_fails=self.wrong_leaf_fails,
            truncated_steps=self.truncated_steps,
            per_leaf=per_leaf
        )

    def close(self, report: 'BoundReport') -> LedgerSnapshot:
        """Attach the end-of-episode bound report and freeze the per-leaf tallies"""
        self.report = report
        self.final = self.snapshot(include_leaves=True)
        return self.final

    # ==================== AGGREGATES ====================

    def leaf_regret(self, leaf_class: Optional[LeafClass] = None) -> float:
        return math.fsum(
            tally.regret for tally in self.per_leaf.values()
            if leaf_class is None or tally.leaf_class == leaf_class
        )


# ==================== BOUNDS ====================

DETERMINISTIC = 'deterministic'
PROBABILISTIC = 'probabilistic'

# name -> (kind, algorithms it applies to), in report column order
BOUND_CATALOGUE = {
    'fail_count': (DETERMINISTIC, (AlgorithmId.COMMIT_KNOWN, AlgorithmId.COMMIT_UNKNOWN)),
    'regret_decomposition': (DETERMINISTIC, (AlgorithmId.COMMIT_KNOWN, AlgorithmId.COMMIT_UNKNOWN)),
    'correct_leaf_fails': (DETERMINISTIC, (AlgorithmId.COMMIT_KNOWN, AlgorithmId.COMMIT_UNKNOWN)),
    'corrupted_steps': (DETERMINISTIC, (AlgorithmId.COMMIT_KNOWN, AlgorithmId.COMMIT_UNKNOWN)),
    'known_leaf_regret': (DETERMINISTIC, (AlgorithmId.COMMIT_KNOWN,)),
    'known_regret': (DETERMINISTIC, (AlgorithmId.COMMIT_KNOWN,)),
    'above_leaf_regret': (DETERMINISTIC, (AlgorithmId.COMMIT_UNKNOWN,)),
    'correct_leaf_regret': (PROBABILISTIC, (AlgorithmId.COMMIT_UNKNOWN,)),
    'below_leaf_regret': (PROBABILISTIC, (AlgorithmId.COMMIT_UNKNOWN,)),
    'below_leaf_blocks': (PROBABILISTIC, (AlgorithmId.COMMIT_UNKNOWN,)),
    'unknown_regret': (PROBABILISTIC, (AlgorithmId.COMMIT_UNKNOWN,)),
}


@dataclass(frozen=True)
class BoundCheck:
    name: str
    kind: str
    lhs: float
    rhs: float

    @property
    def satisfied(self) -> bool:
        return self.lhs <= self.rhs + BOUND_TOLERANCE

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass
class BoundReport:
    checks: List[BoundCheck] = field(default_factory=list)

    def get(self, name: str) -> Optional[BoundCheck]:
        for check in self.checks:
            if check.name == name:
                return check
        return None

    @property
    def deterministic_violations(self) -> List[str]:
        return [c.name for c in self.checks if c.kind == DETERMINISTIC and not c.satisfied]

    @property
    def probabilistic_failures(self) -> List[str]:
        return [c.name for c in self.checks if c.kind == PROBABILISTIC and not c.satisfied]

    def as_row(self) -> Dict[str, Optional[float]]:
        """Flat '<name>_ok' / '<name>_slack' columns for every catalogued bound"""
        row = {}
        for name in BOUND_CATALOGUE:
            check = self.get(name)
            row[f"{name}_ok"] = None if check is None else int(check.satisfied)
            row[f"{name}_slack"] = None if check is None else check.slack
        return row


def leaf_block_limit(corrupted_blocks: int) -> int:
    """ceil(e * (C_l + 1)), the block count a below leaf is expected to stay under"""
    return math.ceil(math.e * (corrupted_blocks + 1))


def correct_leaf_allowance(horizon: int, delta: float) -> float:
    """1 + 20 ln T ln(T / delta)"""
    return 1.0 + 20.0 * math.log(horizon) * math.log(horizon / delta)


def known_regret_bound(horizon: int, C: int) -> float:
    """5D + 19C + 3"""
    return 5.0 * TreeParams.from_horizon(horizon).depth + 19.0 * C + 3.0


def unknown_regret_bound(horizon: int, C: int, delta: float) -> float:
    """1 + 20 ln T ln(T / delta) + 17D + 51C"""
    D = TreeParams.from_horizon(horizon).depth
    return correct_leaf_allowance(horizon, delta) + 17.0 * D + 51.0 * C


def final_report(ledger: Optional[Ledger], config: EpisodeConfig, total_regret: float,
                 corruptions_used: int) -> BoundReport:
    """
    Evaluate every bound that applies to the episode's algorithm

    log T is read as the tree depth D = ceil(log2 T). C is the configured
    budget. Baselines have no applicable bounds and get an empty report.
    """
    algorithm = config.algorithm_id
    if ledger is None or not algorithm.is_meta:
        return BoundReport()

    D = ledger.params.depth
    C = config.corruption_budget
    n_true = ledger.correct_leaf_fails
    n_false = ledger.wrong_leaf_fails
    commit_regret = ledger.leaf_regret()

    values = {
        'fail_count': (n_false, D + C + n_true),
        'regret_decomposition': (total_regret, commit_regret + 3 * D + 6 * C + 3 * n_true),
        'correct_leaf_fails': (n_true, corruptions_used),
        'corrupted_steps': (ledger.corrupted_nonleaf_steps, corruptions_used),
    }

    if algorithm == AlgorithmId.COMMIT_KNOWN:
        values['known_leaf_regret'] = (commit_regret, 2 * n_false + 6 * C + 3)
        values['known_regret'] = (total_regret, known_regret_bound(config.horizon, C))
    else:
        allowance = correct_leaf_allowance(config.horizon, config.delta)
        below = [t for t in ledger.per_leaf.values() if t.leaf_class == LeafClass.MINUS]
        worst_excess = max((t.blocks - leaf_block_limit(t.corrupted_blocks) for t in below), default=0)
        values['above_leaf_regret'] = (ledger.leaf_regret(LeafClass.PLUS), 2 * n_false + 2 * C)
        values['correct_leaf_regret'] = (ledger.leaf_regret(LeafClass.STAR), allowance)
        values['below_leaf_regret'] = (ledger.leaf_regret(LeafClass.MINUS), 12 * C + 12 * n_false)
        values['below_leaf_blocks'] = (worst_excess, 0)
        values['unknown_regret'] = (total_regret, unknown_regret_bound(config.horizon, C, config.delta))

    report = BoundReport([
        BoundCheck(name, BOUND_CATALOGUE[name][0], float(lhs), float(rhs))
        for name, (lhs, rhs) in values.items()
    ])
    for name in report.deterministic_violations:
        check = report.get(name)
        logger.warning(f"  Bound {name} violated: {check.lhs:.6g} > {check.rhs:.6g} "
                       f"(T={config.horizon}, C={C}, v*={config.valuation.value}, seed={config.seed})")
    return report
