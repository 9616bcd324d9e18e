"""
Experiments Module
Targeted experiments beside the sweep: the paired-instance lower bound, the
single-corruption fragility of plain binary search, and the cell grid for
the high-probability frequency check
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import (
    LOG_FORMAT, LOG_DATE_FORMAT, DEFAULT_SEED, DEFAULT_DELTA,
    STATISTICAL_HORIZONS, STATISTICAL_BUDGETS, STATISTICAL_TRIALS
)
from modules.core import AdversaryKind, AlgorithmId, EpisodeConfig, parse_real
from modules.adversaries import AdversarySpec
from modules.algorithms import run_episode
from modules.instrumentation import known_regret_bound
from modules.sweep import SweepSpec

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairedResult:
    budget: int
    horizon: int
    regret_low: float
    regret_high: float
    shared_prefix_rounds: int

    @property
    def lower_bound(self) -> float:
        return self.budget / 6.0

    @property
    def max_regret(self) -> float:
        return max(self.regret_low, self.regret_high)

    @property
    def holds(self) -> bool:
        return self.max_regret >= self.lower_bound


@dataclass(frozen=True)
class FragilityResult:
    horizon: int
    valuation: float
    plain_regret: float
    plain_leaf_index: Optional[int]
    commit_known_regret: float
    commit_known_bound: float

    @property
    def threshold(self) -> float:
        """Linear regret level the broken search has to reach: 0.05 T"""
        return 0.05 * self.horizon

    @property
    def plain_is_fragile(self) -> bool:
        return self.plain_regret >= self.threshold

    @property
    def commit_known_within_bound(self) -> bool:
        return self.commit_known_regret <= self.commit_known_bound


def _shared_prefix(first, second) -> int:
    shared = 0
    for a, b in zip(first, second):
        if a.price != b.price:
            break
        shared += 1
    return shared


def paired_mimic_experiment(budget: int, horizon: int, v_low='1/3', v_high='2/3',
                            seed: int = DEFAULT_SEED) -> PairedResult:
    """
    Run CommitKnown on a low instance with honest feedback and on a high
    instance whose first `budget` rounds are made to look like the low one

    Both runs post the same prices until the corruption stops, so their
    summed per-round regret over that prefix is at least 1/3 a round.
    """
    low = EpisodeConfig(
        horizon=horizon, valuation=parse_real(v_low), corruption_budget=budget,
        algorithm_id=AlgorithmId.COMMIT_KNOWN, adversary_id=AdversaryKind.NO_CORRUPTION,
        seed=seed, record_steps=False
    )
    mimic = AdversarySpec(AdversaryKind.MIMIC_LOW_INSTANCE, {'v_low': v_low, 'burn': budget})
    high = EpisodeConfig(
        horizon=horizon, valuation=parse_real(v_high), corruption_budget=budget,
        algorithm_id=AlgorithmId.COMMIT_KNOWN, adversary_id=AdversaryKind.MIMIC_LOW_INSTANCE,
        seed=seed, adversary_params=mimic.as_config_params(), record_steps=False
    )

    low_result = run_episode(low)
    high_result = run_episode(high)
    result = PairedResult(
        budget=budget,
        horizon=horizon,
        regret_low=low_result.total_regret,
        regret_high=high_result.total_regret,
        shared_prefix_rounds=_shared_prefix(low_result.rounds, high_result.rounds)
    )
    logger.info(f"  C={budget:<3} T={horizon}: R_low={result.regret_low:.3f} R_high={result.regret_high:.3f} "
                f"prefix={result.shared_prefix_rounds} C/6={result.lower_bound:.3f} "
                f"{'OK' if result.holds else 'BELOW'}")
    return result


def fragility_experiment(horizon: int = 2 ** 12, valuation: float = 0.7,
                         seed: int = DEFAULT_SEED) -> FragilityResult:
    """
    One corruption on the very first query, which pretends v* = 1/3,
    against plain binary search and against CommitKnown with C = 1
    """
    mimic = AdversarySpec(AdversaryKind.MIMIC_LOW_INSTANCE, {'v_low': '1/3', 'burn': 1})

    def config(algorithm: AlgorithmId) -> EpisodeConfig:
        return EpisodeConfig(
            horizon=horizon, valuation=valuation, corruption_budget=1,
            algorithm_id=algorithm, adversary_id=AdversaryKind.MIMIC_LOW_INSTANCE,
            seed=seed, adversary_params=mimic.as_config_params(), record_steps=False
        )

    plain = run_episode(config(AlgorithmId.PLAIN_BSEARCH))
    known = run_episode(config(AlgorithmId.COMMIT_KNOWN))
    result = FragilityResult(
        horizon=horizon,
        valuation=valuation,
        plain_regret=plain.total_regret,
        plain_leaf_index=None if plain.committed_leaf is None else plain.committed_leaf.index,
        commit_known_regret=known.total_regret,
        commit_known_bound=known_regret_bound(horizon, 1)
    )
    logger.info(f"  plain-bsearch: regret {result.plain_regret:.2f} (0.05T = {result.threshold:.2f})")
    logger.info(f"  commit-known:  regret {result.commit_known_regret:.2f} (bound {result.commit_known_bound:.2f})")
    return result


def statistical_cells(horizons: Iterable[int] = STATISTICAL_HORIZONS,
                      budgets: Iterable[int] = STATISTICAL_BUDGETS,
                      trials: int = STATISTICAL_TRIALS,
                      delta: float = DEFAULT_DELTA,
                      seed: int = DEFAULT_SEED) -> SweepSpec:
    """CommitUnknown against every adversary on the frequency-check grid"""
    return SweepSpec(
        horizons=list(horizons),
        budgets=list(budgets),
        algorithms=[AlgorithmId.COMMIT_UNKNOWN],
        adversaries=[AdversarySpec(kind) for kind in AdversaryKind],
        trials_per_cell=trials,
        base_seed=seed,
        delta=delta
    )
