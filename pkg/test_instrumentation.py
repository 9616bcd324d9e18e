"""
Instrumentation Test Suite
Tests the potential ledger, its per-step identities and the end-of-episode
bound report
"""

import math
import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from modules.core import (
    DyadicPrice, EpisodeConfig, RoundRecord, StepKind, StepOutcome, Valuation,
    VerificationError, true_feedback
)
from modules.tree import NodeRef, TreeParams, ROOT, endpoints, midpoint
from modules.algorithms import run_episode
from modules.instrumentation import (
    BOUND_CATALOGUE, BoundCheck, BoundReport, LeafClass, Ledger, classify_leaf,
    correct_leaf_allowance, final_report, known_regret_bound, leaf_block_limit,
    unknown_regret_bound
)


def honest(t: int, price: DyadicPrice, v: float) -> RoundRecord:
    truth = true_feedback(price, Valuation(v))
    return RoundRecord(t, price, truth, truth, False, price.value if truth.sale else 0.0)


def root_step_rounds(v: float):
    left, right = endpoints(ROOT)
    return [honest(1, left, v), honest(2, right, v), honest(3, midpoint(ROOT), v)]


def make_config(**overrides) -> EpisodeConfig:
    values = dict(horizon=1024, valuation=0.7, corruption_budget=0,
                  algorithm_id='commit-known', adversary_id='no-corruption', seed=2)
    values.update(overrides)
    return EpisodeConfig(**values)


# ==================== LEDGER ====================

def test_initial_potential_is_depth():
    print("[TEST] Initial snapshot")
    ledger = Ledger(TreeParams(3), Valuation(0.7))
    snapshot = ledger.snapshot()
    assert snapshot.potential == 3
    assert snapshot.step_index == 0
    assert ledger.star == NodeRef(3, 5)


def test_honest_step_lowers_potential():
    ledger = Ledger(TreeParams(3), Valuation(0.7))
    snapshot = ledger.record_step(ROOT, NodeRef(1, 1), StepOutcome(StepKind.DESCEND_RIGHT, 3),
                                  root_step_rounds(0.7))
    assert snapshot.potential == 2
    assert snapshot.honest_nonleaf_steps == 1
    assert snapshot.corrupted_nonleaf_steps == 0


def test_honest_step_in_the_wrong_direction_is_caught():
    print("[TEST] Honest step that moves away from the correct leaf")
    print("-" * 40)
    ledger = Ledger(TreeParams(3), Valuation(0.7))
    with pytest.raises(VerificationError) as caught:
        ledger.record_step(ROOT, NodeRef(1, 0), StepOutcome(StepKind.DESCEND_LEFT, 3),
                           root_step_rounds(0.7))
    assert caught.value.check == 'honest_step_potential'
    assert caught.value.step_index == 0
    print(f"  PASS: {caught.value}")


def test_verify_off_only_counts():
    ledger = Ledger(TreeParams(3), Valuation(0.7), verify=False)
    snapshot = ledger.record_step(ROOT, NodeRef(1, 0), StepOutcome(StepKind.DESCEND_LEFT, 3),
                                  root_step_rounds(0.7))
    assert snapshot.potential == 4
    assert snapshot.honest_nonleaf_steps == 1


def test_reported_rounds_must_match():
    ledger = Ledger(TreeParams(3), Valuation(0.7))
    with pytest.raises(VerificationError) as caught:
        ledger.record_step(ROOT, NodeRef(1, 1), StepOutcome(StepKind.DESCEND_RIGHT, 3),
                           root_step_rounds(0.7)[:2])
    assert caught.value.check == 'step_rounds'


def test_corrupted_step_moves_at_most_one():
    ledger = Ledger(TreeParams(3), Valuation(0.7))
    rounds = root_step_rounds(0.7)
    lie = rounds[2]
    rounds[2] = RoundRecord(lie.t, lie.price, lie.true_feedback, lie.observed_feedback.flipped(), True, lie.revenue)
    snapshot = ledger.record_step(ROOT, NodeRef(1, 0), StepOutcome(StepKind.DESCEND_LEFT, 3), rounds)
    assert snapshot.potential == 4
    assert snapshot.corrupted_nonleaf_steps == 1


def test_honest_episode_trace():
    print("[TEST] Honest CommitKnown episode, T=1024, v*=0.7")
    print("-" * 40)
    result = run_episode(make_config())
    trace = result.step_trace
    assert trace[0].potential == 10
    for k in range(11):
        assert trace[k].potential == 10 - k
    ledger = result.ledger
    assert ledger.honest_nonleaf_steps == 10
    assert ledger.corrupted_nonleaf_steps == 0
    assert ledger.correct_leaf_fails == 0
    assert ledger.wrong_leaf_fails == 0
    assert ledger.potential == 0
    print(f"  PASS: {len(trace)} snapshots, final potential 0")


def test_correct_leaf_failure_raises_potential():
    print("[TEST] Commit failure at the correct leaf")
    result = run_episode(make_config(horizon=64, corruption_budget=1, adversary_id='commit-stall'))
    trace = result.step_trace
    jumps = [i for i in range(1, len(trace))
             if trace[i].correct_leaf_fails > trace[i - 1].correct_leaf_fails]
    assert len(jumps) == 1
    i = jumps[0]
    assert trace[i - 1].potential == 0
    assert trace[i].potential == 1
    assert trace[i + 1].potential == 0


def test_leaf_tallies():
    result = run_episode(make_config(horizon=256, corruption_budget=4, adversary_id='leaf-trap',
                                     algorithm_id='commit-unknown'))
    ledger = result.ledger
    per_leaf = ledger.final.per_leaf
    assert ledger.star in per_leaf
    assert per_leaf[ledger.star].leaf_class == LeafClass.STAR
    assert ledger.leaf_regret() == pytest.approx(sum(t.regret for t in per_leaf.values()))
    assert ledger.leaf_regret() <= result.total_regret + 1e-9
    for tally in per_leaf.values():
        assert tally.corrupted_blocks <= tally.blocks


# ==================== BOUNDS ====================

def test_classify_leaf():
    v = Valuation(0.7)
    assert classify_leaf(NodeRef(3, 5), v) == LeafClass.STAR
    assert classify_leaf(NodeRef(3, 6), v) == LeafClass.PLUS
    assert classify_leaf(NodeRef(3, 4), v) == LeafClass.MINUS


def test_bound_helpers():
    assert leaf_block_limit(0) == 3
    assert leaf_block_limit(1) == 6
    assert known_regret_bound(8, 0) == 18
    assert known_regret_bound(2 ** 10, 4) == 50 + 76 + 3
    allowance = 1 + 20 * math.log(1024) * math.log(1024 / 0.05)
    assert correct_leaf_allowance(1024, 0.05) == pytest.approx(allowance)
    assert unknown_regret_bound(1024, 2, 0.05) == pytest.approx(allowance + 170 + 102)


def test_bound_check_tolerance():
    assert BoundCheck('known_regret', 'deterministic', 18.0 + 1e-12, 18.0).satisfied
    assert not BoundCheck('known_regret', 'deterministic', 18.1, 18.0).satisfied
    assert BoundCheck('fail_count', 'deterministic', 2, 5).slack == 3


def test_known_report():
    print("[TEST] CommitKnown, C=0 report")
    print("-" * 40)
    result = run_episode(make_config())
    report = result.ledger.report
    names = [check.name for check in report.checks]
    assert names == ['fail_count', 'regret_decomposition', 'correct_leaf_fails',
                     'corrupted_steps', 'known_leaf_regret', 'known_regret']
    known = report.get('known_regret')
    assert known.lhs == pytest.approx(result.total_regret)
    assert known.rhs == 5 * 10 + 3
    assert report.deterministic_violations == []
    for check in report.checks:
        print(f"  {check.name}: {check.lhs:.3f} <= {check.rhs:.3f}")


def test_unknown_report():
    result = run_episode(make_config(algorithm_id='commit-unknown', corruption_budget=8,
                                     adversary_id='random-budget', seed=17))
    report = result.ledger.report
    assert report.get('above_leaf_regret').satisfied
    assert report.get('known_regret') is None
    assert report.get('unknown_regret').kind == 'probabilistic'
    assert report.deterministic_violations == []


def test_baselines_get_empty_report():
    config = make_config(algorithm_id='majority-vote')
    assert final_report(None, config, 3.0, 0).checks == []
    row = BoundReport().as_row()
    assert set(row) == {f"{name}_{suffix}" for name in BOUND_CATALOGUE for suffix in ('ok', 'slack')}
    assert all(value is None for value in row.values())


def test_report_row():
    row = run_episode(make_config()).ledger.report.as_row()
    assert row['known_regret_ok'] == 1
    assert row['unknown_regret_ok'] is None
    assert row['fail_count_slack'] == 10


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
