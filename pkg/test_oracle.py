"""
Oracle Test Suite
Cross-checks the fast implementations against brute force: BFS distance,
query-budget scan, and every corruption pattern on small instances
"""

import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from modules.core import AlgorithmId, DyadicPrice, EpisodeConfig, Valuation
from modules.environment import PricingEnvironment
from modules.tree import NodeRef, TreeParams, leaf_of, tree_distance
from modules.algorithms import rivest_query_budget
from modules.oracle import (
    ORACLE_BUDGETS, ORACLE_HORIZONS, OverrideAdversary, budget_cross_check,
    budget_scan, bfs_distance, exhaustive_adversary_check, flip_patterns,
    grid_valuations, run_oracle_suite, _correct_leaf_index
)


def all_nodes(D):
    return [NodeRef(depth, index) for depth in range(D + 1) for index in range(2 ** depth)]


# ==================== DISTANCE ====================

@pytest.mark.parametrize("D", range(1, 7))
def test_tree_distance_matches_bfs(D):
    print(f"[TEST] tree_distance vs BFS, D={D}")
    nodes = all_nodes(D)
    for a in nodes:
        for b in nodes:
            assert tree_distance(a, b) == bfs_distance(a, b, D), f"{a} -> {b}"


def test_bfs_depth_limit():
    with pytest.raises(ValueError):
        bfs_distance(NodeRef(0, 0), NodeRef(0, 0), 7)


# ==================== QUERY BUDGET ====================

@pytest.mark.parametrize("n,C,expected", [(2, 0, 2), (16, 0, 5)])
def test_budget_scan_examples(n, C, expected):
    assert budget_scan(n, C) == expected


def test_budget_small_budgets_full_range():
    print("[TEST] Q(n, C) for all n <= 2^12, C <= 4")
    print("-" * 40)
    mismatches = budget_cross_check(range(2, 2 ** 12 + 1), range(5))
    assert mismatches == []
    print("  PASS: no mismatches")


def test_budget_large_budgets_strided():
    n_values = sorted(set(range(2, 2 ** 12 + 1, 97)) | {2 ** k for k in range(1, 13)}
                      | {2 ** k + 1 for k in range(1, 12)})
    assert budget_cross_check(n_values, range(17)) == []


def test_budget_agrees_at_power_of_two_boundaries():
    for k in range(1, 13):
        for n in (2 ** k - 1, 2 ** k, 2 ** k + 1):
            if n >= 2:
                assert rivest_query_budget(n, 3) == budget_scan(n, 3)


# ==================== ENUMERATION ====================

def test_flip_pattern_counts():
    assert sum(1 for _ in flip_patterns(4, 1)) == 5
    assert sum(1 for _ in flip_patterns(21, 2)) == 1 + 21 + 210
    assert frozenset() in set(flip_patterns(3, 0))


def test_override_adversary_flips_listed_rounds():
    config = EpisodeConfig(horizon=4, valuation=0.7, corruption_budget=2,
                           algorithm_id='commit-known', adversary_id='no-corruption', seed=0)
    env = PricingEnvironment(config, OverrideAdversary(frozenset({2, 4})))
    for _ in range(4):
        env.post_price(DyadicPrice(1, 1))
    assert [r.corrupted for r in env.history] == [False, True, False, True]


def test_grid_valuations():
    values = grid_valuations(8)
    assert len(values) == 16
    assert values[:4] == [0.0, 0.0625, 0.125, 0.1875]
    for v in values:
        assert _correct_leaf_index(8, v) == leaf_of(Valuation(v), TreeParams(3)).index


@pytest.mark.parametrize("T", ORACLE_HORIZONS)
@pytest.mark.parametrize("C", ORACLE_BUDGETS)
@pytest.mark.parametrize("algorithm", [AlgorithmId.COMMIT_KNOWN, AlgorithmId.MAJORITY_VOTE])
def test_no_counterexamples(T, C, algorithm):
    print(f"[TEST] Exhaustive check T={T}, C={C}, {algorithm.value}")
    patterns = 0
    for v in grid_valuations(T):
        verdict = exhaustive_adversary_check(T, C, v, algorithm)
        patterns += verdict.patterns_checked
        assert verdict.ok, verdict.counterexamples[:3]
    print(f"  PASS: {patterns} patterns")


def test_randomized_algorithm_rejected():
    with pytest.raises(ValueError):
        exhaustive_adversary_check(8, 1, 0.7, AlgorithmId.COMMIT_UNKNOWN)


def test_oracle_suite_small():
    assert run_oracle_suite(horizons=[4, 8], budgets=[0, 1], budget_range=(64, 3))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
