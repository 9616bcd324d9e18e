"""
Sweep Specification Test Suite
Tests grid validation, cell expansion and sweep-file loading
"""

import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from config import DEFAULT_SEED
from modules.core import AdversaryKind, AlgorithmId, ConfigError
from modules.adversaries import AdversarySpec
from modules.sweep import SweepSpec, load_sweep_file, parse_bool, split_adversaries, split_list

SWEEP_FILE = """\
# small sweep
horizon = 256, 1024
budget = 0,4        # two budgets
valuation = 1/3, 0.7
algorithm = commit-known
adversary = no-corruption, mimic-low-instance:v_low=1/3;burn=4, random-budget:flip_probability=0.3
trials = 3
seed = 11
verify = false
out_dir = results/small
"""


def test_default_grid():
    print("[TEST] Default sweep grid")
    print("-" * 40)
    spec = SweepSpec()
    cells = spec.cells()
    assert len(cells) == 4 * 5 * 5 * 4 * 5
    assert [c.index for c in cells] == list(range(len(cells)))
    assert spec.trials_per_cell == 100
    assert spec.base_seed == DEFAULT_SEED
    assert spec.valuations[1] == pytest.approx(1 / 3)
    print(f"  PASS: {len(cells)} cells")


def test_budget_above_horizon_skipped():
    spec = SweepSpec(horizons=[4], budgets=[0, 8], valuations=[0.7],
                     algorithms=['commit-known'], adversaries=['no-corruption'])
    cells = spec.cells()
    assert len(cells) == 1
    assert cells[0].budget == 0


def test_episode_config_per_trial():
    spec = SweepSpec(horizons=[64], budgets=[2], valuations=['0.7'], algorithms=['commit-unknown'],
                     adversaries=['leaf-trap:offset=2'], trials_per_cell=3, base_seed=40, delta=0.1)
    cell = spec.cells()[0]
    config = spec.episode_config(cell, 2)
    assert config.seed == 42
    assert config.delta == 0.1
    assert config.adversary_id is AdversaryKind.LEAF_TRAP
    assert config.adversary_param('offset') == 2
    assert config.algorithm_id is AlgorithmId.COMMIT_UNKNOWN
    assert not config.record_steps


@pytest.mark.parametrize("overrides", [
    {'horizons': []},
    {'adversaries': []},
    {'horizons': [1]},
    {'budgets': [-1]},
    {'budgets': ['two']},
    {'valuations': [1.0]},
    {'algorithms': ['bogus']},
    {'adversaries': ['leaf-trap:offset=0']},
    {'trials_per_cell': 0},
    {'delta': 1.5},
    {'base_seed': -1},
])
def test_invalid_grid(overrides):
    with pytest.raises(ConfigError):
        SweepSpec(**overrides)


def test_to_dict_is_plain_data():
    spec = SweepSpec(horizons=[16], budgets=[0], valuations=[0.5], algorithms=['plain-bsearch'],
                     adversaries=['random-budget:flip_probability=0.3'], trials_per_cell=2)
    data = spec.to_dict()
    assert data['algorithms'] == ['plain-bsearch']
    assert data['adversaries'] == ['random-budget:flip_probability=0.3']
    assert data['trials_per_cell'] == 2


# ==================== SWEEP FILE ====================

def test_load_sweep_file(tmp_path):
    print("[TEST] Sweep file with comments and lists")
    print("-" * 40)
    path = tmp_path / 'small.cfg'
    path.write_text(SWEEP_FILE, encoding='utf-8')

    values = load_sweep_file(path)
    assert values['budget'] == '0,4'
    assert values['out_dir'] == 'results/small'

    spec = SweepSpec.from_mapping(values)
    assert spec.horizons == [256, 1024]
    assert spec.budgets == [0, 4]
    assert spec.valuations[0] == pytest.approx(1 / 3)
    assert spec.algorithms == [AlgorithmId.COMMIT_KNOWN]
    assert [a.kind for a in spec.adversaries] == [
        AdversaryKind.NO_CORRUPTION, AdversaryKind.MIMIC_LOW_INSTANCE, AdversaryKind.RANDOM_BUDGET]
    assert spec.adversaries[1].params['burn'] == 4
    assert spec.trials_per_cell == 3
    assert spec.base_seed == 11
    assert spec.verify is False
    assert len(spec.cells()) == 2 * 2 * 2 * 1 * 3
    print("  PASS")


def test_sweep_file_unknown_key(tmp_path):
    path = tmp_path / 'bad.cfg'
    path.write_text("horizon = 16\nhorizons = 32\n", encoding='utf-8')
    with pytest.raises(ConfigError, match="horizons"):
        load_sweep_file(path)


def test_sweep_file_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_sweep_file(tmp_path / 'nope.cfg')


def test_from_mapping_keeps_defaults():
    spec = SweepSpec.from_mapping({'horizon': '64', 'trials': '2', 'parallel': '4', 'out_dir': 'x'})
    assert spec.horizons == [64]
    assert spec.trials_per_cell == 2
    assert len(spec.budgets) == 5


def test_list_helpers():
    assert split_list(' 1, 2 ,,3 ') == ['1', '2', '3']
    assert split_list(['1,2', 3]) == ['1', '2', 3]
    assert split_list(16) == [16]
    adversaries = split_adversaries('no-corruption, mimic-low-instance:v_low=1/3;burn=2')
    assert adversaries[1] == AdversarySpec.parse('mimic-low-instance:burn=2;v_low=1/3')
    assert parse_bool('Yes') is True
    assert parse_bool('off') is False
    with pytest.raises(ConfigError):
        parse_bool('maybe')


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
