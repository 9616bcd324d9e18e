"""
Sweep Specification Module
Grid of (horizon, budget, valuation, algorithm, adversary) cells with a trial
count, plus loading of the flat key = value sweep file
"""

import configparser
import logging
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Optional

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import (
    LOG_FORMAT, LOG_DATE_FORMAT, DEFAULT_HORIZONS, DEFAULT_BUDGETS,
    DEFAULT_VALUATIONS, DEFAULT_ALGORITHMS, DEFAULT_ADVERSARIES,
    DEFAULT_TRIALS, DEFAULT_SEED, DEFAULT_DELTA
)
from modules.core import AlgorithmId, ConfigError, EpisodeConfig, Valuation, parse_enum, parse_real
from modules.adversaries import AdversarySpec

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)

# Keys accepted in a sweep file
SWEEP_KEYS = (
    'horizon', 'budget', 'valuation', 'algorithm', 'adversary', 'delta',
    'trials', 'seed', 'out_dir', 'parallel', 'verify'
)


@dataclass(frozen=True)
class Cell:
    """One (T, C, v*, algorithm, adversary) combination of a sweep"""

    index: int
    horizon: int
    budget: int
    valuation: float
    algorithm: AlgorithmId
    adversary: AdversarySpec


@dataclass
class SweepSpec:
    """Parameter grid for a sweep. All lists must be non-empty"""

    horizons: List[int] = field(default_factory=lambda: list(DEFAULT_HORIZONS))
    budgets: List[int] = field(default_factory=lambda: list(DEFAULT_BUDGETS))
    valuations: List[float] = field(default_factory=lambda: [parse_real(v) for v in DEFAULT_VALUATIONS])
    algorithms: List[AlgorithmId] = field(default_factory=lambda: [AlgorithmId(a) for a in DEFAULT_ALGORITHMS])
    adversaries: List[AdversarySpec] = field(default_factory=lambda: [AdversarySpec.parse(a) for a in DEFAULT_ADVERSARIES])
    trials_per_cell: int = DEFAULT_TRIALS
    base_seed: int = DEFAULT_SEED
    delta: float = DEFAULT_DELTA
    verify: bool = True

    def __post_init__(self):
        self.horizons = [_integer(h, 'horizon') for h in self.horizons]
        self.budgets = [_integer(c, 'budget') for c in self.budgets]
        self.valuations = [parse_real(v) for v in self.valuations]
        self.algorithms = [parse_enum(AlgorithmId, a, 'algorithm') for a in self.algorithms]
        self.adversaries = [a if isinstance(a, AdversarySpec) else AdversarySpec.parse(a) for a in self.adversaries]
        self.delta = parse_real(self.delta)

        for name in ('horizons', 'budgets', 'valuations', 'algorithms', 'adversaries'):
            if not getattr(self, name):
                raise ConfigError(f"Sweep needs at least one value for {name}")
        for T in self.horizons:
            if T < 2:
                raise ConfigError(f"Horizon must be >= 2, got {T}")
        for C in self.budgets:
            if C < 0:
                raise ConfigError(f"Corruption budget must be >= 0, got {C}")
        for v in self.valuations:
            Valuation(v)
        if self.trials_per_cell < 1:
            raise ConfigError(f"trials_per_cell must be >= 1, got {self.trials_per_cell}")
        if self.base_seed < 0 or self.base_seed + self.trials_per_cell > (1 << 64):
            raise ConfigError(f"Seeds {self.base_seed}..{self.base_seed + self.trials_per_cell - 1} leave the 64-bit range")
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"Delta must lie in (0, 1), got {self.delta}")

    def cells(self) -> List[Cell]:
        """Cells in grid order; those with C > T are skipped with a warning"""
        cells = []
        for T, C, v, algorithm, adversary in product(
                self.horizons, self.budgets, self.valuations, self.algorithms, self.adversaries):
            if C > T:
                logger.warning(f"  Skipping cell T={T}, C={C}: budget exceeds horizon")
                continue
            cells.append(Cell(len(cells), T, C, v, algorithm, adversary))
        return cells

    def episode_config(self, cell: Cell, trial: int, record_steps: bool = False) -> EpisodeConfig:
        return EpisodeConfig(
            horizon=cell.horizon,
            valuation=cell.valuation,
            corruption_budget=cell.budget,
            algorithm_id=cell.algorithm,
            adversary_id=cell.adversary.kind,
            seed=self.base_seed + trial,
            delta=self.delta,
            adversary_params=cell.adversary.as_config_params(),
            verify=self.verify,
            record_steps=record_steps
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'horizons': self.horizons,
            'budgets': self.budgets,
            'valuations': self.valuations,
            'algorithms': [a.value for a in self.algorithms],
            'adversaries': [a.to_text() for a in self.adversaries],
            'trials_per_cell': self.trials_per_cell,
            'base_seed': self.base_seed,
            'delta': self.delta,
            'verify': self.verify,
        }

    @classmethod
    def from_mapping(cls, values: Dict[str, Any]) -> 'SweepSpec':
        """Build a spec from sweep-file / CLI values; missing keys keep their defaults"""
        kwargs = {}
        if values.get('horizon') is not None:
            kwargs['horizons'] = split_list(values['horizon'])
        if values.get('budget') is not None:
            kwargs['budgets'] = split_list(values['budget'])
        if values.get('valuation') is not None:
            kwargs['valuations'] = split_list(values['valuation'])
        if values.get('algorithm') is not None:
            kwargs['algorithms'] = split_list(values['algorithm'])
        if values.get('adversary') is not None:
            kwargs['adversaries'] = split_adversaries(values['adversary'])
        if values.get('trials') is not None:
            kwargs['trials_per_cell'] = _integer(values['trials'], 'trials')
        if values.get('seed') is not None:
            kwargs['base_seed'] = _integer(values['seed'], 'seed')
        if values.get('delta') is not None:
            kwargs['delta'] = values['delta']
        if values.get('verify') is not None:
            kwargs['verify'] = parse_bool(values['verify'])
        return cls(**kwargs)


def _integer(value: Any, name: str) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    text = str(value).strip()
    try:
        return int(text)
    except ValueError:
        number = parse_real(text)
    if int(number) != number:
        raise ConfigError(f"{name} must be an integer, got {value}")
    return int(number)


def parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ConfigError(f"Not a boolean: '{value}'")


def split_list(value: Any) -> List[Any]:
    """Comma-separated text (or an already split list) into stripped items"""
    if isinstance(value, (list, tuple)):
        items = []
        for item in value:
            items.extend(split_list(item))
        return items
    if not isinstance(value, str):
        return [value]
    return [item.strip() for item in value.split(',') if item.strip()]


def split_adversaries(value: Any) -> List[AdversarySpec]:
    # adversary parameters use ';' inside an item, so ',' still separates items
    return [item if isinstance(item, AdversarySpec) else AdversarySpec.parse(item)
            for item in split_list(value)]


def load_sweep_file(path: Path) -> Dict[str, str]:
    """
    Read a flat key = value sweep file

    Args:
        path: File with one key per line; '#' starts a comment

    Returns:
        Raw string values keyed by sweep key
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Sweep file not found: {path}")

    parser = configparser.ConfigParser(inline_comment_prefixes=('#',), interpolation=None)
    try:
        parser.read_string('[sweep]\n' + path.read_text(encoding='utf-8'))
    except configparser.Error as e:
        raise ConfigError(f"Malformed sweep file {path}: {e}") from None

    values = dict(parser['sweep'])
    unknown = set(values) - set(SWEEP_KEYS)
    if unknown:
        raise ConfigError(f"Unknown keys in {path}: {sorted(unknown)}")
    logger.info(f"Loaded sweep file {path} ({len(values)} keys)")
    return values
