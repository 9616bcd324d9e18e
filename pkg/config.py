"""
Configuration settings for Robust Pricing Lab
"""

from pathlib import Path

# Base paths
BASE_DIR = Path(__file__).parent.resolve()
RESULTS_DIR = BASE_DIR / "results"
DATABASE_DIR = BASE_DIR / "database"
LOGS_DIR = BASE_DIR / "logs"

# Sweep registry
DATABASE_PATH = DATABASE_DIR / "sweeps.db"

# Price grid: numerator / 2^level stays exact in a double up to this level
MAX_PRICE_LEVEL = 52

# Algorithm defaults
DEFAULT_DELTA = 0.05

# Default sweep suite: 2,000 cells x 100 trials; run it with --parallel
DEFAULT_HORIZONS = [2 ** 8, 2 ** 10, 2 ** 12, 2 ** 14]
DEFAULT_BUDGETS = [0, 1, 4, 16, 64]
DEFAULT_VALUATIONS = ['0.2', '1/3', '0.5', '0.7', '0.999']
DEFAULT_ALGORITHMS = ['commit-known', 'commit-unknown', 'majority-vote', 'plain-bsearch']
DEFAULT_ADVERSARIES = ['no-corruption', 'mimic-low-instance', 'leaf-trap', 'commit-stall', 'random-budget']
DEFAULT_TRIALS = 100
DEFAULT_SEED = 20240601

# High-probability check over many seeds
STATISTICAL_HORIZONS = [2 ** 10, 2 ** 12]
STATISTICAL_BUDGETS = [0, 16, 64]
STATISTICAL_TRIALS = 1000
STATISTICAL_SLACK = 0.02

# Adversary defaults
DEFAULT_FLIP_PROBABILITY = 0.1
DEFAULT_LEAF_TRAP_OFFSET = -1
DEFAULT_MIMIC_LOW = '1/3'
DEFAULT_MIMIC_HIGH = '2/3'

# Absolute tolerance applied to every bound comparison
BOUND_TOLERANCE = 1e-9

# Output files
EPISODES_CSV = "episodes.csv"
SUMMARY_CSV = "summary.csv"
CSV_FLOAT_FORMAT = '%.12g'

# Logging
LOG_FORMAT = '[%(asctime)s] %(levelname)s [%(name)s]: %(message)s'
LOG_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'
