"""
Startup Script
Command-line entry point: parameter sweeps, the exhaustive oracle suite and
the targeted experiments
"""

import sys
import argparse
import logging
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from config import (
    LOG_FORMAT, LOG_DATE_FORMAT, LOGS_DIR, RESULTS_DIR, DATABASE_PATH,
    DEFAULT_SEED, STATISTICAL_TRIALS
)
from modules.core import ConfigError
from modules.sweep import SweepSpec, load_sweep_file
from modules.database import SweepRegistry
from modules.oracle import run_oracle_suite
from modules.experiments import paired_mimic_experiment, fragility_experiment, statistical_cells
from modules.result_analyzer import ResultAnalyzer, CURVE_AXES
from engine import SweepEngine

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INVALID = 2

LOWER_BOUND_BUDGETS = [4, 16, 64]
LOWER_BOUND_HORIZON = 2 ** 12


# Force stream handler to flush after each log
class FlushingStreamHandler(logging.StreamHandler):
    def emit(self, record):
        super().emit(record)
        self.flush()


def configure_logging(level: str = 'INFO'):
    """Log to stdout and to logs/pricing_lab.log"""
    LOGS_DIR.mkdir(parents=True, exist_ok=True)
    formatter = logging.Formatter(LOG_FORMAT, datefmt=LOG_DATE_FORMAT)

    file_handler = logging.FileHandler(LOGS_DIR / 'pricing_lab.log', encoding='utf-8')
    stream_handler = FlushingStreamHandler(sys.stdout)
    file_handler.setFormatter(formatter)
    stream_handler.setFormatter(formatter)

    logging.root.handlers = [file_handler, stream_handler]
    logging.root.setLevel(getattr(logging, level.upper(), logging.INFO))


DEFAULT_SUITE_NOTE = (
    'With no grid flags the default suite runs: 2,000 cells of 100 trials. A quarter of '
    'those episodes are at T = 2^14 and take roughly 0.3 s each, which alone is hours '
    'in one process. '
    'Pass --parallel N to spread the episodes over N worker processes.'
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='start.py',
        description='Robust dynamic pricing lab: sweeps, oracle checks and experiments',
        epilog=DEFAULT_SUITE_NOTE
    )
    grid = parser.add_argument_group('sweep grid (comma-separated lists)')
    grid.add_argument('--horizon', help='horizons T, e.g. 256,1024')
    grid.add_argument('--budget', help='corruption budgets C, e.g. 0,4,16')
    grid.add_argument('--valuation', help='valuations v*, decimals or fractions, e.g. 0.7,1/3')
    grid.add_argument('--algorithm', help='commit-known, commit-unknown, majority-vote, plain-bsearch')
    grid.add_argument('--adversary', help="adversaries, e.g. no-corruption,random-budget:flip_probability=0.3")
    grid.add_argument('--delta', help='confidence parameter for commit-unknown')
    grid.add_argument('--trials', help='episodes per cell')
    grid.add_argument('--seed', help='base seed; trial i uses seed + i')

    run = parser.add_argument_group('run')
    run.add_argument('--out-dir', help='directory for episodes.csv and summary.csv')
    run.add_argument('--config', help='key = value sweep file; flags override its values')
    run.add_argument('--parallel', help='worker processes (default 1); the default suite needs several')
    run.add_argument('--verify', action=argparse.BooleanOptionalAction, default=None,
                     help='per-step potential assertions (default on)')
    run.add_argument('--curves', action='append', choices=sorted(CURVE_AXES),
                     help='also write curve_<axis>.csv next to the output directory')
    run.add_argument('--registry', help=f'sweep registry database (default {DATABASE_PATH})')
    run.add_argument('--no-registry', action='store_true', help='do not log the sweep')
    run.add_argument('--log-level', default='INFO', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])

    modes = parser.add_argument_group('other modes')
    modes.add_argument('--oracle', action='store_true',
                       help='exhaustive small-instance adversary checks and the query-budget cross-check')
    modes.add_argument('--experiment', choices=['lower-bound', 'fragility', 'statistical'])
    return parser


def merged_values(args: argparse.Namespace) -> Dict[str, Optional[str]]:
    """Sweep-file values overridden key by key by the flags that were given"""
    values = load_sweep_file(Path(args.config)) if args.config else {}
    flags = {
        'horizon': args.horizon, 'budget': args.budget, 'valuation': args.valuation,
        'algorithm': args.algorithm, 'adversary': args.adversary, 'delta': args.delta,
        'trials': args.trials, 'seed': args.seed, 'out_dir': args.out_dir,
        'parallel': args.parallel, 'verify': args.verify,
    }
    values.update({key: value for key, value in flags.items() if value is not None})
    return values


def open_registry(args: argparse.Namespace) -> Optional[SweepRegistry]:
    if args.no_registry:
        return None
    return SweepRegistry(args.registry or DATABASE_PATH)


def run_sweep(spec: SweepSpec, out_dir: Path, parallel: int, args: argparse.Namespace):
    engine = SweepEngine(spec, out_dir, parallel=parallel, registry=open_registry(args))
    outcome = engine.run()

    for axis in args.curves or []:
        episodes = pd.read_csv(outcome.episodes_path, keep_default_na=False, na_values=[''])
        ResultAnalyzer().curve_export(episodes, axis, out_dir.parent / f"curve_{axis}.csv")
    return outcome


def sweep_command(args: argparse.Namespace) -> int:
    values = merged_values(args)
    spec = SweepSpec.from_mapping(values)
    out_dir = Path(values.get('out_dir') or RESULTS_DIR / 'sweep')
    parallel = int(values.get('parallel') or 1)

    outcome = run_sweep(spec, out_dir, parallel, args)
    if spec.verify and not outcome.clean:
        logger.error(f"{outcome.deterministic_violations} deterministic violations, "
                     f"{outcome.verification_errors} verification errors")
        return EXIT_VIOLATION
    return EXIT_OK


def experiment_command(args: argparse.Namespace) -> int:
    logger.info("=" * 60)
    logger.info(f"EXPERIMENT: {args.experiment.upper()}")
    logger.info("=" * 60)
    seed = int(args.seed) if args.seed is not None else DEFAULT_SEED

    if args.experiment == 'lower-bound':
        results = [paired_mimic_experiment(C, LOWER_BOUND_HORIZON, seed=seed) for C in LOWER_BOUND_BUDGETS]
        ok = all(r.holds and r.shared_prefix_rounds >= r.budget for r in results)

    elif args.experiment == 'fragility':
        result = fragility_experiment(seed=seed)
        ok = result.plain_is_fragile and result.commit_known_within_bound

    else:
        trials = int(args.trials) if args.trials is not None else STATISTICAL_TRIALS
        spec = statistical_cells(trials=trials, seed=seed)
        out_dir = Path(args.out_dir) if args.out_dir else RESULTS_DIR / 'statistical'
        parallel = int(args.parallel) if args.parallel else 1
        outcome = run_sweep(spec, out_dir, parallel, args)

        summary = pd.read_csv(outcome.summary_path)
        failing = summary[summary['statistical_ok'].astype(str) == 'False']
        for _, row in failing.iterrows():
            logger.warning(f"  Frequency check failed: T={row['horizon']} C={row['budget']} "
                           f"v*={row['valuation']:.6g} vs {row['adversary']}")
        ok = outcome.clean and failing.empty

    logger.info(f"EXPERIMENT {'PASSED' if ok else 'FAILED'}")
    return EXIT_OK if ok else EXIT_VIOLATION


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        if args.oracle:
            return EXIT_OK if run_oracle_suite() else EXIT_VIOLATION
        if args.experiment:
            return experiment_command(args)
        return sweep_command(args)
    except (ConfigError, ValueError) as e:
        logger.error(f"⚠ Invalid input: {e}")
        return EXIT_INVALID


if __name__ == '__main__':
    sys.exit(main())
