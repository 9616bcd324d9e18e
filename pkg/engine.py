"""
Sweep Engine
Runs every episode of a sweep (serially or on a process pool), writes the
episode and summary CSVs, and logs the sweep to the registry
"""

import sys
import time
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from config import LOG_FORMAT, LOG_DATE_FORMAT, EPISODES_CSV, SUMMARY_CSV, CSV_FLOAT_FORMAT
from modules.core import VerificationError
from modules.algorithms import run_episode
from modules.sweep import Cell, SweepSpec
from modules.result_analyzer import ResultAnalyzer
from modules.fingerprint import Fingerprinter
from modules.database import SweepRegistry

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)


@dataclass
class SweepOutcome:
    episodes_path: Path
    summary_path: Path
    episodes: int
    deterministic_violations: int
    verification_errors: int
    data_digest: str
    reproduction: str

    @property
    def clean(self) -> bool:
        return self.deterministic_violations == 0 and self.verification_errors == 0


def episode_row(spec: SweepSpec, cell: Cell, trial: int) -> Dict[str, Any]:
    """
    Run one episode of a cell and flatten it into a result row

    A VerificationError is caught here and recorded on the row; any other
    exception propagates and aborts the sweep.
    """
    config = spec.episode_config(cell, trial)
    row = {'cell': cell.index, 'trial': trial, **config.describe()}

    try:
        result = run_episode(config)
    except VerificationError as e:
        logger.error(f"  Verification error in cell {cell.index} trial {trial}: {e}")
        row['verification_error'] = str(e)
        row['deterministic_violations'] = 0
        return row

    row['total_regret'] = result.total_regret
    row['corruptions_used'] = result.corruptions_used
    row['committed_leaf'] = None if result.committed_leaf is None else result.committed_leaf.index
    row['verification_error'] = ''

    ledger = result.ledger
    if ledger is not None:
        row.update({
            'N_T': ledger.correct_leaf_fails,
            'N_F': ledger.wrong_leaf_fails,
            'H': ledger.honest_nonleaf_steps,
            'K': ledger.corrupted_nonleaf_steps,
            'final_phi': ledger.potential,
        })
        row['deterministic_violations'] = len(ledger.report.deterministic_violations)
        row.update(ledger.report.as_row())
    else:
        row['deterministic_violations'] = 0
    return row


def _run_chunk(args: Tuple[SweepSpec, Cell, int]) -> Dict[str, Any]:
    spec, cell, trial = args
    return episode_row(spec, cell, trial)


class SweepEngine:
    """Executes a SweepSpec and writes its result files"""

    def __init__(self, spec: SweepSpec, out_dir: Path, parallel: int = 1,
                 registry: Optional[SweepRegistry] = None):
        """
        Args:
            spec: Validated sweep specification
            out_dir: Directory receiving episodes.csv and summary.csv
            parallel: Worker processes; 1 runs in-process
            registry: Sweep log (optional)
        """
        self.spec = spec
        self.out_dir = Path(out_dir)
        self.parallel = max(1, int(parallel))
        self.registry = registry
        self.analyzer = ResultAnalyzer()
        self.fingerprinter = Fingerprinter(registry)

    def _rows(self, cells: List[Cell]) -> List[Dict[str, Any]]:
        if self.parallel == 1:
            rows = []
            for i, cell in enumerate(cells, 1):
                cell_rows = [episode_row(self.spec, cell, trial) for trial in range(self.spec.trials_per_cell)]
                rows.extend(cell_rows)
                logger.info(f"  [{i}/{len(cells)}] T={cell.horizon} C={cell.budget} v*={cell.valuation:.6g} "
                            f"{cell.algorithm.value} vs {cell.adversary.to_text()}")
            return rows

        tasks = [(self.spec, cell, trial) for cell in cells for trial in range(self.spec.trials_per_cell)]
        logger.info(f"  Dispatching {len(tasks)} episodes to {self.parallel} workers")
        chunksize = max(1, len(tasks) // (self.parallel * 8))
        with ProcessPoolExecutor(max_workers=self.parallel) as pool:
            return list(pool.map(_run_chunk, tasks, chunksize=chunksize))

    def run(self) -> SweepOutcome:
        """
        Run the sweep

        Returns:
            SweepOutcome with file paths, violation counts and the data digest
        """
        logger.info("=" * 60)
        logger.info("SWEEP STARTING")
        logger.info("=" * 60)

        spec_dict = self.spec.to_dict()
        spec_fingerprint = self.fingerprinter.generate_hash(spec_dict)
        log_id = None
        if self.registry is not None:
            log_id = self.registry.start_sweep_log(spec_fingerprint, spec_dict, str(self.out_dir))

        start = time.time()
        try:
            cells = self.spec.cells()
            logger.info(f"  Cells: {len(cells)}, trials per cell: {self.spec.trials_per_cell}")
            logger.info(f"  Output: {self.out_dir}")

            rows = self._rows(cells)
            episodes = self.analyzer.episodes_frame(rows)
            summary = self.analyzer.summarize(episodes)

            self.out_dir.mkdir(parents=True, exist_ok=True)
            episodes_path = self.out_dir / EPISODES_CSV
            summary_path = self.out_dir / SUMMARY_CSV
            episodes.to_csv(episodes_path, index=False, float_format=CSV_FLOAT_FORMAT)
            summary.to_csv(summary_path, index=False, float_format=CSV_FLOAT_FORMAT)

            violations = int(episodes['deterministic_violations'].fillna(0).sum()) if len(episodes) else 0
            errors = int(episodes['verification_error'].fillna('').astype(str).ne('').sum()) if len(episodes) else 0
            digest = self.fingerprinter.file_digest(episodes_path)
            reproduction = self.fingerprinter.compare_with_previous(spec_fingerprint, digest, exclude_id=log_id)

        except Exception as e:
            logger.error(f"⚠ SWEEP FAILED: {e}")
            logger.exception("Full traceback:")
            if self.registry is not None:
                self.registry.complete_sweep_log(log_id, 'failed', error_message=str(e))
            raise

        outcome = SweepOutcome(
            episodes_path=episodes_path,
            summary_path=summary_path,
            episodes=len(episodes),
            deterministic_violations=violations,
            verification_errors=errors,
            data_digest=digest,
            reproduction=reproduction
        )
        if self.registry is not None:
            self.registry.complete_sweep_log(
                log_id,
                'success' if outcome.clean else 'violations',
                episodes=outcome.episodes,
                deterministic_violations=violations,
                verification_errors=errors,
                data_digest=digest
            )

        logger.info("=" * 60)
        logger.info(f"SWEEP COMPLETE in {time.time() - start:.1f}s")
        logger.info("=" * 60)
        logger.info(f"  Episodes: {outcome.episodes}")
        logger.info(f"  Deterministic violations: {violations}")
        logger.info(f"  Verification errors: {errors}")
        logger.info(f"  Data digest: {digest} ({reproduction})")
        logger.info("=" * 60)
        return outcome
