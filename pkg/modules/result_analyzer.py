"""
Result Analyzer Module
Aggregates per-episode result rows into per-cell summaries, the
high-probability frequency check, and plot-ready regret curves
"""

import math
import logging
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import LOG_FORMAT, LOG_DATE_FORMAT, CSV_FLOAT_FORMAT, STATISTICAL_SLACK
from modules.core import AlgorithmId
from modules.instrumentation import BOUND_CATALOGUE, known_regret_bound, unknown_regret_bound

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)

# Episode CSV schema, in column order
EPISODE_COLUMNS = [
    'cell', 'trial', 'horizon', 'budget', 'valuation', 'algorithm', 'adversary',
    'adversary_params', 'delta', 'seed', 'total_regret', 'corruptions_used',
    'N_T', 'N_F', 'H', 'K', 'final_phi', 'committed_leaf',
    'deterministic_violations', 'verification_error',
] + [f"{name}_{suffix}" for name in BOUND_CATALOGUE for suffix in ('ok', 'slack')]

CELL_KEYS = ['horizon', 'budget', 'valuation', 'algorithm', 'adversary', 'adversary_params']

# Probabilistic check -> share of delta it may fail with
FREQUENCY_CHECKS = {
    'unknown_regret': 1.0,
    'correct_leaf_regret': 1.0 / 3.0,
    'below_leaf_regret': 1.0 / 3.0,
    'below_leaf_blocks': 1.0 / 3.0,
}

SUMMARY_COLUMNS = CELL_KEYS + [
    'episodes', 'mean_regret', 'max_regret', 'mean_corruptions',
    'deterministic_violations', 'verification_errors',
] + [f"{name}_fail_freq" for name in FREQUENCY_CHECKS] + ['statistical_ok']

CURVE_AXES = {'C': ('budget', 'horizon'), 'T': ('horizon', 'budget')}


class ResultAnalyzer:
    """Turns episode rows into summaries and curves"""

    def episodes_frame(self, rows: List[dict]) -> pd.DataFrame:
        """Episode rows in the fixed schema, sorted by (cell, trial)"""
        df = pd.DataFrame(rows, columns=EPISODE_COLUMNS)
        if df.empty:
            return df
        return df.sort_values(['cell', 'trial'], kind='mergesort').reset_index(drop=True)

    def summarize(self, df: pd.DataFrame) -> pd.DataFrame:
        """
        Aggregate episodes per (T, C, v*, algorithm, adversary) cell

        Args:
            df: Episode rows in the EPISODE_COLUMNS schema

        Returns:
            DataFrame in the SUMMARY_COLUMNS schema, one row per cell
        """
        if df.empty:
            return pd.DataFrame(columns=SUMMARY_COLUMNS)

        df = df.copy()
        df['adversary_params'] = df['adversary_params'].fillna('')
        df['_errored'] = df['verification_error'].fillna('').astype(str).ne('').astype(int)
        for name in FREQUENCY_CHECKS:
            ok = pd.to_numeric(df[f"{name}_ok"], errors='coerce')
            df[f"{name}_fail_freq"] = 1.0 - ok

        grouped = df.groupby(CELL_KEYS, sort=False, dropna=False)
        summary = grouped.agg(
            episodes=('total_regret', 'size'),
            mean_regret=('total_regret', 'mean'),
            max_regret=('total_regret', 'max'),
            mean_corruptions=('corruptions_used', 'mean'),
            deterministic_violations=('deterministic_violations', 'sum'),
            verification_errors=('_errored', 'sum'),
            delta=('delta', 'first'),
            **{f"{name}_fail_freq": (f"{name}_fail_freq", 'mean') for name in FREQUENCY_CHECKS}
        ).reset_index()

        summary['statistical_ok'] = summary.apply(self._statistical_ok, axis=1)

        logger.info(f"Summarized {len(df)} episodes into {len(summary)} cells")
        violating = summary[summary['deterministic_violations'] > 0]
        for _, row in violating.iterrows():
            logger.warning(f"  [!!!] T={row['horizon']} C={row['budget']} v*={row['valuation']:.6g} "
                           f"{row['algorithm']} vs {row['adversary']}: "
                           f"{int(row['deterministic_violations'])} violations")

        return summary[SUMMARY_COLUMNS]

    @staticmethod
    def _statistical_ok(row) -> Optional[bool]:
        """Each failure frequency within its share of delta plus slack; None when nothing applies"""
        verdict = None
        for name, share in FREQUENCY_CHECKS.items():
            frequency = row[f"{name}_fail_freq"]
            if pd.isna(frequency):
                continue
            within = frequency <= share * row['delta'] + STATISTICAL_SLACK
            verdict = within if verdict is None else (verdict and within)
        return verdict

    def curve_export(self, df: pd.DataFrame, x_axis: str, out_path: Path) -> pd.DataFrame:
        """
        Write (algorithm, <other axis>, x, mean_regret, max_regret, bound) rows

        Args:
            df: Episode rows
            x_axis: 'C' or 'T'
            out_path: CSV file to write

        Returns:
            The curve table that was written (header only for empty input)
        """
        if x_axis not in CURVE_AXES:
            raise ValueError(f"x_axis must be one of {sorted(CURVE_AXES)}, got {x_axis}")
        x_column, other = CURVE_AXES[x_axis]
        columns = ['algorithm', other, 'x', 'mean_regret', 'max_regret', 'bound']

        if df.empty:
            curve = pd.DataFrame(columns=columns)
        else:
            curve = df.groupby(['algorithm', other, x_column], sort=True).agg(
                mean_regret=('total_regret', 'mean'),
                max_regret=('total_regret', 'max'),
                delta=('delta', 'first')
            ).reset_index().rename(columns={x_column: 'x'})
            T = curve['x'] if x_axis == 'T' else curve[other]
            C = curve[other] if x_axis == 'T' else curve['x']
            curve['bound'] = [
                self._bound(algorithm, int(t), int(c), delta)
                for algorithm, t, c, delta in zip(curve['algorithm'], T, C, curve['delta'])
            ]
            curve = curve[columns]

        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        curve.to_csv(out_path, index=False, float_format=CSV_FLOAT_FORMAT)
        logger.info(f"Curve over {x_axis} written: {out_path} ({len(curve)} points)")
        return curve

    @staticmethod
    def _bound(algorithm: str, horizon: int, C: int, delta: float) -> float:
        if algorithm == AlgorithmId.COMMIT_KNOWN.value:
            return known_regret_bound(horizon, C)
        if algorithm == AlgorithmId.COMMIT_UNKNOWN.value:
            return unknown_regret_bound(horizon, C, delta)
        return math.nan

    def fit_log_slope(self, curve: pd.DataFrame) -> float:
        """Least-squares slope of mean regret against log2 T"""
        points = curve.dropna(subset=['x', 'mean_regret'])
        if points['x'].nunique() < 2:
            raise ValueError("Need at least two distinct horizons to fit a slope")
        slope, _ = np.polyfit(np.log2(points['x'].astype(float)), points['mean_regret'].astype(float), 1)
        return float(slope)
