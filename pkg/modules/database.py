"""
Database Utility Module
Sweep registry: logs every sweep's spec, outcome and data digest to sqlite
"""

import sqlite3
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Optional, List, Dict, Any

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import DATABASE_PATH, LOG_FORMAT, LOG_DATE_FORMAT
from init_db import init_database

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)

SWEEP_STATUSES = ('running', 'success', 'violations', 'failed')


class SweepRegistry:
    """Database wrapper for the sweep log"""

    def __init__(self, db_path: str = None):
        """Initialize database connection, creating the schema if needed"""
        self.db_path = Path(db_path) if db_path else DATABASE_PATH
        logger.info(f"Initializing sweep registry")
        logger.info(f"  Path: {self.db_path}")

        init_database(self.db_path)

        # Connect with row factory for dict-like access
        self.conn = sqlite3.connect(str(self.db_path), check_same_thread=False)
        self.conn.row_factory = sqlite3.Row

        logger.info("  ✓ Registry connection established")

    def _log_query(self, operation: str, query: str, params: tuple = None):
        """Log database queries at debug level"""
        logger.debug(f"  SQL [{operation}]: {query[:100]}...")
        if params:
            logger.debug(f"  Params: {params}")

    # ==================== SWEEP LOG ====================

    def start_sweep_log(self, spec_fingerprint: str, spec_json: Dict[str, Any], out_dir: str) -> int:
        """
        Create a new sweep log entry in 'running' state

        Args:
            spec_fingerprint: Hash of the sweep spec
            spec_json: The sweep spec as a dict
            out_dir: Directory the CSVs are written to

        Returns:
            int: new sweep log ID
        """
        logger.info(f"Starting sweep log (spec {spec_fingerprint})")

        query = """
            INSERT INTO sweeps (started_at, status, spec_fingerprint, spec_json, out_dir)
            VALUES (?, 'running', ?, ?, ?)
        """
        params = (datetime.now().isoformat(), spec_fingerprint,
                  json.dumps(spec_json, sort_keys=True), str(out_dir))
        self._log_query('INSERT', query, params)

        cursor = self.conn.cursor()
        cursor.execute(query, params)
        self.conn.commit()

        log_id = cursor.lastrowid
        logger.info(f"  ✓ Sweep log started: ID {log_id}")
        return log_id

    def complete_sweep_log(
        self,
        log_id: int,
        status: str,
        episodes: int = 0,
        deterministic_violations: int = 0,
        verification_errors: int = 0,
        data_digest: str = None,
        error_message: str = None
    ):
        """Complete a sweep log entry with its results"""
        if status not in SWEEP_STATUSES:
            raise ValueError(f"Unknown sweep status '{status}'")

        logger.info(f"Completing sweep log {log_id}")
        logger.info(f"  Status: {status}")
        logger.info(f"  Episodes: {episodes}, violations: {deterministic_violations}, "
                    f"verification errors: {verification_errors}")

        cursor = self.conn.cursor()

        # Calculate duration
        cursor.execute("SELECT started_at FROM sweeps WHERE id = ?", (log_id,))
        row = cursor.fetchone()
        started_at = datetime.fromisoformat(row['started_at'])
        duration = (datetime.now() - started_at).total_seconds()

        cursor.execute("""
            UPDATE sweeps SET
                completed_at = ?,
                duration_seconds = ?,
                status = ?,
                episodes = ?,
                deterministic_violations = ?,
                verification_errors = ?,
                data_digest = ?,
                error_message = ?
            WHERE id = ?
        """, (
            datetime.now().isoformat(),
            duration,
            status,
            episodes,
            deterministic_violations,
            verification_errors,
            data_digest,
            error_message,
            log_id
        ))
        self.conn.commit()
        logger.info(f"  ✓ Sweep log completed (duration: {duration:.1f}s)")

    def find_previous_digest(self, spec_fingerprint: str, exclude_id: Optional[int] = None) -> Optional[str]:
        """Data digest of the most recent completed sweep with the same spec"""
        cursor = self.conn.cursor()
        cursor.execute("""
            SELECT id, data_digest FROM sweeps
            WHERE spec_fingerprint = ? AND status IN ('success', 'violations') AND data_digest IS NOT NULL
            ORDER BY id DESC
        """, (spec_fingerprint,))
        for row in cursor.fetchall():
            if row['id'] != exclude_id:
                return row['data_digest']
        return None

    def get_sweep_logs(self, limit: int = 50) -> List[Dict[str, Any]]:
        """Most recent sweep logs, newest first"""
        cursor = self.conn.cursor()
        cursor.execute("SELECT * FROM sweeps ORDER BY id DESC LIMIT ?", (limit,))
        logs = []
        for row in cursor.fetchall():
            log = dict(row)
            log['spec_json'] = json.loads(log['spec_json'] or '{}')
            logs.append(log)
        return logs

    def close(self):
        """Close database connection"""
        self.conn.close()
        logger.info("Registry connection closed")
