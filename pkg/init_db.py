"""
Database Initialization Script
Creates the sweep registry schema for the Robust Pricing Lab
"""

import sqlite3
import logging
from pathlib import Path
from typing import Optional

from config import DATABASE_PATH, LOG_FORMAT, LOG_DATE_FORMAT

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)

SCHEMA = """
-- Sweeps table: one row per sweep run
CREATE TABLE IF NOT EXISTS sweeps (
    id INTEGER PRIMARY KEY AUTOINCREMENT,

    -- Timing
    started_at TEXT NOT NULL,
    completed_at TEXT,
    duration_seconds REAL,

    -- Status
    status TEXT CHECK(status IN ('running', 'success', 'violations', 'failed')),

    -- What was run
    -- spec_fingerprint: MD5 of the sweep spec, equal for identical specs
    spec_fingerprint TEXT NOT NULL,
    spec_json TEXT NOT NULL,
    out_dir TEXT,

    -- Statistics
    episodes INTEGER DEFAULT 0,
    deterministic_violations INTEGER DEFAULT 0,
    verification_errors INTEGER DEFAULT 0,

    -- MD5 of the episodes CSV, compared across runs of the same spec
    data_digest TEXT,

    -- Debugging
    error_message TEXT
);

-- Indexes for performance
CREATE INDEX IF NOT EXISTS idx_sweeps_fingerprint ON sweeps(spec_fingerprint, started_at);
"""


def init_database(db_path: Optional[Path] = None) -> bool:
    """Initialize the sweep registry with its schema"""
    db_path = Path(db_path) if db_path else DATABASE_PATH
    logger.info("=" * 60)
    logger.info("DATABASE INITIALIZATION")
    logger.info("=" * 60)

    # Ensure directory exists
    db_path.parent.mkdir(parents=True, exist_ok=True)
    logger.info(f"Database path: {db_path}")

    try:
        conn = sqlite3.connect(str(db_path))
        cursor = conn.cursor()
        cursor.executescript(SCHEMA)
        conn.commit()
        logger.info("  ✓ Tables created")

        cursor.execute("SELECT name FROM sqlite_master WHERE type='table'")
        tables = cursor.fetchall()
        logger.info(f"  Tables: {[t[0] for t in tables]}")

        conn.close()

        logger.info("=" * 60)
        logger.info("DATABASE INITIALIZED SUCCESSFULLY ✓")
        logger.info("=" * 60)
        return True

    except Exception as e:
        logger.error(f"⚠ DATABASE INITIALIZATION FAILED: {e}")
        logger.exception("Full traceback:")
        return False


if __name__ == "__main__":
    init_database()
