"""
Database Operations Test Suite
Tests the sweep registry: schema creation, sweep logs and digest lookup
"""

import sqlite3
import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from modules.database import SweepRegistry
from init_db import init_database


def test_database(tmp_path):
    """Run complete registry test suite"""
    print("\n" + "=" * 60)
    print("TESTING SWEEP REGISTRY")
    print("=" * 60 + "\n")

    db_path = tmp_path / 'registry' / 'sweeps.db'

    # Step 1: Initialize database
    print("[STEP 1] Initializing database schema...")
    assert init_database(db_path), "Database initialization failed"
    with sqlite3.connect(str(db_path)) as conn:
        tables = [r[0] for r in conn.execute("SELECT name FROM sqlite_master WHERE type='table'")]
    assert 'sweeps' in tables
    print()

    # Step 2: Create registry instance (schema creation is idempotent)
    print("[STEP 2] Creating SweepRegistry instance...")
    registry = SweepRegistry(db_path)
    print()

    # Test 3: Start a sweep log
    print("[TEST 3] Starting sweep log...")
    print("-" * 40)
    spec = {'horizons': [256], 'budgets': [0, 4], 'trials_per_cell': 2}
    log_id = registry.start_sweep_log('a' * 32, spec, str(tmp_path / 'out'))
    print(f"✓ Sweep log created with ID: {log_id}")
    assert log_id > 0, "Log ID should be positive"
    logs = registry.get_sweep_logs()
    assert logs[0]['status'] == 'running'
    assert logs[0]['spec_json'] == spec
    print()

    # Test 4: Complete it
    print("[TEST 4] Completing sweep log...")
    print("-" * 40)
    registry.complete_sweep_log(log_id, 'violations', episodes=4, deterministic_violations=1,
                                verification_errors=0, data_digest='1' * 32)
    log = registry.get_sweep_logs(limit=1)[0]
    print(f"  Status: {log['status']}")
    print(f"  Duration: {log['duration_seconds']}")
    assert log['status'] == 'violations'
    assert log['episodes'] == 4
    assert log['deterministic_violations'] == 1
    assert log['duration_seconds'] >= 0
    assert log['completed_at'] is not None
    print("✓ Sweep log verified")
    print()

    # Test 5: Unknown status rejected
    print("[TEST 5] Unknown status...")
    print("-" * 40)
    with pytest.raises(ValueError):
        registry.complete_sweep_log(log_id, 'exploded')
    print("✓ Rejected")
    print()

    # Test 6: Digest lookup
    print("[TEST 6] Previous digest lookup...")
    print("-" * 40)
    newer = registry.start_sweep_log('a' * 32, spec, str(tmp_path / 'out2'))
    registry.complete_sweep_log(newer, 'success', episodes=4, data_digest='2' * 32)
    failed = registry.start_sweep_log('a' * 32, spec, str(tmp_path / 'out3'))
    registry.complete_sweep_log(failed, 'failed', error_message='boom')

    assert registry.find_previous_digest('a' * 32) == '2' * 32
    assert registry.find_previous_digest('a' * 32, exclude_id=newer) == '1' * 32
    assert registry.find_previous_digest('b' * 32) is None
    print("✓ Latest completed digest found, failed runs ignored")
    print()

    # Test 7: Log listing
    print("[TEST 7] Listing sweep logs...")
    print("-" * 40)
    logs = registry.get_sweep_logs()
    assert [log['id'] for log in logs] == [failed, newer, log_id]
    assert logs[0]['error_message'] == 'boom'
    assert len(registry.get_sweep_logs(limit=2)) == 2
    print(f"✓ {len(logs)} logs, newest first")
    print()

    registry.close()

    print("=" * 60)
    print("ALL REGISTRY TESTS PASSED")
    print("=" * 60)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
