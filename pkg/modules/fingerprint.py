"""
Fingerprint Module
Content hashing of sweep specifications and result files, used to confirm
that a repeated sweep reproduces its data byte for byte
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))
from config import LOG_FORMAT, LOG_DATE_FORMAT

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format=LOG_FORMAT,
    datefmt=LOG_DATE_FORMAT
)
logger = logging.getLogger(__name__)

REPRODUCED = 'reproduced'
MISMATCH = 'mismatch'
FIRST_RUN = 'first-run'


class Fingerprinter:
    """Hashes sweep specs and output files; looks up earlier digests in the registry"""

    def __init__(self, registry=None):
        """
        Args:
            registry: SweepRegistry to compare digests against (optional)
        """
        self.registry = registry

    def generate_hash(self, data: Dict[str, Any]) -> str:
        """
        MD5 of the sorted 'key:value' parts joined by '|'

        List and dict values are serialized as canonical JSON so that the
        hash does not depend on dict ordering.

        Args:
            data: Mapping to fingerprint

        Returns:
            str: 32 character hex digest
        """
        parts = []
        for key, value in sorted(data.items()):
            if isinstance(value, (list, tuple, dict)):
                value = json.dumps(value, sort_keys=True)
            parts.append(f"{key}:{value}")

        content = "|".join(parts)
        logger.debug(f"  Fingerprint content: {content}")
        return hashlib.md5(content.encode('utf-8')).hexdigest()

    def file_digest(self, path: Path) -> str:
        """MD5 of a file's bytes"""
        digest = hashlib.md5()
        with open(path, 'rb') as handle:
            for chunk in iter(lambda: handle.read(1 << 16), b''):
                digest.update(chunk)
        return digest.hexdigest()

    def compare_with_previous(self, spec_fingerprint: str, data_digest: str,
                              exclude_id: Optional[int] = None) -> str:
        """
        Compare a data digest with the last successful sweep of the same spec

        Returns:
            REPRODUCED, MISMATCH, or FIRST_RUN when there is nothing to compare
        """
        if self.registry is None:
            return FIRST_RUN

        previous = self.registry.find_previous_digest(spec_fingerprint, exclude_id=exclude_id)
        if previous is None:
            logger.info("  No earlier sweep with this spec")
            return FIRST_RUN
        if previous == data_digest:
            logger.info(f"  REPRODUCED: data digest {data_digest} matches the earlier sweep")
            return REPRODUCED
        logger.warning(f"  DIGEST MISMATCH: {data_digest} != earlier {previous}")
        return MISMATCH
