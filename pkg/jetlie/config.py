"""
Runtime configuration and logging for jetlie.

- Expression-size and prolongation-order guards, overridable from the environment
- Worker pool width for per-coordinate and per-sample parallelism
- Project directories for logs, reports and bundled samples
"""

from __future__ import annotations

import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict


class Config:
    """Central configuration for the symmetry engine"""

    # Directories
    PROJECT_ROOT = Path(__file__).parent.parent
    LOGS_DIR = PROJECT_ROOT / "logs"
    REPORTS_DIR = PROJECT_ROOT / "reports"
    SAMPLES_DIR = PROJECT_ROOT / "samples"

    # Expression guards
    KAPPA_MAX = int(os.getenv("JETLIE_KAPPA_MAX", "8"))
    MAX_TERMS = int(os.getenv("JETLIE_MAX_TERMS", "200000"))
    BRACKET_KAPPA_GUARD = 3

    # Processing settings
    MAX_WORKERS = min(4, os.cpu_count() or 1)

    # Manifold calculus
    DEFAULT_TRUNCATION = 6
    RANK_SAMPLES = 3
    RANK_SEED = 20240607

    @classmethod
    def summary(cls) -> Dict[str, Any]:
        """Effective settings, as recorded in batch reports"""
        return {
            "kappa_max": cls.KAPPA_MAX,
            "max_terms": cls.MAX_TERMS,
            "max_workers": cls.MAX_WORKERS,
            "default_truncation": cls.DEFAULT_TRUNCATION,
            "rank_samples": cls.RANK_SAMPLES,
        }


def setup_logging(verbose: bool = False, log_to_file: bool = True) -> logging.Logger:
    """Configure the ``jetlie`` logger with a detailed file log and a short console log"""
    logger = logging.getLogger("jetlie")
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)

    if logger.handlers:
        return logger

    if log_to_file:
        Config.LOGS_DIR.mkdir(exist_ok=True)
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        log_file = Config.LOGS_DIR / f"jetlie_{timestamp}.log"

        # File handler - detailed logs
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(
            logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")
        )
        logger.addHandler(file_handler)

    # Console handler - summary logs; stdout is reserved for reports
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)
    console_handler.setFormatter(logging.Formatter("%(levelname)s - %(message)s"))
    logger.addHandler(console_handler)

    return logger
