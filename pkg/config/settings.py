"""
Configuration settings for the Manifold Path Planner.

Paths and run defaults are read from environment variables (optionally via a
.env file). Copy .env.example to .env to override them.
Solver parameters live in config/solver.yaml.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Base Paths
BASE_DIR = Path(__file__).resolve().parent.parent
CONFIG_DIR = BASE_DIR / "config"
MANIFESTS_DIR = CONFIG_DIR / "manifests"

load_dotenv(BASE_DIR / ".env")

OUTPUT_DIR = Path(os.getenv("PATHPLAN_OUTPUT_DIR", str(BASE_DIR / "runs")))
LOGS_DIR = Path(os.getenv("PATHPLAN_LOGS_DIR", str(BASE_DIR / "logs")))

# Solver defaults, verify-suite sizes and experiment presets
SOLVER_CONFIG_FILE = Path(os.getenv("PATHPLAN_SOLVER_CONFIG", str(CONFIG_DIR / "solver.yaml")))

# Logging
LOG_LEVEL = os.getenv("PATHPLAN_LOG_LEVEL", "INFO").upper()
LOG_TO_FILE = os.getenv("PATHPLAN_LOG_TO_FILE", "true").lower() in ("1", "true", "yes")

# Batch worker pool
DEFAULT_WORKERS = int(os.getenv("PATHPLAN_WORKERS", str(os.cpu_count() or 1)))

# Output file names
SUMMARY_FILE = "summary.csv"
SCALING_FILE = "scaling.csv"
RUN_REPORT_FILE = "run_report.json"
TRAJECTORY_PATTERN = "trajectory_{path_id:03d}.csv"
