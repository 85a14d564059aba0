# src/config.py

import os
import sys
import logging
from typing import Optional

from dotenv import load_dotenv

load_dotenv()

logger = logging.getLogger(__name__)

# --- Відтворюваність ---
SPARSELIMIT_SEED: Optional[str] = os.getenv("SPARSELIMIT_SEED")

# --- Словники та структури ---
MAX_ARITY = int(os.getenv("MAX_ARITY", 6))
SATURATION_CAP = int(os.getenv("SATURATION_CAP", 20))
SATURATION_EDGE_CAP = int(os.getenv("SATURATION_EDGE_CAP", 16))

# --- Бюджети перебору ---
EF_POSITION_BUDGET = int(float(os.getenv("EF_POSITION_BUDGET", 1e8)))
TYPE_ENUMERATION_CAP = int(os.getenv("TYPE_ENUMERATION_CAP", 20000))
CYCLE_CLASS_CAP = int(os.getenv("CYCLE_CLASS_CAP", 5000))
AGREE_CLASS_CAP = int(os.getenv("AGREE_CLASS_CAP", 100000))
LIMIT_STATE_CAP = int(os.getenv("LIMIT_STATE_CAP", 250000))
SAMPLER_EDGE_BUDGET = int(float(os.getenv("SAMPLER_EDGE_BUDGET", 5e7)))
DPLL_MAX_DECISIONS = int(os.getenv("DPLL_MAX_DECISIONS", 1_000_000))

# --- Monte Carlo ---
MC_TOLERANCE_FLOOR = float(os.getenv("MC_TOLERANCE_FLOOR", 0.02))
MC_TOLERANCE_SIGMAS = float(os.getenv("MC_TOLERANCE_SIGMAS", 4.0))
WORKERS = int(os.getenv("WORKERS", os.cpu_count() or 1))
MC_CHUNK_SIZE = int(os.getenv("MC_CHUNK_SIZE", 64))

# --- Журнал запусків (SQLAlchemy) ---
DATABASE_URL = os.getenv("DATABASE_URL")

# --- Налаштування кешування (aiocache) ---
CACHE_BACKEND = os.getenv("CACHE_BACKEND", "memory")
CACHE_TTL_LIMITS = int(os.getenv("CACHE_TTL_LIMITS", 3600))

# --- Sentry/GlitchTip ---
SENTRY_DSN = os.getenv("SENTRY_DSN") or os.getenv("GLITCHTIP_DSN")
APP_ENVIRONMENT = os.getenv("APP_ENVIRONMENT", "development")
APP_VERSION = os.getenv("APP_VERSION", "0.4.0")


def _critical(message: str) -> None:
    critical_error_msg = f"CRITICAL ERROR: {message}"
    print(critical_error_msg, file=sys.stderr)
    raise ValueError(critical_error_msg)


if MAX_ARITY < 2:
    _critical(f"MAX_ARITY must be at least 2, got {MAX_ARITY}.")

for _name in ("SATURATION_CAP", "SATURATION_EDGE_CAP", "EF_POSITION_BUDGET", "TYPE_ENUMERATION_CAP",
              "CYCLE_CLASS_CAP", "AGREE_CLASS_CAP", "LIMIT_STATE_CAP", "SAMPLER_EDGE_BUDGET",
              "DPLL_MAX_DECISIONS", "WORKERS", "MC_CHUNK_SIZE"):
    if globals()[_name] <= 0:
        _critical(f"{_name} must be positive, got {globals()[_name]}.")

if SPARSELIMIT_SEED is not None:
    try:
        int(SPARSELIMIT_SEED)
    except ValueError:
        logger.error(f"Invalid SPARSELIMIT_SEED '{SPARSELIMIT_SEED}'. Expected an integer; ignoring it.")
        SPARSELIMIT_SEED = None


def log_config_status():
    logger.info("--- Configuration Status ---")
    logger.info(f"SPARSELIMIT_SEED: {SPARSELIMIT_SEED if SPARSELIMIT_SEED is not None else 'NOT SET - seeds are generated per run'}")
    logger.info(f"MAX_ARITY: {MAX_ARITY}, SATURATION_CAP: {SATURATION_CAP}, SATURATION_EDGE_CAP: {SATURATION_EDGE_CAP}")
    logger.info(f"EF_POSITION_BUDGET: {EF_POSITION_BUDGET}")
    logger.info(f"Caps: types={TYPE_ENUMERATION_CAP}, cycles={CYCLE_CLASS_CAP}, classes={AGREE_CLASS_CAP}, states={LIMIT_STATE_CAP}")
    logger.info(f"SAMPLER_EDGE_BUDGET: {SAMPLER_EDGE_BUDGET}, DPLL_MAX_DECISIONS: {DPLL_MAX_DECISIONS}")
    logger.info(f"Monte Carlo: tolerance=max({MC_TOLERANCE_FLOOR}, {MC_TOLERANCE_SIGMAS}*stderr), workers={WORKERS}, chunk={MC_CHUNK_SIZE}")
    logger.info(f"DATABASE_URL: {'Loaded (details in DB init logs)' if DATABASE_URL else 'NOT SET - run ledger disabled'}")
    logger.info(f"CACHE_BACKEND: {CACHE_BACKEND}, CACHE_TTL_LIMITS: {CACHE_TTL_LIMITS}")
    if SENTRY_DSN:
        logger.info(f"SENTRY_DSN: Loaded (environment={APP_ENVIRONMENT}, release={APP_VERSION})")
    else:
        logger.warning("SENTRY_DSN: NOT SET - error reporting disabled.")
    logger.info("--- End of Configuration Status ---")
