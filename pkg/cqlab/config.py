"""Configuration from environment variables with validation."""
import os
import logging

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# .env 가 있으면 먼저 읽는다 (이미 설정된 환경변수는 덮어쓰지 않음)
load_dotenv()

# Logging
LOG_LEVEL = os.environ.get("CQLAB_LOG_LEVEL", "INFO").upper()

# Trial runner
MAX_CONCURRENT = min(max(int(os.environ.get("CQLAB_MAX_CONCURRENT", "4")), 1), 32)  # 1-32

# Block length cap (dense matrices are d^n x d^n)
MAX_N = min(max(int(os.environ.get("CQLAB_MAX_N", "10")), 1), 10)  # 1-10

# Orbit sampling for the invariant projectors
ORBIT_SEED = int(os.environ.get("CQLAB_ORBIT_SEED", "7"))
ORBIT_MAX_UNITARIES = min(max(int(os.environ.get("CQLAB_ORBIT_MAX_UNITARIES", "200")), 1), 1000)

if ORBIT_SEED < 0:
    raise ValueError("CQLAB_ORBIT_SEED must be a non-negative integer")
if LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
    logger.warning("Unknown CQLAB_LOG_LEVEL=%s - falling back to INFO", LOG_LEVEL)
    LOG_LEVEL = "INFO"

# Log configuration summary
logger.info("Configuration loaded: MAX_CONCURRENT=%s, MAX_N=%s, ORBIT_SEED=%s, ORBIT_MAX_UNITARIES=%s",
            MAX_CONCURRENT, MAX_N, ORBIT_SEED, ORBIT_MAX_UNITARIES)
