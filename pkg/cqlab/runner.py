"""Monte Carlo 시행 실행기 — 세마포어로 동시 실행 제한, 시행 순서대로 결과 수집."""
import asyncio
import logging
import math
from typing import Callable, Sequence, TypeVar

import numpy as np

from cqlab.config import MAX_CONCURRENT

logger = logging.getLogger(__name__)

T = TypeVar("T")


def trial_generators(seed: int, trials: int) -> list[np.random.Generator]:
    """Per-trial generators derived from (seed, trial index) only."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [np.random.default_rng(child) for child in children]


async def _run_one(sem: asyncio.Semaphore, fn: Callable[[np.random.Generator], T],
                   rng: np.random.Generator, index: int) -> T:
    async with sem:
        try:
            return await asyncio.to_thread(fn, rng)
        except Exception as e:
            logger.error("trial %d failed: %s", index, e)
            raise


async def run_trials_async(fn: Callable[[np.random.Generator], T], trials: int, seed: int,
                           max_concurrent: int | None = None) -> list[T]:
    """Run ``fn`` once per trial in worker threads, at most ``max_concurrent`` at a time."""
    limit = max_concurrent or MAX_CONCURRENT
    sem = asyncio.Semaphore(limit)
    rngs = trial_generators(seed, trials)
    logger.info("시행 시작: trials=%d, seed=%d, workers=%d", trials, seed, limit)
    # gather keeps submission order, so results never depend on scheduling
    results = await asyncio.gather(*(_run_one(sem, fn, rng, i) for i, rng in enumerate(rngs)))
    logger.info("시행 완료: trials=%d", trials)
    return list(results)


def run_trials(fn: Callable[[np.random.Generator], T], trials: int, seed: int,
               max_concurrent: int | None = None) -> list[T]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return asyncio.run(run_trials_async(fn, trials, seed, max_concurrent))


def mean_stderr(values: Sequence[float]) -> tuple[float, float]:
    """Sample mean and its standard error (0 for a single value)."""
    arr = np.asarray(values, dtype=np.float64)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(arr.size))


def binomial_stderr(freq: float, trials: int) -> float:
    return math.sqrt(max(freq * (1 - freq), 0.0) / trials)
