"""Run independent jobs on worker threads with a bounded pool."""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Callable, Sequence
from typing import TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


async def run_jobs(jobs: Sequence[Callable[[], T]], max_workers: int = 1) -> list[T]:
    """Run every job in a thread and return results in submission order.

    At most ``max_workers`` jobs run at once. Order of completion never
    affects the returned list.
    """
    if max_workers < 1:
        raise ValueError(f"max_workers must be >= 1, got {max_workers}")

    semaphore = asyncio.Semaphore(max_workers)

    async def _run(job: Callable[[], T]) -> T:
        async with semaphore:
            return await asyncio.to_thread(job)

    logger.debug("Running %d jobs on %d workers", len(jobs), max_workers)
    return list(await asyncio.gather(*(_run(job) for job in jobs)))
