"""
engine.py — Batch orchestrator for seeded Monte Carlo trials.

Coordinates:
  • Per-trial seed derivation from one master seed
  • Parallel execution via ThreadPoolExecutor
  • Results collected by trial index (independent of worker scheduling)
  • Aggregated progress reporting
  • Cooperative cancellation
"""

import logging
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Optional, TypeVar

from .config import DEFAULT_WORKERS, spawn_seeds
from .errors import TrialsCancelled

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Callback types
LogCallback = Callable[[str], None]
ProgressCallback = Callable[[str, int, int], None]  # (stage, current, total)
TrialFn = Callable[[int, int], T]                   # (trial index, trial seed) -> result


class TrialEngine:
    """
    Runs `trials` independent calls of a trial function:
      1. Spawn one 64-bit seed per trial from the master seed
      2. Fan trials out over a thread pool
      3. Store each result at its trial index
    """

    def __init__(
        self,
        workers: int = DEFAULT_WORKERS,
        stage: str = "trials",
        on_progress: Optional[ProgressCallback] = None,
        on_log: Optional[LogCallback] = None,
    ):
        self.workers = max(1, int(workers))
        self.stage = stage
        self.on_progress = on_progress or (lambda *_: None)
        self.on_log = on_log or logger.info
        self._cancelled = threading.Event()

    # ── Public API ───────────────────────────────────────────

    def cancel(self) -> None:
        """Stop scheduling new trials; running ones finish. Sticky until reset()."""
        self._cancelled.set()

    def reset(self) -> None:
        self._cancelled.clear()

    @property
    def cancelled(self) -> bool:
        return self._cancelled.is_set()

    def run(self, trial_fn: TrialFn, seed: int, trials: int) -> List[T]:
        """
        Execute all trials and return their results in trial order.
        Raises TrialsCancelled if cancel() was called before completion,
        including a cancel() issued before this call.
        """
        if self.cancelled:
            raise TrialsCancelled(f"{self.stage} cancelled before start")
        if trials <= 0:
            return []

        seeds = spawn_seeds(seed, trials)
        results: List[Optional[T]] = [None] * trials
        self.on_log(f"▶ {self.stage}: {trials} trial(s) on {self.workers} worker(s), seed {seed}")

        if self.workers == 1:
            for i, s in enumerate(seeds):
                if self.cancelled:
                    raise TrialsCancelled(f"{self.stage} cancelled after {i} trial(s)")
                results[i] = trial_fn(i, s)
                self.on_progress(self.stage, i + 1, trials)
            return results  # type: ignore[return-value]

        completed = 0
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = {}
            for i, s in enumerate(seeds):
                if self.cancelled:
                    break
                futures[pool.submit(self._guarded, trial_fn, i, s)] = i
            for future in as_completed(futures):
                results[futures[future]] = future.result()
                completed += 1
                self.on_progress(self.stage, completed, trials)

        if self.cancelled or completed < trials:
            raise TrialsCancelled(f"{self.stage} cancelled after {completed} trial(s)")
        return results  # type: ignore[return-value]

    def _guarded(self, trial_fn: TrialFn, index: int, seed: int):
        if self.cancelled:
            return None
        return trial_fn(index, seed)
