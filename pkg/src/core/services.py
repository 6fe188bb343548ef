# ---------------------------------------------
# SERVICES
# ---------------------------------------------
import logging
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Callable, Dict, List, Sequence

from tqdm import tqdm

logger = logging.getLogger(__name__)


class WorkerPoolService:
    """Service running independent replicas in worker processes."""

    def __init__(self, workers: int = 1, progress: bool = True) -> None:
        """
        Initialize the worker pool service.

        Args:
            workers (int): Number of worker processes; 1 runs in-process.
            progress (bool): Show a progress bar over finished tasks.
        """
        if workers < 1:
            raise ValueError("workers must be positive")
        self.workers = workers
        self.progress = progress

    def map(self, task: Callable[[Dict], Any], payloads: Sequence[Dict], description: str = "batches") -> List[Any]:
        """
        Run task on every payload and return results in payload order.

        Args:
            task (Callable[[Dict], Any]): Picklable module-level function.
            payloads (Sequence[Dict]): One payload per replica.
            description (str): Progress-bar label.

        Returns:
            List[Any]: Results, ordered like payloads.
        """
        results: List[Any] = [None] * len(payloads)
        if self.workers == 1 or len(payloads) == 1:
            for i, payload in enumerate(tqdm(payloads, desc=description, disable=not self.progress)):
                results[i] = task(payload)
            return results

        with ProcessPoolExecutor(max_workers=self.workers) as executor:
            futures = {executor.submit(task, payload): i for i, payload in enumerate(payloads)}
            try:
                for future in tqdm(as_completed(futures), total=len(futures), desc=description,
                                   disable=not self.progress):
                    results[futures[future]] = future.result()
            except Exception:
                for future in futures:
                    future.cancel()
                logger.error("worker task failed; cancelling %d pending tasks", len(futures))
                raise
        return results

    @staticmethod
    def split(total: int, parts: int) -> List[int]:
        """Near-equal positive chunk sizes summing to total."""
        parts = max(1, min(parts, total))
        base, extra = divmod(total, parts)
        return [base + (1 if i < extra else 0) for i in range(parts)]
