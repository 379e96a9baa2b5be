"""
Worker Threads for nominal_ua
Fan independent checks (equation schemes, valuation chunks, E_Op equations)
out to a small pool of threads and collect results in input order.
"""

import logging
import queue
import threading
from typing import Any, Callable, List, Sequence, Tuple

# Module logger
logger = logging.getLogger(__name__)


class CheckWorker(threading.Thread):
    """
    Worker thread that drains a shared task queue
    Each task is (index, item); the result of fn(item) is stored at index.
    """

    def __init__(self, tasks: "queue.Queue[Tuple[int, Any]]", fn: Callable[[Any], Any],
                 results: List[Any], errors: List[Tuple[int, BaseException]],
                 stop_event: threading.Event, label: str = "CHECK", number: int = 0):
        """
        Initialize check worker

        Args:
            tasks: Shared queue of (index, item) pairs
            fn: Check to run on each item
            results: Shared result list, pre-sized to the number of tasks
            errors: Shared list collecting (index, exception)
            stop_event: Set to abandon the remaining tasks
            label: Log tag
            number: Worker number for the thread name
        """
        super().__init__(daemon=True, name=f"{label.title()}Worker-{number}")
        self.tasks = tasks
        self.fn = fn
        self.results = results
        self.errors = errors
        self.stop_event = stop_event
        self.label = label
        self.processed = 0

    def run(self):
        """Main worker loop"""
        while not self.stop_event.is_set():
            try:
                index, item = self.tasks.get_nowait()
            except queue.Empty:
                break
            try:
                self.results[index] = self.fn(item)
                self.processed += 1
            except BaseException as e:  # re-raised by run_parallel in the caller's thread
                logger.debug(f"[{self.label}]  Task {index} failed: {e}")
                self.errors.append((index, e))
                self.stop_event.set()
            finally:
                self.tasks.task_done()
        logger.debug(f"[{self.label}]  {self.name} finished ({self.processed} task(s))")

    def stop(self):
        """Stop the worker"""
        self.stop_event.set()


def run_parallel(fn: Callable[[Any], Any], items: Sequence[Any], use_threads: bool = True,
                 max_workers: int = 4, label: str = "CHECK") -> List[Any]:
    """
    Apply fn to every item, possibly on worker threads

    Args:
        fn: Pure check function
        items: Inputs
        use_threads: Run sequentially when False
        max_workers: Upper bound on the number of threads
        label: Log tag for progress messages

    Returns:
        [fn(item) for item in items], in input order

    Raises:
        The first exception raised by fn (lowest task index)
    """
    items = list(items)
    if not use_threads or max_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]

    tasks: "queue.Queue[Tuple[int, Any]]" = queue.Queue()
    for index, item in enumerate(items):
        tasks.put((index, item))

    results: List[Any] = [None] * len(items)
    errors: List[Tuple[int, BaseException]] = []
    stop_event = threading.Event()
    workers = [CheckWorker(tasks, fn, results, errors, stop_event, label, n)
               for n in range(min(max_workers, len(items)))]

    logger.info(f"[{label}]  Running {len(items)} task(s) on {len(workers)} thread(s)")
    for worker in workers:
        worker.start()
    for worker in workers:
        worker.join()

    if errors:
        raise min(errors, key=lambda entry: entry[0])[1]
    return results
