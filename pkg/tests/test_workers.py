"""Tests for Workers"""

import pytest
import queue
import threading
import time

from workers import CheckWorker, run_parallel


class TestRunParallel:
    """Test cases for run_parallel"""

    def test_sequential(self):
        """Test that use_threads=False maps in order"""
        assert run_parallel(lambda x: x * x, [1, 2, 3], use_threads=False) == [1, 4, 9]

    def test_threaded_keeps_input_order(self):
        """Test that results come back in input order whatever finishes first"""
        def slow_for_small(x):
            time.sleep(0.01 * (5 - x))
            return x * 10

        assert run_parallel(slow_for_small, [0, 1, 2, 3, 4], use_threads=True, max_workers=3) == [0, 10, 20, 30, 40]

    def test_threads_are_used(self):
        """Test that work runs on worker threads"""
        names = run_parallel(lambda _: threading.current_thread().name, range(6), max_workers=2, label="EOP")
        assert all(name.startswith("EopWorker-") for name in names)

    def test_empty_and_single(self):
        """Test trivial inputs"""
        assert run_parallel(lambda x: x, []) == []
        assert run_parallel(lambda x: x + 1, [1]) == [2]

    def test_first_error_reraised(self):
        """Test that the exception of the lowest failing task is raised"""
        def check(x):
            if x in (2, 5):
                raise ValueError(f"bad {x}")
            return x

        with pytest.raises(ValueError, match="bad 2"):
            run_parallel(check, range(8), use_threads=True, max_workers=2)

    def test_sequential_error(self):
        """Test that errors propagate without threads too"""
        with pytest.raises(KeyError):
            run_parallel(lambda x: {}[x], ["missing"], use_threads=False)


class TestCheckWorker:
    """Test cases for CheckWorker"""

    def test_worker_drains_queue(self):
        """Test a single worker processing every task"""
        tasks = queue.Queue()
        for i, item in enumerate(["a", "bb", "ccc"]):
            tasks.put((i, item))
        results, errors = [None] * 3, []
        worker = CheckWorker(tasks, len, results, errors, threading.Event(), "CHECK", 1)

        worker.start()
        worker.join(timeout=5)

        assert results == [1, 2, 3]
        assert errors == []
        assert worker.processed == 3
        assert worker.name == "CheckWorker-1"

    def test_worker_stops_after_error(self):
        """Test that a failing task sets the stop event"""
        tasks = queue.Queue()
        tasks.put((0, "x"))
        tasks.put((1, "y"))
        results, errors = [None] * 2, []
        stop_event = threading.Event()

        def fail(_):
            raise RuntimeError("boom")

        worker = CheckWorker(tasks, fail, results, errors, stop_event)
        worker.run()

        assert stop_event.is_set()
        assert [index for index, _ in errors] == [0]
        assert worker.processed == 0

    def test_stop(self):
        """Test stopping a worker before it runs"""
        tasks = queue.Queue()
        tasks.put((0, 1))
        worker = CheckWorker(tasks, lambda x: x, [None], [], threading.Event())
        worker.stop()
        worker.run()
        assert worker.processed == 0
