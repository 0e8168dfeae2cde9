"""
Tests for the Monte Carlo trial queue.
"""
import time

import pytest

from sparls.core.errors import TrialError
from sparls.pipeline.trial_queue import JobStatus, QueueMode, TrialQueue


def _slow_square(value):
    # Later trials finish first in a thread pool.
    time.sleep(0.01 * (5 - value))
    return value * value


def _fail_on_three(value):
    if value == 3:
        raise ValueError("boom")
    return value


class TestTrialQueue:
    """Tests for TrialQueue."""

    def test_sequential_results_in_index_order(self):
        """Test that results follow trial indices, not insertion order."""
        queue = TrialQueue()
        for index in (2, 0, 1):
            queue.add_job(_slow_square, index, index=index)
        assert queue.run() == [0, 1, 4]
        assert len(queue) == 3
        assert queue.get_stats()["completed"] == 3

    def test_thread_pool_matches_sequential(self):
        """Test that a thread pool returns the same ordered results."""
        queue = TrialQueue()
        for index in range(5):
            queue.add_job(_slow_square, index)
        assert queue.run(QueueMode.PARALLEL_THREAD, workers=5) == [0, 1, 4, 9, 16]

    def test_process_pool(self):
        queue = TrialQueue()
        for value in (-3, 2, -1):
            queue.add_job(abs, value)
        assert queue.run(QueueMode.PARALLEL_PROCESS, workers=2) == [3, 2, 1]

    def test_failure_is_reported(self):
        """Test that a failed trial raises TrialError with its index."""
        queue = TrialQueue()
        for value in range(5):
            queue.add_job(_fail_on_three, value)
        with pytest.raises(TrialError) as excinfo:
            queue.run()
        assert "Trial 3" in str(excinfo.value)
        assert excinfo.value.details["failed"] == [3]
        failed = queue.list_jobs(JobStatus.FAILED)
        assert len(failed) == 1
        assert failed[0].error_message == "boom"
        assert queue.get_stats()["completed"] == 4

    def test_progress_callback(self):
        seen = []
        queue = TrialQueue(progress_callback=lambda job: seen.append(job.status))
        queue.add_job(_slow_square, 4)
        queue.run()
        assert seen == [JobStatus.RUNNING, JobStatus.COMPLETED]

    def test_job_bookkeeping(self):
        queue = TrialQueue()
        assert not queue
        job_id = queue.add_job(_slow_square, 1, job_id="trial-1", metadata={"seed": 0})
        assert job_id == "trial-1"
        assert queue
        (job,) = queue.list_jobs()
        assert job.id == job_id
        assert job.status is JobStatus.PENDING
        assert job.duration is None
        queue.run()
        assert job.status is JobStatus.COMPLETED
        assert job.duration is not None
        assert job.metadata == {"seed": 0}

    def test_empty_queue(self):
        assert TrialQueue().run() == []
