"""
TrialQueue: runs independent Monte Carlo trials sequentially or in a bounded pool.

Trials are module-level functions applied to a picklable payload. Whatever the
mode, results come back sorted by trial index, so reductions over them do not
depend on which worker finished first.
"""
import logging
import os
import threading
import time
import uuid
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Type

from ..core.errors import TrialError

logger = logging.getLogger(__name__)

TrialFn = Callable[[Any], Any]


class JobStatus(Enum):
    """Lifecycle of one trial."""
    PENDING = "pending"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"


class QueueMode(Enum):
    """Where trials execute."""
    SEQUENTIAL = "sequential"
    PARALLEL_THREAD = "parallel_thread"
    PARALLEL_PROCESS = "parallel_process"


@dataclass
class TrialJob:
    """A trial function, its payload and what happened when it ran."""
    id: str
    index: int
    fn: TrialFn
    payload: Any
    status: JobStatus = JobStatus.PENDING
    result: Any = None
    error_message: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    _t0: Optional[float] = field(default=None, repr=False)
    _t1: Optional[float] = field(default=None, repr=False)

    @property
    def duration(self) -> Optional[float]:
        """Wall-clock seconds between start and finish."""
        if self._t0 is None or self._t1 is None:
            return None
        return self._t1 - self._t0


class TrialQueue:
    """
    A queue of independent trials.

    Args:
        progress_callback: Called with the job whenever it starts, completes
            or fails.
    """

    def __init__(self, progress_callback: Optional[Callable[[TrialJob], None]] = None):
        self._callback = progress_callback
        self._jobs: Dict[str, TrialJob] = {}
        self._lock = threading.Lock()
        self._busy = False

    def __len__(self) -> int:
        return len(self._jobs)

    def __bool__(self) -> bool:
        return bool(self._jobs)

    def add_job(
        self,
        fn: TrialFn,
        payload: Any,
        index: Optional[int] = None,
        job_id: Optional[str] = None,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> str:
        """
        Queue ``fn(payload)`` as one trial and return its job id.

        ``index`` orders the results and defaults to the insertion position.
        ``fn`` must be importable by name when running in a process pool.
        """
        with self._lock:
            job = TrialJob(
                id=job_id or uuid.uuid4().hex,
                index=len(self._jobs) if index is None else index,
                fn=fn,
                payload=payload,
                metadata=dict(metadata or {}),
            )
            self._jobs[job.id] = job
        return job.id

    def list_jobs(self, status: Optional[JobStatus] = None) -> List[TrialJob]:
        """Jobs in insertion order, optionally filtered by status."""
        with self._lock:
            jobs = list(self._jobs.values())
        return [job for job in jobs if status is None or job.status is status]

    def get_stats(self) -> Dict[str, Any]:
        jobs = self.list_jobs()
        stats: Dict[str, Any] = {status.value: 0 for status in JobStatus}
        for job in jobs:
            stats[job.status.value] += 1
        stats["total_jobs"] = len(jobs)
        done = [job.duration for job in jobs if job.status is JobStatus.COMPLETED]
        stats["avg_duration"] = sum(done) / len(done) if done else None
        return stats

    def run(self, mode: QueueMode = QueueMode.SEQUENTIAL, workers: Optional[int] = None) -> List[Any]:
        """
        Execute every pending job and return all results ordered by trial index.

        ``workers`` defaults to the CPU count for processes and to at most four
        threads.

        Raises:
            TrialError: If any trial failed. ``details["failed"]`` lists the
                failed indices and the message names the first one.
        """
        if self._busy:
            raise TrialError("Queue is already running")
        cpus = os.cpu_count() or 1
        self._busy = True
        try:
            if mode is QueueMode.SEQUENTIAL:
                for job in self.list_jobs(JobStatus.PENDING):
                    self._start(job)
                    try:
                        outcome = job.fn(job.payload)
                    except Exception as exc:
                        self._fail(job, exc)
                    else:
                        self._finish(job, outcome)
            elif mode is QueueMode.PARALLEL_PROCESS:
                self._run_pool(ProcessPoolExecutor, workers or cpus)
            elif mode is QueueMode.PARALLEL_THREAD:
                self._run_pool(ThreadPoolExecutor, workers or min(4, cpus))
            else:
                raise TrialError(f"Unsupported queue mode: {mode}")
        finally:
            self._busy = False
        return self.results()

    def results(self) -> List[Any]:
        jobs = sorted(self.list_jobs(), key=lambda job: job.index)
        failed = [job.index for job in jobs if job.status is JobStatus.FAILED]
        if failed:
            first = next(job for job in jobs if job.index == failed[0])
            raise TrialError(
                f"Trial {first.index} failed: {first.error_message}", {"failed": failed}
            )
        return [job.result for job in jobs]

    def _run_pool(self, executor_cls: Type[Executor], workers: int) -> None:
        pending = self.list_jobs(JobStatus.PENDING)
        logger.debug(
            "Dispatching %d trials to %d %s workers",
            len(pending), workers, executor_cls.__name__,
        )
        with executor_cls(max_workers=workers) as pool:
            futures = {}
            for job in pending:
                self._start(job)
                futures[pool.submit(job.fn, job.payload)] = job
            for future in as_completed(futures):
                job = futures[future]
                exc = future.exception()
                if exc is not None:
                    self._fail(job, exc)
                else:
                    self._finish(job, future.result())

    def _start(self, job: TrialJob) -> None:
        with self._lock:
            job.status = JobStatus.RUNNING
            job._t0 = time.perf_counter()
        self._notify(job)

    def _finish(self, job: TrialJob, outcome: Any) -> None:
        with self._lock:
            job.status = JobStatus.COMPLETED
            job.result = outcome
            job._t1 = time.perf_counter()
        logger.debug("Trial %d done in %.3fs", job.index, job.duration)
        self._notify(job)

    def _fail(self, job: TrialJob, error: BaseException) -> None:
        with self._lock:
            job.status = JobStatus.FAILED
            job.error_message = str(error)
            job._t1 = time.perf_counter()
        logger.warning("Trial %d failed %s: %s", job.index, job.metadata, error)
        self._notify(job)

    def _notify(self, job: TrialJob) -> None:
        if self._callback is not None:
            self._callback(job)
