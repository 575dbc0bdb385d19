"""
Batch Processor for per-image experiment jobs

Handles:
- Job list creation (one job per input image, keyed by image index)
- Sequential or concurrent execution (asyncio + executor, bounded by a semaphore)
- Error isolation (one failing image doesn't stop the others)
- Progress reporting via tqdm
- Results in job-index order regardless of completion order
"""

import asyncio
import logging
import traceback
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence

from tqdm import tqdm

logger = logging.getLogger(__name__)


class JobStatus(Enum):
    """Status of a batch job."""
    PENDING = "pending"
    IN_PROGRESS = "in_progress"
    COMPLETED = "completed"
    FAILED = "failed"


@dataclass
class BatchJob:
    """One unit of work: a single input item and what became of it."""
    index: int
    payload: Any
    status: JobStatus = JobStatus.PENDING
    result: Optional[Any] = None
    error: Optional[str] = None
    started_at: Optional[datetime] = None
    completed_at: Optional[datetime] = None

    @property
    def job_id(self) -> str:
        return f"image_{self.index:04d}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "job_id": self.job_id,
            "index": self.index,
            "status": self.status.value,
            "error": self.error,
            "started_at": self.started_at.isoformat() if self.started_at else None,
            "completed_at": self.completed_at.isoformat() if self.completed_at else None
        }


@dataclass
class BatchResult:
    """Outcome of a batch; `jobs` is always sorted by index."""
    total_jobs: int
    completed: int = 0
    failed: int = 0
    jobs: List[BatchJob] = field(default_factory=list)
    started_at: Optional[datetime] = None
    completed_at: Optional[datetime] = None

    @property
    def success_rate(self) -> float:
        if self.total_jobs == 0:
            return 0.0
        return self.completed / self.total_jobs

    @property
    def results(self) -> List[Any]:
        """Results of completed jobs in index order."""
        return [job.result for job in self.jobs if job.status == JobStatus.COMPLETED]

    @property
    def errors(self) -> Dict[int, str]:
        return {job.index: job.error for job in self.jobs if job.status == JobStatus.FAILED}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total_jobs": self.total_jobs,
            "completed": self.completed,
            "failed": self.failed,
            "success_rate": self.success_rate,
            "started_at": self.started_at.isoformat() if self.started_at else None,
            "completed_at": self.completed_at.isoformat() if self.completed_at else None,
            "jobs": [job.to_dict() for job in self.jobs]
        }


JobFunction = Callable[[int, Any], Any]


class BatchProcessor:
    """
    Runs a function over a list of items with per-item error isolation.

    The job function receives (index, item). Concurrency only changes the
    order jobs finish in; results are reported by index.
    """

    def __init__(self, max_concurrent: int = 1, show_progress: bool = True, description: str = "images"):
        """
        Args:
            max_concurrent: Jobs allowed in flight at once (1 = sequential)
            show_progress: Show a tqdm progress bar
            description: Progress bar label
        """
        if max_concurrent < 1:
            raise ValueError(f"max_concurrent must be >= 1, got {max_concurrent}")
        self.max_concurrent = max_concurrent
        self.show_progress = show_progress
        self.description = description
        self.jobs: List[BatchJob] = []
        logger.debug(f"Batch Processor initialized (max_concurrent={max_concurrent})")

    def create_jobs(self, items: Sequence[Any]) -> List[BatchJob]:
        self.jobs = [BatchJob(index=idx, payload=item) for idx, item in enumerate(items)]
        logger.debug(f"Created {len(self.jobs)} batch jobs")
        return self.jobs

    def _run_job(self, job: BatchJob, func: JobFunction) -> None:
        job.status = JobStatus.IN_PROGRESS
        job.started_at = datetime.now()
        try:
            job.result = func(job.index, job.payload)
            job.status = JobStatus.COMPLETED
        except Exception as e:
            logger.error(f"✗ Job failed: {job.job_id} - {e}")
            logger.debug(traceback.format_exc())
            job.status = JobStatus.FAILED
            job.error = str(e)
        finally:
            job.completed_at = datetime.now()

    def _finish(self, result: BatchResult) -> BatchResult:
        result.completed = sum(1 for job in result.jobs if job.status == JobStatus.COMPLETED)
        result.failed = sum(1 for job in result.jobs if job.status == JobStatus.FAILED)
        result.completed_at = datetime.now()
        logger.info(f"✓ Batch complete: {result.completed}/{result.total_jobs} succeeded")
        return result

    def process_batch_sequential(self, items: Sequence[Any], func: JobFunction) -> BatchResult:
        """Process items one at a time."""
        jobs = self.create_jobs(items)
        result = BatchResult(total_jobs=len(jobs), jobs=jobs, started_at=datetime.now())
        for job in tqdm(jobs, desc=self.description, disable=not self.show_progress):
            self._run_job(job, func)
        return self._finish(result)

    async def process_batch_parallel(self, items: Sequence[Any], func: JobFunction) -> BatchResult:
        """Process items concurrently in the default executor, at most max_concurrent at a time."""
        jobs = self.create_jobs(items)
        result = BatchResult(total_jobs=len(jobs), jobs=jobs, started_at=datetime.now())
        semaphore = asyncio.Semaphore(self.max_concurrent)
        loop = asyncio.get_running_loop()

        with tqdm(total=len(jobs), desc=self.description, disable=not self.show_progress) as bar:
            async def process_job(job: BatchJob):
                async with semaphore:
                    await loop.run_in_executor(None, self._run_job, job, func)
                    bar.update(1)

            await asyncio.gather(*[process_job(job) for job in jobs])

        return self._finish(result)

    def process_batch(self, items: Sequence[Any], func: JobFunction) -> BatchResult:
        """Sequential when max_concurrent == 1, otherwise concurrent."""
        if self.max_concurrent == 1 or len(items) <= 1:
            return self.process_batch_sequential(items, func)
        return asyncio.run(self.process_batch_parallel(items, func))

    def get_summary(self) -> Dict[str, Any]:
        total = len(self.jobs)
        completed = sum(1 for job in self.jobs if job.status == JobStatus.COMPLETED)
        failed = sum(1 for job in self.jobs if job.status == JobStatus.FAILED)
        in_progress = sum(1 for job in self.jobs if job.status == JobStatus.IN_PROGRESS)
        pending = sum(1 for job in self.jobs if job.status == JobStatus.PENDING)

        return {
            "total": total,
            "completed": completed,
            "failed": failed,
            "in_progress": in_progress,
            "pending": pending,
            "success_rate": completed / total if total > 0 else 0.0
        }


def create_batch_processor(max_concurrent: int = 1, show_progress: bool = True) -> BatchProcessor:
    return BatchProcessor(max_concurrent=max_concurrent, show_progress=show_progress)
