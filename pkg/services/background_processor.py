import logging
import threading
import time
from datetime import datetime
from typing import Optional
from models import Command, JobStatus, KernelJob, db
from services.workspace import RunFlags, execute

logger = logging.getLogger(__name__)

class BackgroundProcessor:
    """Worker thread that runs queued kernel jobs one at a time."""

    def __init__(self, app=None):
        self.is_running = False
        self.thread = None
        self.processing_interval = 2.0
        self.batch_size = 5
        self.app = app

    def start(self, app=None):
        """Start the background processing thread"""
        if app:
            self.app = app
            self.processing_interval = float(app.config.get('LOSET_JOB_POLL_INTERVAL', self.processing_interval))

        if not self.app:
            logger.warning("No Flask app provided, background processor cannot start")
            return

        if self.is_running:
            logger.warning("Background processor is already running")
            return

        self.is_running = True
        self.thread = threading.Thread(target=self._process_loop, daemon=True)
        self.thread.start()
        logger.info("Background processor started")

    def stop(self):
        """Stop the background processing thread"""
        self.is_running = False
        if self.thread:
            self.thread.join(timeout=5)
        logger.info("Background processor stopped")

    def _process_loop(self):
        """Main processing loop"""
        while self.is_running:
            try:
                with self.app.app_context():
                    self.process_pending_jobs()
                time.sleep(self.processing_interval)
            except Exception as e:
                logger.error(f"Error in background processing loop: {str(e)}")
                time.sleep(self.processing_interval * 5)

    def process_pending_jobs(self) -> int:
        """Run up to batch_size pending jobs, oldest first; returns how many ran."""
        pending = KernelJob.query.filter(KernelJob.status == JobStatus.PENDING) \
            .order_by(KernelJob.created_at).limit(self.batch_size).all()
        if not pending:
            logger.debug("No pending kernel jobs")
            return 0

        logger.info(f"Found {len(pending)} pending kernel jobs")
        for job in pending:
            self.run_job(job)
        return len(pending)

    def run_job(self, job: KernelJob):
        job.status = JobStatus.RUNNING
        job.started_at = datetime.utcnow()
        db.session.commit()
        try:
            flags = RunFlags(mode=job.mode, budget=job.budget, threads=job.threads,
                             seed=self.app.config.get('LOSET_SEED', 0) if self.app else 0)
            outcome = execute(job.command, job.source, flags)
            job.exit_code = outcome.exit_code
            job.report = outcome.report
            job.error = outcome.error['message'] if outcome.error else None
            job.status = JobStatus.COMPLETED
            logger.info(f"Kernel job {job.id} ({job.command.value}) finished with exit code {job.exit_code}")
        except Exception as e:
            logger.error(f"Kernel job {job.id} failed: {str(e)}")
            job.status = JobStatus.FAILED
            job.error = str(e)
        job.finished_at = datetime.utcnow()
        db.session.commit()

    def submit(self, command: Command, source: str, mode=None, budget: Optional[int] = None,
               threads: Optional[int] = None) -> KernelJob:
        job = KernelJob(command=command, source=source, budget=budget, threads=threads)
        if mode is not None:
            job.mode = mode
        db.session.add(job)
        db.session.commit()
        logger.info(f"Kernel job {job.id} queued ({command.value})")
        return job

    def get_processing_status(self) -> dict:
        """Get the current processing status"""
        try:
            if not self.app:
                return {'error': 'No Flask app context available'}

            with self.app.app_context():
                counts = {status.value: KernelJob.query.filter(KernelJob.status == status).count()
                          for status in JobStatus}
                return {
                    'is_running': self.is_running,
                    'jobs': counts,
                    'processing_interval': self.processing_interval
                }

        except Exception as e:
            logger.error(f"Error getting processing status: {str(e)}")
            return {'error': str(e)}

# Global instance
background_processor = BackgroundProcessor()
