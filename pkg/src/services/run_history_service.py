"""
Run History Service.

Stores every simulate/rates invocation with its config and aggregated rows so
past experiments can be listed and compared.
"""

import uuid
from datetime import datetime
from typing import Iterable, List, Optional

from src.schemas.experiment import ExperimentConfig, ExperimentReport, RateRow
from src.services.database.engine import DatabaseManager
from src.services.database.models import ExperimentRun, ReportRowRecord
from src.utils.logger import get_logger

log = get_logger(__name__)


class RunHistoryService:
    """
    Handles recording and retrieving experiment runs.
    """

    def __init__(self, db_manager: Optional[DatabaseManager] = None):
        self.db_manager = db_manager or DatabaseManager()
        self.db_manager.init_db()

    def _store(self, run: ExperimentRun) -> ExperimentRun:
        session = self.db_manager.get_session()
        try:
            session.add(run)
            session.commit()
            log.info(f"Recorded {run.command} run {run.id} ({len(run.rows)} rows)")
            return run
        except Exception:
            session.rollback()
            raise
        finally:
            session.close()

    def record_simulation(self, config: ExperimentConfig, report: ExperimentReport, report_path: Optional[str]) -> ExperimentRun:
        run = ExperimentRun(
            id=str(uuid.uuid4()),
            command="simulate",
            seed=config.seed,
            schema_version=report.schema_version,
            config=config.to_dict(),
            report_path=report_path,
            created_at=datetime.utcnow(),
        )
        run.rows = [
            ReportRowRecord(
                signal=r.signal,
                rsnr=r.rsnr,
                estimator=r.estimator,
                n=config.n,
                median_mse=r.median_mse,
                relative_median_mse=r.relative_median_mse,
                mean_surviving_pct=r.mean_surviving_pct,
                replications=r.replications,
            )
            for r in report.rows
        ]
        return self._store(run)

    def record_rates(self, settings: dict, rows: Iterable[RateRow], report_path: Optional[str]) -> ExperimentRun:
        rows = list(rows)
        run = ExperimentRun(
            id=str(uuid.uuid4()),
            command="rates",
            seed=settings.get("seed"),
            schema_version=settings.get("schema_version"),
            config=settings,
            report_path=report_path,
            created_at=datetime.utcnow(),
        )
        run.rows = [
            ReportRowRecord(
                signal=settings.get("signal"),
                estimator=r.series,
                n=r.n,
                median_mse=r.risk,
                slope=r.slope,
                replications=r.replications,
            )
            for r in rows
        ]
        return self._store(run)

    def get_history(self, limit: int = 10) -> List[ExperimentRun]:
        """Most recent runs first."""
        session = self.db_manager.get_session()
        try:
            return (
                session.query(ExperimentRun)
                .order_by(ExperimentRun.created_at.desc())
                .limit(limit)
                .all()
            )
        finally:
            session.close()

    def get_rows(self, run_id: str) -> List[ReportRowRecord]:
        session = self.db_manager.get_session()
        try:
            return session.query(ReportRowRecord).filter(ReportRowRecord.run_id == run_id).all()
        finally:
            session.close()
