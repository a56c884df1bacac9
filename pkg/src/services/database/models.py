"""
SQLAlchemy ORM models for the run-history database.
"""

from datetime import datetime
from sqlalchemy import Column, Integer, String, Float, DateTime, ForeignKey, Text, JSON
from sqlalchemy.orm import declarative_base, relationship

Base = declarative_base()


class ExperimentRun(Base):
    """
    One invocation of `simulate` or `rates`.
    """
    __tablename__ = "experiment_runs"

    id = Column(String(36), primary_key=True)  # UUID
    command = Column(String(20), nullable=False, index=True)  # simulate, rates
    seed = Column(Integer)
    schema_version = Column(Integer)
    config = Column(JSON)
    report_path = Column(Text)

    rows = relationship("ReportRowRecord", back_populates="run", cascade="all, delete-orphan")

    created_at = Column(DateTime, default=datetime.utcnow, index=True)

    def __repr__(self):
        return f"<ExperimentRun(id='{self.id}', command='{self.command}', seed={self.seed})>"


class ReportRowRecord(Base):
    """
    One aggregated row of a run report.

    Simulation rows fill the median/relative/surviving columns; rate rows
    store the series name in `estimator`, grid size in `n` and the fitted
    slope in `slope`.
    """
    __tablename__ = "report_rows"

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(String(36), ForeignKey("experiment_runs.id", ondelete="CASCADE"), nullable=False, index=True)
    signal = Column(String(50))
    rsnr = Column(Float)
    estimator = Column(String(50), nullable=False)
    n = Column(Integer)
    median_mse = Column(Float)
    relative_median_mse = Column(Float)
    mean_surviving_pct = Column(Float)
    slope = Column(Float)
    replications = Column(Integer)

    run = relationship("ExperimentRun", back_populates="rows")

    def __repr__(self):
        return f"<ReportRowRecord(run='{self.run_id}', estimator='{self.estimator}', signal='{self.signal}')>"
