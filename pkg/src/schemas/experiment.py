"""
Schemas for test signals, simulation configs and experiment reports.
"""

from dataclasses import dataclass, field, asdict
from typing import List, Optional, Tuple

import numpy as np

from src.config.constants import (
    DEFAULT_ESTIMATORS,
    DEFAULT_FILTER,
    DEFAULT_J0,
    DEFAULT_REPLICATIONS,
    DEFAULT_RSNR_LEVELS,
    DEFAULT_SEED,
    REPORT_SCHEMA_VERSION,
)


@dataclass(frozen=True)
class TestSignal:
    """A closed-form test function sampled at t_i = i/n, i = 1..n."""

    __test__ = False

    name: str
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def n(self) -> int:
        return int(self.samples.size)

    @property
    def grid(self) -> np.ndarray:
        return np.arange(1, self.n + 1) / self.n


@dataclass(frozen=True)
class NoisyObservation:
    """
    y = clean + sigma z with sigma = sd(clean)/rsnr.

    stream_key identifies the random stream derived from seed, so the same
    (seed, stream_key) always reproduces the same noise.
    """
    clean: TestSignal
    y: np.ndarray
    sigma: float
    rsnr: float
    seed: int
    stream_key: Tuple[int, ...] = ()

    def __post_init__(self):
        y = np.array(self.y, dtype=float)
        y.setflags(write=False)
        object.__setattr__(self, "y", y)


@dataclass
class ExperimentConfig:
    """Simulation grid: every signal x rsnr level x estimator, `replications` times."""
    signals: List[str]
    rsnr_levels: List[float] = field(default_factory=lambda: list(DEFAULT_RSNR_LEVELS))
    n: int = 1024
    replications: int = DEFAULT_REPLICATIONS
    filter: str = DEFAULT_FILTER
    j0: int = DEFAULT_J0
    estimators: List[str] = field(default_factory=lambda: list(DEFAULT_ESTIMATORS))
    seed: int = DEFAULT_SEED
    workers: Optional[int] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ReportRow:
    """One (signal, rsnr, estimator) cell of a simulation report."""
    signal: str
    rsnr: float
    estimator: str
    median_mse: float
    relative_median_mse: float
    mean_surviving_pct: float
    replications: int
    seed: int


@dataclass
class ExperimentReport:
    """Table-style simulation output, format-versioned."""
    rows: List[ReportRow] = field(default_factory=list)
    schema_version: int = REPORT_SCHEMA_VERSION

    COLUMNS = (
        "schema_version", "signal", "rsnr", "estimator", "median_mse",
        "relative_median_mse", "mean_surviving_pct", "replications", "seed",
    )

    def records(self) -> List[dict]:
        return [{"schema_version": self.schema_version, **asdict(row)} for row in self.rows]

    def group(self, signal: str, rsnr: float) -> List[ReportRow]:
        return [r for r in self.rows if r.signal == signal and r.rsnr == rsnr]


@dataclass(frozen=True)
class RateRow:
    """
    Risk at one grid size; slope is the fitted log-log slope of its series.

    risk is the median over replications in function mode and the Monte
    Carlo mean in ball mode.
    """
    mode: str
    series: str
    m: float
    n: int
    risk: float
    reference_rate: Optional[float]
    slope: float
    replications: int
    seed: int
