from .estimation import (
    PriorSpec,
    NoisySequence,
    MapEstimate,
    BinomialBounds,
    PriorConditionReport,
    LevelFit,
    DenoiseResult,
)
from .wavelet import WaveletFilter, WaveletDecomposition
from .balls import Zone, LpBallSpec, RiskEstimate
from .experiment import TestSignal, NoisyObservation, ExperimentConfig, ExperimentReport, ReportRow, RateRow
