"""
Schemas for the Gaussian sequence model and the wavelet estimators.

All containers are frozen; array fields are copied and marked read-only on
construction so results can be shared freely between workers.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.special import logsumexp

from src.config.constants import PRIOR_SUM_TOLERANCE
from src.schemas.wavelet import WaveletDecomposition
from src.services.errors import InvalidInputError, InvalidParameterError


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PriorSpec:
    """
    Prior on the number κ of non-zero means plus the variance ratio γ = τ²/σ².

    Attributes:
        n: Dimension of the mean vector.
        log_pi: log π(κ) for κ = 0..n; every entry finite.
        gamma: Prior-to-noise variance ratio, strictly positive.
    """
    n: int
    log_pi: np.ndarray
    gamma: float

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameterError("Prior dimension must be >= 1", f"n={self.n}")
        log_pi = _frozen_array(self.log_pi)
        if log_pi.shape != (self.n + 1,):
            raise InvalidInputError(
                "log_pi must have n+1 entries", f"got {log_pi.shape}, n={self.n}"
            )
        if not np.all(np.isfinite(log_pi)):
            raise InvalidInputError("Every prior mass pi(kappa) must be positive")
        if not abs(logsumexp(log_pi)) <= PRIOR_SUM_TOLERANCE:
            raise InvalidInputError("Prior masses must sum to one")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise InvalidParameterError("gamma must be positive", f"gamma={self.gamma}")
        object.__setattr__(self, "log_pi", log_pi)

    @property
    def tau_squared_ratio(self) -> float:
        """τ²/σ², an alias for gamma."""
        return self.gamma

    def pi(self, kappa: int) -> float:
        return math.exp(self.log_pi[kappa])


@dataclass(frozen=True)
class NoisySequence:
    """Observations y_i = μ_i + σ z_i."""
    y: np.ndarray
    sigma: float

    def __post_init__(self):
        y = _frozen_array(self.y)
        if y.ndim != 1 or y.size < 1:
            raise InvalidInputError("Observation vector must be 1-D and non-empty")
        if not np.all(np.isfinite(y)):
            raise InvalidInputError("Observations must be finite")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InvalidParameterError("sigma must be positive", f"sigma={self.sigma}")
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.y.size)


@dataclass(frozen=True)
class MapEstimate:
    """
    Output of the MAP testimation rule.

    threshold is +inf when kappa_hat == 0 (every observation is killed).
    objective[k] is the residual sum of squares beyond the k largest
    observations plus the complexity penalty at k.
    """
    kappa_hat: int
    threshold: float
    mu_hat: np.ndarray
    objective: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu_hat", _frozen_array(self.mu_hat))
        object.__setattr__(self, "objective", _frozen_array(self.objective))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.mu_hat != 0)


@dataclass(frozen=True)
class BinomialBounds:
    """κ·log(n/κ) ≤ log C(n,κ) < κ·log(ne/κ)."""
    lower: float
    upper: float
    exact: float


@dataclass(frozen=True)
class BinomialSweepReport:
    """Smallest log-domain slack found for each inequality over a sweep."""
    n_max: int
    pairs_checked: int
    lower_slack: float
    upper_slack: float
    refined_slack: float

    def holds(self, tolerance: float = 1e-9) -> bool:
        return min(self.lower_slack, self.upper_slack, self.refined_slack) >= -tolerance


@dataclass(frozen=True)
class PriorConditionReport:
    """Outcome of the three prior conditions for adaptive minimaxity."""
    zero_mass: bool
    sparse_mass: bool
    full_mass: bool

    @property
    def all_hold(self) -> bool:
        return self.zero_mass and self.sparse_mass and self.full_mass


@dataclass(frozen=True)
class LevelFit:
    """
    Empirical Bayes fit for one resolution level (j is None for the pooled fit).

    kappa_hat is the κ maximizing the conditional likelihood profile;
    map_kappa and threshold record the final MAP selection with the fitted prior.
    """
    j: Optional[int]
    q_hat: float
    gamma_hat: float
    kappa_hat: int
    profile_loglik: float
    size: int = 0
    map_kappa: int = 0
    threshold: float = math.inf

    def __post_init__(self):
        if not 0 < self.q_hat < 1:
            raise InvalidParameterError("q_hat must lie in (0, 1)", f"q_hat={self.q_hat}")
        if self.gamma_hat < 0:
            raise InvalidParameterError("gamma_hat must be non-negative")
        if self.kappa_hat < 0:
            raise InvalidParameterError("kappa_hat must be non-negative")

    def as_dict(self) -> dict:
        return {
            "level": self.j,
            "size": self.size,
            "q_hat": self.q_hat,
            "gamma_hat": self.gamma_hat,
            "kappa_fit": self.kappa_hat,
            "kappa_hat": self.map_kappa,
            "threshold": self.threshold if math.isfinite(self.threshold) else None,
            "profile_loglik": self.profile_loglik,
        }


@dataclass(frozen=True)
class DenoiseResult:
    """Wavelet estimate together with its thresholded coefficients and diagnostics."""
    f_hat: np.ndarray
    decomposition_hat: WaveletDecomposition
    level_fits: List[LevelFit] = field(default_factory=list)
    sigma_hat: float = 0.0
    surviving_fraction: float = 0.0
    estimator: str = ""

    def __post_init__(self):
        object.__setattr__(self, "f_hat", _frozen_array(self.f_hat))
        if not 0.0 <= self.surviving_fraction <= 1.0:
            raise InvalidParameterError("surviving_fraction must lie in [0, 1]")
