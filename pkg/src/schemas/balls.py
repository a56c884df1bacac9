"""
Schemas for strong l_p-ball experiments.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.services.errors import InvalidParameterError


class Zone(Enum):
    """
    Risk zones of the MAP estimator over l_p-balls.

    DENSE_1 applies to every p, DENSE_2 to p >= 2, SPARSE_3 and
    SUPERSPARSE_4 to p < 2.
    """
    DENSE_1 = "dense-1"
    DENSE_2 = "dense-2"
    SPARSE_3 = "sparse-3"
    SUPERSPARSE_4 = "supersparse-4"


def lp_norm(mu, p: float) -> float:
    """||mu||_p for 0 < p <= inf (a quasi-norm for p < 1)."""
    mu = np.abs(np.asarray(mu, dtype=float))
    if mu.size == 0:
        return 0.0
    if math.isinf(p):
        return float(mu.max())
    scale = mu.max()
    if scale == 0:
        return 0.0
    return float(scale * np.sum((mu / scale) ** p) ** (1.0 / p))


@dataclass(frozen=True)
class LpBallSpec:
    """
    Strong l_p-ball {mu : ||mu||_p <= C_n} with C_n = n^(1/p) sigma eta.

    Attributes:
        p: Exponent in (0, inf]; use math.inf for the sup-norm ball.
        eta: Normalized radius.
        n: Dimension.
        sigma: Noise level.
    """
    p: float
    eta: float
    n: int
    sigma: float = 1.0

    def __post_init__(self):
        if not self.p > 0:
            raise InvalidParameterError("p must be positive", f"p={self.p}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise InvalidParameterError("eta must be positive and finite", f"eta={self.eta}")
        if self.n < 1:
            raise InvalidParameterError("n must be >= 1", f"n={self.n}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InvalidParameterError("sigma must be positive", f"sigma={self.sigma}")
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise InvalidParameterError("Ball radius is not finite and positive")

    @classmethod
    def from_eta_p(cls, p: float, eta_p: float, n: int, sigma: float = 1.0) -> "LpBallSpec":
        """Build a ball from eta^p, the form used by the zone boundaries."""
        return cls(p=p, eta=eta_p ** (1.0 / p), n=n, sigma=sigma)

    @property
    def radius(self) -> float:
        if math.isinf(self.p):
            return self.sigma * self.eta
        return self.n ** (1.0 / self.p) * self.sigma * self.eta

    @property
    def eta_p(self) -> float:
        """eta^p; for the sup-norm ball eta^2 is used (see zone_classify)."""
        if math.isinf(self.p):
            return self.eta ** 2
        return self.eta ** self.p

    def contains(self, mu, rtol: float = 1e-12) -> bool:
        mu = np.asarray(mu, dtype=float)
        if mu.shape != (self.n,):
            return False
        return lp_norm(mu, self.p) <= self.radius * (1.0 + rtol)


@dataclass(frozen=True)
class RiskEstimate:
    """Monte Carlo estimate of E||mu_hat - mu||^2."""
    mean_sq_error: float
    std_error: float
    replications: int
    seed: int

    def __post_init__(self):
        if self.std_error < 0:
            raise InvalidParameterError("std_error must be non-negative")
        if self.replications < 1:
            raise InvalidParameterError("replications must be >= 1")
