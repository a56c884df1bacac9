"""
MAP testimation for the Gaussian sequence model y_i = mu_i + sigma z_i.

The posterior mode over indicator vectors reduces to choosing how many of the
largest |y_i| to keep: minimize

    sum_{i > kappa} y_(i)^2 + P(kappa)

over kappa = 0..n, where P is the complexity penalty induced by the prior on
kappa and the variance ratio gamma. The result is a hard-threshold estimator.

Usage:
    from src.services.map_core import trunc_geom_prior, map_estimate

    prior = trunc_geom_prior(n=1024, q=0.5, gamma=3.0)
    estimate = map_estimate(y, sigma=1.0, prior=prior)
"""

import math
from typing import Optional

import numpy as np
from scipy.special import gammaln, logsumexp

from src.config.constants import ALPHA_DEFAULT
from src.schemas.estimation import (
    BinomialBounds,
    BinomialSweepReport,
    MapEstimate,
    NoisySequence,
    PriorConditionReport,
    PriorSpec,
)
from src.services.errors import InvalidInputError, InvalidParameterError
from src.utils.logger import get_logger

log = get_logger(__name__)


def log_binom(n, kappa):
    """log C(n, kappa) via log-gamma; vectorized over kappa."""
    kappa = np.asarray(kappa, dtype=float)
    return gammaln(n + 1.0) - gammaln(kappa + 1.0) - gammaln(n - kappa + 1.0)


# =============================================================================
# Priors
# =============================================================================

def trunc_geom_prior(n: int, q: float, gamma: float) -> PriorSpec:
    """
    Truncated geometric prior TrGeom(1-q): pi(kappa) ∝ q^kappa, kappa = 0..n.
    """
    if n < 1:
        raise InvalidParameterError("n must be >= 1", f"n={n}")
    if not 0 < q < 1:
        raise InvalidParameterError("q must lie in (0, 1)", f"q={q}")
    kappa = np.arange(n + 1)
    log_pi = kappa * math.log(q) + math.log1p(-q) - math.log1p(-q ** (n + 1))
    return PriorSpec(n=n, log_pi=log_pi, gamma=gamma)


def binomial_prior(n: int, p: float, gamma: float) -> PriorSpec:
    """Prior on kappa induced by independent Bernoulli(p) indicators."""
    if n < 1:
        raise InvalidParameterError("n must be >= 1", f"n={n}")
    if not 0 < p < 1:
        raise InvalidParameterError("p must lie in (0, 1)", f"p={p}")
    kappa = np.arange(n + 1)
    log_pi = log_binom(n, kappa) + kappa * math.log(p) + (n - kappa) * math.log1p(-p)
    return prior_from_log_weights(log_pi, gamma)


def prior_from_log_weights(log_weights, gamma: float) -> PriorSpec:
    """Normalize arbitrary finite log weights into a prior on kappa = 0..n."""
    log_weights = np.asarray(log_weights, dtype=float)
    if log_weights.ndim != 1 or log_weights.size < 2:
        raise InvalidInputError("Need at least two log weights (kappa = 0..n, n >= 1)")
    if not np.all(np.isfinite(log_weights)):
        raise InvalidInputError("Log weights must be finite")
    log_pi = log_weights - logsumexp(log_weights)
    return PriorSpec(n=log_weights.size - 1, log_pi=log_pi, gamma=gamma)


# =============================================================================
# Bayes factor and penalty
# =============================================================================

def bayes_factor(y_i: float, sigma: float, gamma: float) -> float:
    """
    Bayes factor of H0: mu_i = 0 against the N(0, gamma sigma^2) alternative.

    sqrt(1+gamma) exp{-y_i^2 / (2 sigma^2 (1 + 1/gamma))}; small values favor keeping y_i.
    """
    if sigma <= 0 or gamma <= 0:
        raise InvalidParameterError("sigma and gamma must be positive")
    return math.sqrt(1.0 + gamma) * math.exp(-y_i ** 2 / (2.0 * sigma ** 2 * (1.0 + 1.0 / gamma)))


def log_bayes_factor(y, sigma: float, gamma: float):
    """Vectorized log of bayes_factor."""
    y = np.asarray(y, dtype=float)
    return 0.5 * math.log1p(gamma) - y ** 2 / (2.0 * sigma ** 2 * (1.0 + 1.0 / gamma))


def _penalty_vector(prior: PriorSpec, sigma: float) -> np.ndarray:
    kappa = np.arange(prior.n + 1)
    scale = 2.0 * sigma ** 2 * (1.0 + 1.0 / prior.gamma)
    return scale * (log_binom(prior.n, kappa) - prior.log_pi + 0.5 * kappa * math.log1p(prior.gamma))


def complexity_penalty(kappa: int, prior: PriorSpec, sigma: float) -> float:
    """
    P(kappa) = 2 sigma^2 (1 + 1/gamma) [log C(n,kappa) - log pi(kappa) + (kappa/2) log(1+gamma)].
    """
    if not 0 <= kappa <= prior.n:
        raise IndexError(f"kappa={kappa} outside [0, {prior.n}]")
    scale = 2.0 * sigma ** 2 * (1.0 + 1.0 / prior.gamma)
    return float(scale * (
        log_binom(prior.n, kappa) - prior.log_pi[kappa] + 0.5 * kappa * math.log1p(prior.gamma)
    ))


# =============================================================================
# Selection
# =============================================================================

def select_kappa(seq: NoisySequence, prior: PriorSpec) -> MapEstimate:
    """
    Choose kappa minimizing residual-plus-penalty and hard-threshold y.

    Observations are ranked by |y| descending with ties broken by index;
    among exactly tied objectives the smallest kappa wins.
    """
    if seq.n != prior.n:
        raise InvalidInputError(
            "Sequence and prior dimensions differ", f"len(y)={seq.n}, prior.n={prior.n}"
        )
    y = seq.y
    order = np.argsort(-np.abs(y), kind="stable")
    sorted_sq = y[order] ** 2

    # suffix[k] = sum of squares beyond the k largest
    suffix = np.zeros(seq.n + 1)
    suffix[:-1] = np.cumsum(sorted_sq[::-1])[::-1]

    objective = suffix + _penalty_vector(prior, seq.sigma)
    kappa_hat = int(np.argmin(objective))

    mu_hat = np.zeros_like(y)
    kept = order[:kappa_hat]
    mu_hat[kept] = y[kept]
    threshold = float(abs(y[order[kappa_hat - 1]])) if kappa_hat > 0 else math.inf

    return MapEstimate(kappa_hat=kappa_hat, threshold=threshold, mu_hat=mu_hat, objective=objective)


def map_estimate(y, sigma: float, prior: PriorSpec) -> MapEstimate:
    """Convenience wrapper around select_kappa for raw arrays."""
    return select_kappa(NoisySequence(y=y, sigma=sigma), prior)


def posterior_log_score(x, seq: NoisySequence, prior: PriorSpec) -> float:
    """
    Unnormalized log posterior of an indicator vector x.

    -log C(n,kappa) + log pi(kappa) - sum_{x_i = 1} log B_i with kappa = sum(x).
    """
    x = np.asarray(x)
    if x.shape != (seq.n,):
        raise InvalidInputError("Indicator vector has the wrong length")
    if not np.all((x == 0) | (x == 1)):
        raise InvalidInputError("Indicator vector must be binary")
    selected = x.astype(bool)
    kappa = int(selected.sum())
    return float(
        -log_binom(prior.n, kappa)
        + prior.log_pi[kappa]
        - np.sum(log_bayes_factor(seq.y[selected], seq.sigma, prior.gamma))
    )


# =============================================================================
# Binomial coefficient bounds
# =============================================================================

def log_binom_bounds(n: int, kappa: int) -> BinomialBounds:
    """
    kappa log(n/kappa) <= log C(n,kappa) < kappa log(ne/kappa), 1 <= kappa <= n-1.

    When kappa <= n/e the sharper bound log C(n,kappa) < 2 kappa log(n/kappa) also holds.
    """
    if n < 2:
        raise InvalidInputError("n must be >= 2", f"n={n}")
    if not 1 <= kappa <= n - 1:
        raise InvalidInputError("kappa must lie in [1, n-1]", f"n={n}, kappa={kappa}")
    lower = kappa * math.log(n / kappa)
    return BinomialBounds(lower=lower, upper=lower + kappa, exact=float(log_binom(n, kappa)))


def sweep_binomial_bounds(n_max: int) -> BinomialSweepReport:
    """Check both bounds and the kappa <= n/e refinement for every 2 <= n <= n_max."""
    if n_max < 2:
        raise InvalidParameterError("n_max must be >= 2")
    lower_slack = upper_slack = refined_slack = math.inf
    pairs = 0
    for n in range(2, n_max + 1):
        kappa = np.arange(1, n)
        exact = log_binom(n, kappa)
        lower = kappa * np.log(n / kappa)
        lower_slack = min(lower_slack, float(np.min(exact - lower)))
        upper_slack = min(upper_slack, float(np.min(lower + kappa - exact)))
        small = kappa <= n / math.e
        if np.any(small):
            refined_slack = min(refined_slack, float(np.min(2.0 * lower[small] - exact[small])))
        pairs += kappa.size
    return BinomialSweepReport(
        n_max=n_max,
        pairs_checked=pairs,
        lower_slack=lower_slack,
        upper_slack=upper_slack,
        refined_slack=refined_slack,
    )


# =============================================================================
# Prior conditions for adaptive minimaxity
# =============================================================================

def alpha_for_gamma(gamma_minus: Optional[float] = None) -> float:
    """exp(-9/2), or exp{-8 (gamma_- + 3/4)^2} when a lower bound on gamma is known."""
    if gamma_minus is None:
        return ALPHA_DEFAULT
    if gamma_minus <= 0:
        raise InvalidParameterError("gamma_minus must be positive")
    return math.exp(-8.0 * (gamma_minus + 0.75) ** 2)


def check_prior_conditions(
    prior: PriorSpec,
    beta: float,
    c0: float,
    c1: float,
    c2: float,
    alpha: float = ALPHA_DEFAULT,
) -> PriorConditionReport:
    """
    Evaluate, in log domain:
        1. pi(0) >= n^{-c1 n^{-beta}}
        2. pi(kappa) >= (kappa/n)^{c2 kappa} for kappa = 1..floor(alpha n)
        3. pi(n) >= e^{-c0 n}
    """
    if beta < 0 or min(c0, c1, c2) <= 0:
        raise InvalidParameterError("Constants must be positive and beta non-negative")
    if not 0 < alpha < 1:
        raise InvalidParameterError("alpha must lie in (0, 1)", f"alpha={alpha}")
    n = prior.n
    log_pi = prior.log_pi

    zero_mass = log_pi[0] >= -c1 * n ** (-beta) * math.log(n)

    upper = int(math.floor(alpha * n))
    if upper >= 1:
        kappa = np.arange(1, upper + 1)
        sparse_mass = bool(np.all(log_pi[kappa] >= c2 * kappa * np.log(kappa / n)))
    else:
        sparse_mass = True

    full_mass = log_pi[n] >= -c0 * n

    report = PriorConditionReport(
        zero_mass=bool(zero_mass), sparse_mass=sparse_mass, full_mass=bool(full_mass)
    )
    log.debug(f"Prior conditions n={n}: {report}")
    return report
