"""
Strong l_p-ball geometry and Monte Carlo risk of the MAP estimator.

Zones (alpha = exp(-9/2) unless a lower bound on gamma is known):
- dense-1:        eta^p > alpha, any p                  rate n sigma^2
- dense-2:        p >= 2, eta^p <= alpha                rate sigma^2 n eta^2
- sparse-3:       p < 2, n^-1 (2 log n)^(p/2) <= eta^p <= alpha
                                                        rate sigma^2 n eta^p (2 log eta^-p)^(1-p/2)
- supersparse-4:  p < 2, eta^p below that cutoff        rate sigma^2 n^(2/p) eta^2

Rates are order-of-magnitude expressions without constants. For the
sup-norm ball eta^2 plays the role of eta^p.
"""

import math
from typing import Optional

import numpy as np

from src.config.constants import ALPHA_DEFAULT
from src.schemas.balls import LpBallSpec, RiskEstimate, Zone
from src.schemas.estimation import PriorSpec
from src.services.errors import InvalidInputError, InvalidParameterError
from src.services.map_core import map_estimate
from src.services.testbed import replication_rng
from src.utils.logger import get_logger
from src.utils.parallel import ordered_map

log = get_logger(__name__)


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise InvalidParameterError("alpha must lie in (0, 1)", f"alpha={alpha}")


def _sparse_cutoff(ball: LpBallSpec) -> float:
    return (2.0 * math.log(ball.n)) ** (ball.p / 2.0) / ball.n


def zone_classify(ball: LpBallSpec, alpha: float = ALPHA_DEFAULT) -> Zone:
    """Assign exactly one risk zone to the ball."""
    _check_alpha(alpha)
    eta_p = ball.eta_p
    if eta_p > alpha:
        return Zone.DENSE_1
    if ball.p >= 2:
        return Zone.DENSE_2
    if eta_p >= _sparse_cutoff(ball):
        return Zone.SPARSE_3
    return Zone.SUPERSPARSE_4


def minimax_rate(ball: LpBallSpec, alpha: float = ALPHA_DEFAULT, zone: Optional[Zone] = None) -> float:
    """
    Order of the minimax risk over the ball.

    zone defaults to zone_classify(ball, alpha); passing it explicitly
    evaluates that case's expression regardless of where the ball falls.
    """
    zone = zone or zone_classify(ball, alpha)
    s2, n, p, eta = ball.sigma ** 2, ball.n, ball.p, ball.eta
    if zone is Zone.DENSE_1:
        return n * s2
    if zone is Zone.DENSE_2:
        return s2 * n * eta ** 2
    if math.isinf(p) or p >= 2:
        raise InvalidParameterError(f"Zone {zone.value} requires p < 2", f"p={p}")
    if zone is Zone.SPARSE_3:
        eta_p = ball.eta_p
        return s2 * n * eta_p * (2.0 * math.log(1.0 / eta_p)) ** (1.0 - p / 2.0)
    return s2 * n ** (2.0 / p) * eta ** 2


def least_favorable(ball: LpBallSpec, zone: Zone) -> np.ndarray:
    """
    Mean vector attaining (up to constants) the worst-case risk of its zone.

    - dense-1 / dense-2: constant vector mu_i = eta sigma.
    - sparse-3: floor(n eta^p / lambda^p) spikes of height lambda sigma with
      lambda = sqrt(2 log eta^-p), the largest count that stays in the ball.
    - supersparse-4: single spike of height C_n.
    """
    n, sigma = ball.n, ball.sigma
    if zone in (Zone.DENSE_1, Zone.DENSE_2):
        mu = np.full(n, ball.eta * sigma)
    elif zone is Zone.SUPERSPARSE_4:
        mu = np.zeros(n)
        mu[0] = ball.radius
    elif zone is Zone.SPARSE_3:
        if math.isinf(ball.p) or ball.p >= 2:
            raise InvalidParameterError("Sparse configuration requires p < 2", f"p={ball.p}")
        eta_p = ball.eta_p
        if eta_p >= 1:
            raise InvalidParameterError("Sparse configuration requires eta^p < 1", f"eta^p={eta_p}")
        lam = math.sqrt(2.0 * math.log(1.0 / eta_p))
        count = int(math.floor(n * eta_p / lam ** ball.p))
        if count < 1:
            log.warning(f"No full-height spike fits in the ball (n={n}, eta^p={eta_p:.4g}); using one shorter spike")
        count = min(max(count, 1), n)
        height = min(lam * sigma, ball.radius / count ** (1.0 / ball.p))
        mu = np.zeros(n)
        mu[:count] = height
    else:
        raise InvalidParameterError(f"Unsupported zone: {zone}")

    if not ball.contains(mu):
        raise InvalidInputError("Least favorable vector fell outside its ball")
    return mu


def _replication_loss(args) -> float:
    mu, sigma, prior, seed, r = args
    rng = replication_rng(seed, (r,))
    y = mu + sigma * rng.standard_normal(mu.size)
    estimate = map_estimate(y, sigma, prior)
    return float(np.sum((estimate.mu_hat - mu) ** 2))


def monte_carlo_risk(
    mu,
    sigma: float,
    prior: PriorSpec,
    reps: int,
    seed: int,
    workers: Optional[int] = 1,
) -> RiskEstimate:
    """
    Average ||mu_hat - mu||^2 over reps noise draws.

    Replication r draws from the stream (seed, r), so the estimate depends
    only on (mu, sigma, prior, reps, seed), never on scheduling.
    """
    if reps < 1:
        raise InvalidParameterError("reps must be >= 1", f"reps={reps}")
    mu = np.asarray(mu, dtype=float)
    if mu.size != prior.n:
        raise InvalidInputError("Mean vector and prior dimensions differ")
    losses = np.array(ordered_map(
        _replication_loss, [(mu, sigma, prior, seed, r) for r in range(reps)], workers
    ))
    std_error = float(losses.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return RiskEstimate(
        mean_sq_error=float(losses.mean()),
        std_error=std_error,
        replications=reps,
        seed=seed,
    )
