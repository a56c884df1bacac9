"""
Simulation and rate experiments.

SimulationService.run reproduces the benchmark protocol: for every signal and
RSNR level, `replications` noisy samples are drawn and every configured
estimator is applied to the same sample. Replication r of cell (s, l) uses
the random stream (seed, s, l, r), so adding or reordering estimators never
changes the noise seen by the others.

Rate experiments fit the least-squares slope of log risk against log n.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config.constants import RATE_MIN_GRID
from src.schemas.balls import LpBallSpec, Zone
from src.schemas.experiment import ExperimentConfig, ExperimentReport, RateRow, ReportRow
from src.services.balls import least_favorable, minimax_rate, monte_carlo_risk, zone_classify
from src.services.errors import InvalidParameterError
from src.services.estimators import get_estimator, weighted_level_risk
from src.services.map_core import trunc_geom_prior
from src.services.testbed import add_noise, make_signal, mse
from src.services.wavelet import dwt_forward, dyadic_level
from src.utils.logger import get_logger
from src.utils.parallel import ordered_map

log = get_logger(__name__)


def fit_log_slope(n_values: Sequence[int], risks: Sequence[float]) -> float:
    """Least-squares slope of log(risk) against log(n); NaN if any risk is non-positive."""
    risks = np.asarray(risks, dtype=float)
    if np.any(risks <= 0) or len(n_values) < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(np.asarray(n_values, dtype=float)), np.log(risks), 1)
    return float(slope)


def check_grid(n_grid: Sequence[int]) -> List[int]:
    """Rate grids need at least three distinct powers of two."""
    grid = sorted(set(int(n) for n in n_grid))
    if len(grid) < RATE_MIN_GRID:
        raise InvalidParameterError(f"Rate grid needs at least {RATE_MIN_GRID} sizes", f"got {grid}")
    for n in grid:
        dyadic_level(n)
    return grid


# =============================================================================
# Simulation grid
# =============================================================================

@dataclass(frozen=True)
class _ReplicationJob:
    signal: str
    n: int
    rsnr: float
    seed: int
    key: Tuple[int, int, int]
    filter: str
    j0: int
    estimators: Tuple[str, ...]


def _run_replication(job: _ReplicationJob) -> List[Tuple[float, float]]:
    """(mse, surviving fraction) for every estimator on one noisy sample."""
    clean = make_signal(job.signal, job.n)
    obs = add_noise(clean, job.rsnr, job.seed, job.key)
    outcomes = []
    for name in job.estimators:
        result = get_estimator(name)(obs.y, job.filter, job.j0)
        outcomes.append((mse(result.f_hat, clean.samples), result.surviving_fraction))
    return outcomes


def relative_medians(medians: Sequence[float]) -> List[float]:
    """min(median)/median within a group; exact 1.0 for the minimum's owner(s)."""
    best = min(medians)
    relative = []
    for m in medians:
        if m == best:
            relative.append(1.0)
        else:
            relative.append(best / m)
    return relative


class SimulationService:
    """
    Runs the signal x RSNR x estimator grid and aggregates it into an ExperimentReport.
    """

    def __init__(self, workers: Optional[int] = 1):
        self.workers = workers

    def run(self, config: ExperimentConfig) -> ExperimentReport:
        jobs = [
            _ReplicationJob(
                signal=signal,
                n=config.n,
                rsnr=rsnr,
                seed=config.seed,
                key=(s, l, r),
                filter=config.filter,
                j0=config.j0,
                estimators=tuple(config.estimators),
            )
            for s, signal in enumerate(config.signals)
            for l, rsnr in enumerate(config.rsnr_levels)
            for r in range(config.replications)
        ]
        workers = config.workers if config.workers is not None else self.workers
        log.info(
            f"Simulating {len(config.signals)} signal(s) x {len(config.rsnr_levels)} RSNR level(s) "
            f"x {config.replications} replication(s), estimators={config.estimators}"
        )
        outcomes = ordered_map(_run_replication, jobs, workers)

        cells: Dict[Tuple[int, int], List[List[Tuple[float, float]]]] = {}
        for job, outcome in zip(jobs, outcomes):
            cells.setdefault(job.key[:2], []).append(outcome)

        rows: List[ReportRow] = []
        for s, signal in enumerate(config.signals):
            for l, rsnr in enumerate(config.rsnr_levels):
                reps = cells[(s, l)]
                medians, surviving = [], []
                for e in range(len(config.estimators)):
                    errors = np.sort([rep[e][0] for rep in reps])
                    fractions = np.sort([rep[e][1] for rep in reps])
                    medians.append(float(np.median(errors)))
                    surviving.append(100.0 * float(np.mean(fractions)))
                for name, median, relative, pct in zip(
                    config.estimators, medians, relative_medians(medians), surviving
                ):
                    rows.append(ReportRow(
                        signal=signal,
                        rsnr=rsnr,
                        estimator=name,
                        median_mse=median,
                        relative_median_mse=relative,
                        mean_surviving_pct=pct,
                        replications=config.replications,
                        seed=config.seed,
                    ))
        log.info(f"Simulation finished: {len(rows)} rows")
        return ExperimentReport(rows=rows)


# =============================================================================
# Rate experiments
# =============================================================================

@dataclass(frozen=True)
class _RateJob:
    signal: str
    n: int
    rsnr: float
    seed: int
    key: Tuple[int, int]
    filter: str
    j0: int
    estimators: Tuple[str, ...]
    orders: Tuple[float, ...]


def _run_rate_replication(job: _RateJob) -> List[List[float]]:
    """risk[e][k] = weighted coefficient risk / n for estimator e and derivative order k."""
    clean = make_signal(job.signal, job.n)
    obs = add_noise(clean, job.rsnr, job.seed, job.key)
    truth = dwt_forward(clean.samples, job.filter, job.j0)
    risks = []
    for name in job.estimators:
        result = get_estimator(name)(obs.y, job.filter, job.j0)
        risks.append([
            weighted_level_risk(result.decomposition_hat, truth, m) / job.n for m in job.orders
        ])
    return risks


def function_rates(
    signal: str,
    n_grid: Sequence[int],
    orders: Sequence[float] = (0.0,),
    estimators: Sequence[str] = ("map-levelwise",),
    rsnr: float = 5.0,
    replications: int = 50,
    seed: int = 0,
    wavelet: str = "coif3",
    j0: int = 4,
    workers: Optional[int] = 1,
) -> List[RateRow]:
    """
    Median risk of each estimator over an n-grid, with fitted log-log slopes.

    Risk for derivative order m is sum_j 2^{2mj} ||theta_hat_j - theta_j||^2 / n,
    which equals the MSE at m = 0.
    """
    grid = check_grid(n_grid)
    for n in grid:
        if 2 ** j0 >= n:
            raise InvalidParameterError(f"Grid size {n} too small for j0={j0}")
    if any(m < 0 for m in orders):
        raise InvalidParameterError("Derivative orders must be non-negative")
    jobs = [
        _RateJob(signal, n, rsnr, seed, (i, r), wavelet, j0, tuple(estimators), tuple(orders))
        for i, n in enumerate(grid)
        for r in range(replications)
    ]
    log.info(f"Rate experiment on {signal}: grid={grid}, reps={replications}, m={list(orders)}")
    outcomes = ordered_map(_run_rate_replication, jobs, workers)

    medians = np.zeros((len(estimators), len(orders), len(grid)))
    for i in range(len(grid)):
        block = np.array(outcomes[i * replications:(i + 1) * replications])  # reps x est x orders
        medians[:, :, i] = np.median(block, axis=0)

    rows = []
    for e, name in enumerate(estimators):
        for k, m in enumerate(orders):
            slope = fit_log_slope(grid, medians[e, k])
            for i, n in enumerate(grid):
                rows.append(RateRow(
                    mode="function",
                    series=name,
                    m=float(m),
                    n=n,
                    risk=float(medians[e, k, i]),
                    reference_rate=None,
                    slope=slope,
                    replications=replications,
                    seed=seed,
                ))
    return rows


def ball_rates(
    p: float,
    n_grid: Sequence[int],
    eta_p_scale: float = 64.0,
    zone: Optional[Zone] = None,
    q: float = 0.5,
    gamma: float = 3.0,
    replications: int = 200,
    seed: int = 0,
    workers: Optional[int] = 1,
) -> List[RateRow]:
    """
    Monte Carlo risk at the least favorable configuration of l_p[eta_n] with
    eta_n^p = eta_p_scale / n, against the zone's minimax rate.
    """
    grid = check_grid(n_grid)
    results = []
    for n in grid:
        ball = LpBallSpec.from_eta_p(p, eta_p_scale / n, n)
        ball_zone = zone or zone_classify(ball)
        mu = least_favorable(ball, ball_zone)
        prior = trunc_geom_prior(n, q, gamma)
        risk = monte_carlo_risk(mu, ball.sigma, prior, replications, seed, workers)
        reference = minimax_rate(ball, zone=ball_zone)
        log.info(f"n={n} zone={ball_zone.value} risk={risk.mean_sq_error:.4g} rate={reference:.4g}")
        results.append((n, ball_zone, risk.mean_sq_error, reference))

    slope = fit_log_slope([r[0] for r in results], [r[2] for r in results])
    return [
        RateRow(
            mode="ball",
            series=z.value,
            m=0.0,
            n=n,
            risk=value,
            reference_rate=reference,
            slope=slope,
            replications=replications,
            seed=seed,
        )
        for n, z, value, reference in results
    ]
