"""
Standard test signals, RSNR-calibrated noise and goodness-of-fit metrics.

Signals are sampled on t_i = i/n, i = 1..n. Besides Wave and Peak the
library carries the four classic Donoho-Johnstone functions (Blocks, Bumps,
HeaviSine, Doppler) in their usual unscaled form; scaling is irrelevant here
because noise is calibrated by the root signal-to-noise ratio.
"""

from pathlib import Path
from typing import Callable, Dict, Sequence, Union

import numpy as np
import pandas as pd

from src.schemas.experiment import NoisyObservation, TestSignal
from src.services.errors import InvalidInputError, InvalidParameterError, UnsupportedSignalError
from src.services.wavelet import dyadic_level
from src.utils.logger import get_logger

log = get_logger(__name__)

_BLOCK_POSITIONS = np.array([0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81])
_BLOCK_HEIGHTS = np.array([4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2])
_BUMP_HEIGHTS = np.array([4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2])
_BUMP_WIDTHS = np.array([0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005])
_DOPPLER_EPS = 0.05


def _wave(t):
    return 0.5 + 0.2 * np.cos(4 * np.pi * t) + 0.1 * np.cos(24 * np.pi * t)


def _peak(t):
    return np.exp(-np.abs(t - 0.5))


def _blocks(t):
    steps = (1.0 + np.sign(t[:, None] - _BLOCK_POSITIONS)) / 2.0
    return steps @ _BLOCK_HEIGHTS


def _bumps(t):
    kernel = (1.0 + np.abs((t[:, None] - _BLOCK_POSITIONS) / _BUMP_WIDTHS)) ** -4
    return kernel @ _BUMP_HEIGHTS


def _heavisine(t):
    return 4.0 * np.sin(4 * np.pi * t) - np.sign(t - 0.3) - np.sign(0.72 - t)


def _doppler(t):
    return np.sqrt(t * (1.0 - t)) * np.sin(2 * np.pi * (1.0 + _DOPPLER_EPS) / (t + _DOPPLER_EPS))


SIGNALS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "wave": _wave,
    "peak": _peak,
    "bumps": _bumps,
    "blocks": _blocks,
    "doppler": _doppler,
    "heavisine": _heavisine,
}


def evaluate_signal(name: str, t: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
    """Evaluate a named test function at arbitrary points of [0, 1]."""
    fn = SIGNALS.get(name.lower())
    if fn is None:
        raise UnsupportedSignalError(name)
    return fn(np.atleast_1d(np.asarray(t, dtype=float)))


def make_signal(name: str, n: int) -> TestSignal:
    """Sample a named test function on t_i = i/n, i = 1..n (n a power of two)."""
    dyadic_level(n)
    grid = np.arange(1, n + 1) / n
    return TestSignal(name=name.lower(), samples=evaluate_signal(name, grid))


def replication_rng(seed: int, key: Sequence[int] = ()) -> np.random.Generator:
    """Independent stream for (seed, key); identical inputs give identical draws."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def add_noise(signal: TestSignal, rsnr: float, seed: int, stream_key: Sequence[int] = ()) -> NoisyObservation:
    """y = f + sigma z with sigma = population sd(f) / rsnr."""
    if not rsnr > 0:
        raise InvalidParameterError("rsnr must be positive", f"rsnr={rsnr}")
    sigma = float(np.std(signal.samples)) / rsnr
    z = replication_rng(seed, stream_key).standard_normal(signal.n)
    return NoisyObservation(
        clean=signal,
        y=signal.samples + sigma * z,
        sigma=sigma,
        rsnr=float(rsnr),
        seed=seed,
        stream_key=tuple(stream_key),
    )


def mse(f_hat, f) -> float:
    """(1/n) sum (f_hat_i - f_i)^2."""
    f_hat = np.asarray(f_hat, dtype=float)
    f = np.asarray(f, dtype=float)
    if f_hat.shape != f.shape:
        raise InvalidInputError("Length mismatch", f"{f_hat.shape} vs {f.shape}")
    return float(np.mean((f_hat - f) ** 2))


def write_signal_csv(signal: TestSignal, path: Union[str, Path]) -> Path:
    """Export a sampled signal as two columns t,f."""
    path = Path(path)
    frame = pd.DataFrame({"t": signal.grid, "f": signal.samples})
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    log.info(f"Wrote signal {signal.name} (n={signal.n}) to {path}")
    return path
