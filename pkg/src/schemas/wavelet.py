"""
Wavelet filter and decomposition schemas.

Coefficient layout follows the usual convention where the scaling
coefficients at level j0 are indexed as level j0-1, so a decomposition of a
length-2^J signal holds 2^j0 scaling coefficients and 2^j detail
coefficients for each j0 <= j <= J-1.
"""

from dataclasses import dataclass
from typing import Iterator, List, Tuple

import numpy as np

from src.config.constants import FILTER_TOLERANCE
from src.services.errors import InvalidInputError


@dataclass(frozen=True)
class WaveletFilter:
    """
    Orthonormal two-channel filter pair.

    The highpass filter is derived from the lowpass taps by the quadrature
    mirror relation highpass[k] = (-1)^k lowpass[L-1-k].
    """
    name: str
    lowpass: np.ndarray

    def __post_init__(self):
        low = np.array(self.lowpass, dtype=float)
        low.setflags(write=False)
        if low.ndim != 1 or low.size < 2 or low.size % 2:
            raise InvalidInputError(f"Filter {self.name} must have an even number of taps")
        if abs(low.sum() - np.sqrt(2.0)) > FILTER_TOLERANCE:
            raise InvalidInputError(f"Filter {self.name} taps do not sum to sqrt(2)")
        if abs(np.dot(low, low) - 1.0) > FILTER_TOLERANCE:
            raise InvalidInputError(f"Filter {self.name} taps are not unit norm")
        object.__setattr__(self, "lowpass", low)

    @property
    def highpass(self) -> np.ndarray:
        signs = np.where(np.arange(self.length) % 2 == 0, 1.0, -1.0)
        return signs * self.lowpass[::-1]

    @property
    def length(self) -> int:
        return int(self.lowpass.size)


@dataclass(frozen=True)
class WaveletDecomposition:
    """
    Periodized orthonormal wavelet coefficients of a length-2^J signal.

    Attributes:
        j0: Primary resolution level.
        J: Finest level, n = 2^J.
        scaling: 2^j0 scaling coefficients (level j0-1).
        details: details[i] holds the 2^(j0+i) coefficients of level j0+i.
    """
    j0: int
    J: int
    scaling: np.ndarray
    details: Tuple[np.ndarray, ...]

    def __post_init__(self):
        scaling = np.array(self.scaling, dtype=float)
        details = tuple(np.array(d, dtype=float) for d in self.details)
        if scaling.shape != (2 ** self.j0,):
            raise InvalidInputError(
                "Scaling coefficients must have 2^j0 entries",
                f"j0={self.j0}, got {scaling.shape}",
            )
        if len(details) != self.J - self.j0:
            raise InvalidInputError(
                "Expected one detail vector per level j0..J-1",
                f"got {len(details)} for j0={self.j0}, J={self.J}",
            )
        for j, d in zip(self.levels, details):
            if d.shape != (2 ** j,):
                raise InvalidInputError(f"Level {j} must have {2 ** j} coefficients", f"got {d.shape}")
        for arr in (scaling,) + details:
            arr.setflags(write=False)
        object.__setattr__(self, "scaling", scaling)
        object.__setattr__(self, "details", details)

    @property
    def n(self) -> int:
        return 2 ** self.J

    @property
    def levels(self) -> List[int]:
        return list(range(self.j0, self.J))

    def level(self, j: int) -> np.ndarray:
        """Detail coefficients of level j."""
        if not self.j0 <= j < self.J:
            raise InvalidInputError(f"Level {j} outside [{self.j0}, {self.J})")
        return self.details[j - self.j0]

    def iter_levels(self) -> Iterator[Tuple[int, np.ndarray]]:
        return zip(self.levels, self.details)

    def pooled_details(self) -> np.ndarray:
        """All detail coefficients, coarsest level first (2^J - 2^j0 entries)."""
        if not self.details:
            return np.zeros(0)
        return np.concatenate(self.details)

    def with_details(self, details) -> "WaveletDecomposition":
        return WaveletDecomposition(self.j0, self.J, self.scaling, tuple(details))

    def with_pooled_details(self, pooled: np.ndarray) -> "WaveletDecomposition":
        """Scatter a pooled detail vector back into per-level vectors."""
        pooled = np.asarray(pooled, dtype=float)
        if pooled.size != self.n - 2 ** self.j0:
            raise InvalidInputError("Pooled vector has the wrong length")
        if not self.details:
            return self
        splits = np.cumsum([2 ** j for j in self.levels])[:-1]
        return self.with_details(np.split(pooled, splits))

    def energy(self) -> float:
        return float(np.dot(self.scaling, self.scaling) + sum(np.dot(d, d) for d in self.details))

    def count_nonzero_details(self) -> int:
        return int(sum(np.count_nonzero(d) for d in self.details))
