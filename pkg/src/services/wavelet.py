"""
Periodized orthonormal discrete wavelet transform.

Filter taps come from the published tables shipped with PyWavelets and are
re-validated against the orthonormality moment identities when a filter is
built. The transform itself is PyWavelets' periodization mode, which for a
length-2^J input yields exactly 2^j coefficients per level and a unitary
analysis operator, so white noise of level sigma stays white with level sigma
in the coefficient domain.
"""

import math
import warnings
from functools import lru_cache

import numpy as np
import pywt

from src.config.constants import DEFAULT_J0, SUPPORTED_FILTERS
from src.schemas.wavelet import WaveletDecomposition, WaveletFilter
from src.services.errors import InvalidInputError, InvalidParameterError, UnsupportedFilterError

_MODE = "periodization"


@lru_cache(maxsize=None)
def filter_bank(name: str) -> WaveletFilter:
    """Return the orthonormal filter pair for haar, db2..db10 or coif1..coif5."""
    key = name.lower()
    if key not in SUPPORTED_FILTERS:
        raise UnsupportedFilterError(name)
    wavelet = pywt.Wavelet(key)
    return WaveletFilter(name=key, lowpass=np.asarray(wavelet.rec_lo, dtype=float))


def dyadic_level(length: int) -> int:
    """J such that length == 2^J, or InvalidInputError."""
    if length < 1 or length & (length - 1):
        raise InvalidInputError("Signal length must be a power of two", f"length={length}")
    return int(math.log2(length))


def _as_filter(wavelet) -> WaveletFilter:
    return wavelet if isinstance(wavelet, WaveletFilter) else filter_bank(wavelet)


def dwt_forward(signal, wavelet="coif3", j0: int = DEFAULT_J0) -> WaveletDecomposition:
    """
    Cascade the analysis filters from level J-1 down to j0.

    Raises:
        InvalidInputError: length is not a power of two.
        InvalidParameterError: j0 < 1 or j0 >= J.
    """
    x = np.array(signal, dtype=float)
    if x.ndim != 1:
        raise InvalidInputError("Signal must be one-dimensional")
    J = dyadic_level(x.size)
    if j0 < 1 or j0 >= J:
        raise InvalidParameterError(
            "Primary level must satisfy 1 <= j0 < J", f"j0={j0}, J={J}"
        )
    filt = _as_filter(wavelet)
    with warnings.catch_warnings():
        # Coarse levels shorter than the filter are still exact under periodization
        warnings.simplefilter("ignore", UserWarning)
        coeffs = pywt.wavedec(x, filt.name, mode=_MODE, level=J - j0)
    return WaveletDecomposition(j0=j0, J=J, scaling=coeffs[0], details=tuple(coeffs[1:]))


def dwt_inverse(decomp: WaveletDecomposition, wavelet="coif3") -> np.ndarray:
    """Synthesis cascade; the exact inverse of dwt_forward up to rounding."""
    if not isinstance(decomp, WaveletDecomposition):
        raise InvalidInputError("Expected a WaveletDecomposition")
    filt = _as_filter(wavelet)
    coeffs = [np.array(decomp.scaling)] + [np.array(d) for d in decomp.details]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        signal = pywt.waverec(coeffs, filt.name, mode=_MODE)
    if signal.size != decomp.n:
        raise InvalidInputError("Reconstruction length mismatch", f"{signal.size} != {decomp.n}")
    return signal


def zero_decomposition(J: int, j0: int = DEFAULT_J0) -> WaveletDecomposition:
    """All-zero coefficients with the layout of a length-2^J signal."""
    return WaveletDecomposition(
        j0=j0,
        J=J,
        scaling=np.zeros(2 ** j0),
        details=tuple(np.zeros(2 ** j) for j in range(j0, J)),
    )
