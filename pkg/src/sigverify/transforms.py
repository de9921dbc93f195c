"""Daubechies-4 wavelet transform, orthonormal DCT and the per-channel preprocessing modes.

Boundary convention: half-point symmetric extension by ``L - 1`` samples,
full filtering, then the odd-phase samples are kept.  A length-``n`` input
gives ``floor((n + L - 1) / 2)`` coefficients per band, so 100 samples
become 53 with the 8-tap db4 bank.
"""

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import comb

import numpy as np

from . import _kernels
from .errors import BadLength, EmptyInput, LengthMismatch, SignalTooShort, TooManyLevels


class Mode(str, Enum):
    DWT = "dwt"
    DCT = "dct"
    DWT_DCT = "dwt-dct"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        return cls(key)


@dataclass(frozen=True)
class WaveletFilterBank:
    name: str
    lo_d: np.ndarray
    hi_d: np.ndarray
    lo_r: np.ndarray
    hi_r: np.ndarray

    @property
    def length(self) -> int:
        return self.lo_d.shape[0]

    def check(self, atol: float = 1e-10) -> None:
        """Raise ``AssertionError`` if any orthogonal-bank invariant fails."""
        L = self.length
        lo, hi = self.lo_d, self.hi_d
        assert L % 2 == 0 and all(f.shape == (L,) for f in (hi, self.lo_r, self.hi_r))
        assert abs(lo.sum() - np.sqrt(2.0)) < atol, "lo_d must sum to sqrt(2)"
        assert abs(hi.sum()) < atol, "hi_d must sum to 0"
        signs = (-1.0) ** np.arange(L)
        assert np.allclose(hi, signs * lo[::-1], rtol=0, atol=atol), "QMF relation"
        assert np.array_equal(self.lo_r, lo[::-1]) and np.array_equal(self.hi_r, hi[::-1])
        for m in range(L // 2):
            expected = 1.0 if m == 0 else 0.0
            assert abs(np.dot(lo[: L - 2 * m], lo[2 * m:]) - expected) < atol, f"shift {m}"
            assert abs(np.dot(hi[: L - 2 * m], hi[2 * m:]) - expected) < atol, f"shift {m}"
            assert abs(np.dot(lo[: L - 2 * m], hi[2 * m:])) < atol
            assert abs(np.dot(hi[: L - 2 * m], lo[2 * m:])) < atol


def daubechies_scaling(order: int) -> np.ndarray:
    """Minimum-phase Daubechies scaling filter with ``order`` vanishing moments.

    Built by spectral factorization: the roots of the half-band polynomial
    inside the unit circle, times ``order`` zeros at z = -1, normalized to
    sum to sqrt(2).
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    # P(y) = sum_k C(order-1+k, k) y^k with y = -(z-1)^2 / (4z)
    poly_y = [comb(order - 1 + k, k) for k in range(order)]
    zeros = []
    for yr in np.roots(poly_y[::-1]):
        pair = np.roots([1.0, -(2.0 - 4.0 * yr), 1.0])
        zeros.append(pair[np.argmin(np.abs(pair))])
    zeros.extend([-1.0] * order)
    h = np.real(np.poly(np.array(zeros, dtype=complex)))
    return h * (np.sqrt(2.0) / h.sum())


@lru_cache(maxsize=None)
def make_daubechies(order: int) -> WaveletFilterBank:
    lo_d = daubechies_scaling(order)[::-1].copy()
    L = lo_d.shape[0]
    hi_d = ((-1.0) ** np.arange(L)) * lo_d[::-1]
    bank = WaveletFilterBank(f"db{order}", lo_d, hi_d, lo_d[::-1].copy(), hi_d[::-1].copy())
    for f in (bank.lo_d, bank.hi_d, bank.lo_r, bank.hi_r):
        f.setflags(write=False)
    bank.check()
    return bank


def make_db4() -> WaveletFilterBank:
    return make_daubechies(4)


def coeff_length(n: int, filter_length: int) -> int:
    return (n + filter_length - 1) // 2


def _symmetric_extend(x: np.ndarray, pad: int) -> np.ndarray:
    return np.pad(x, pad, mode="symmetric")


def dwt_single(signal, fb: WaveletFilterBank | None = None):
    """One analysis step: returns ``(approx, detail)``."""
    fb = fb or make_db4()
    x = np.asarray(signal, dtype=np.float64)
    L = fb.length
    if x.ndim != 1 or x.shape[0] < L:
        raise SignalTooShort(f"signal length {x.shape[0] if x.ndim == 1 else x.shape} < filter length {L}")
    ext = _symmetric_extend(x, L - 1)
    n_out = coeff_length(x.shape[0], L)
    return _kernels.analysis(ext, np.asarray(fb.lo_d), np.asarray(fb.hi_d), n_out)


def idwt_single(approx, detail, fb: WaveletFilterBank | None = None, original_length: int | None = None):
    fb = fb or make_db4()
    a = np.asarray(approx, dtype=np.float64)
    d = np.asarray(detail, dtype=np.float64)
    if a.shape != d.shape or a.ndim != 1:
        raise LengthMismatch(f"approx {a.shape} and detail {d.shape} differ")
    L = fb.length
    m = a.shape[0]
    if original_length is None:
        original_length = 2 * m - L + 2
    if coeff_length(original_length, L) != m or original_length < L:
        raise LengthMismatch(f"{m} coefficients cannot come from a length-{original_length} signal")
    return _kernels.synthesis(a, d, np.asarray(fb.lo_r), np.asarray(fb.hi_r), original_length)


@dataclass(frozen=True)
class WaveletCoeffs:
    approx: np.ndarray
    details: tuple  # finest level first
    lengths: tuple  # input length at each level, finest first

    @property
    def level(self) -> int:
        return len(self.details)

    @property
    def original_length(self) -> int:
        return self.lengths[0]


def wavedec(signal, fb: WaveletFilterBank | None = None, levels: int = 1) -> WaveletCoeffs:
    """Mallat pyramid: repeat :func:`dwt_single` on the approximation band."""
    fb = fb or make_db4()
    if levels < 1:
        raise TooManyLevels(f"levels must be >= 1, got {levels}")
    a = np.asarray(signal, dtype=np.float64)
    n, L = a.shape[0], fb.length
    for lev in range(levels):
        if n < fb.length:
            raise TooManyLevels(f"level {lev + 1} would see {n} samples, fewer than {L}")
        n = coeff_length(n, L)
    details, lengths = [], []
    for _ in range(levels):
        lengths.append(a.shape[0])
        a, d = dwt_single(a, fb)
        details.append(d)
    return WaveletCoeffs(a, tuple(details), tuple(lengths))


def waverec(coeffs: WaveletCoeffs, fb: WaveletFilterBank | None = None) -> np.ndarray:
    fb = fb or make_db4()
    a = coeffs.approx
    for d, n in zip(reversed(coeffs.details), reversed(coeffs.lengths)):
        a = idwt_single(a, d, fb, n)
    return a


@lru_cache(maxsize=32)
def _dct_matrix(n: int) -> np.ndarray:
    k = np.arange(n)[:, None]
    j = np.arange(n)[None, :]
    m = np.cos(np.pi * (2 * j + 1) * k / (2 * n))
    m[0] *= np.sqrt(1.0 / n)
    m[1:] *= np.sqrt(2.0 / n)
    m.setflags(write=False)
    return m


def dct(signal) -> np.ndarray:
    """Orthonormal DCT-II by direct evaluation."""
    x = np.asarray(signal, dtype=np.float64)
    if x.size == 0:
        raise EmptyInput("dct of an empty sequence")
    return _dct_matrix(x.shape[0]) @ x


def idct(coeffs) -> np.ndarray:
    """Inverse of :func:`dct` (orthonormal DCT-III)."""
    c = np.asarray(coeffs, dtype=np.float64)
    if c.size == 0:
        raise EmptyInput("idct of an empty sequence")
    return _dct_matrix(c.shape[0]).T @ c


def preprocess_channel(
    channel,
    mode=Mode.DWT_DCT,
    fb: WaveletFilterBank | None = None,
    expected_length: int = 100,
    levels: int = 1,
) -> np.ndarray:
    """Map one resampled channel to its coefficient block.

    Every mode returns the same number of values as the DWT approximation
    band, so feature dimensions do not depend on the mode.
    """
    fb = fb or make_db4()
    mode = Mode.parse(mode)
    x = np.asarray(channel, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != expected_length:
        raise BadLength(f"channel length {x.shape} != configured {expected_length}")
    if mode is Mode.DCT:
        n_out = expected_length
        for _ in range(levels):
            n_out = coeff_length(n_out, fb.length)
        return dct(x)[:n_out]
    approx = wavedec(x, fb, levels).approx
    if mode is Mode.DWT:
        return approx
    return dct(approx)
