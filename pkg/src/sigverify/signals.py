"""Sampled pen trajectories and the nine analysis channels derived from them."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import BadWindow, LengthTooShort, NegativePressure, NonMonotonicTime, TooFewPoints

CHANNEL_NAMES = (
    "X",
    "Y",
    "PRESSURE",
    "AZIMUTH",
    "ALTITUDE",
    "DX",
    "DY",
    "DPRESSURE",
    "SPEED",
)
N_CHANNELS = len(CHANNEL_NAMES)
DEFAULT_RESAMPLE = 100
MIN_RESAMPLE = 8
ZSCORE_EPS = 1e-12


class Label(str, Enum):
    GENUINE = "genuine"
    FORGERY = "forgery"


@dataclass(frozen=True)
class SamplePoint:
    x: float
    y: float
    t: float
    pressure: float = 0.0
    azimuth: float = 0.0
    altitude: float = 0.0
    pen_down: bool = True


@dataclass(frozen=True)
class RawSignature:
    """One signing session: an ordered run of pen samples plus its label."""

    signer_id: str
    sample_index: int
    label: Label
    points: tuple
    source: str = "synthetic"

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "label", Label(self.label))

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(p, name) for p in self.points], dtype=np.float64)


def validate(sig: RawSignature) -> RawSignature:
    pts = sig.points
    if len(pts) < 2:
        raise TooFewPoints(f"signature has {len(pts)} point(s), need at least 2", index=len(pts))
    for i in range(1, len(pts)):
        if pts[i].t < pts[i - 1].t:
            raise NonMonotonicTime(
                f"timestamp decreases at index {i} ({pts[i - 1].t} -> {pts[i].t})", index=i
            )
    for i, p in enumerate(pts):
        if p.pressure < 0:
            raise NegativePressure(f"negative pressure {p.pressure} at index {i}", index=i)
    return sig


def resample(channel: Sequence[float], n: int) -> np.ndarray:
    """Linearly interpolate ``channel`` at ``n`` evenly spaced positions.

    The first and last samples are kept exactly.
    """
    channel = np.asarray(channel, dtype=np.float64)
    if channel.shape[0] < 2 or n < 2:
        raise LengthTooShort(f"resample needs >= 2 input samples and n >= 2 (got {channel.shape[0]}, {n})")
    src = np.arange(channel.shape[0], dtype=np.float64)
    dst = np.linspace(0.0, channel.shape[0] - 1.0, n)
    out = np.interp(dst, src, channel)
    out[0] = channel[0]
    out[-1] = channel[-1]
    return out


def normalize_z(channel: Sequence[float]) -> np.ndarray:
    # population std; flat channels map to zeros
    channel = np.asarray(channel, dtype=np.float64)
    centered = channel - channel.mean()
    centered -= centered.mean()  # second pass absorbs rounding from large offsets
    sigma = np.sqrt(np.mean(centered * centered))
    if sigma <= ZSCORE_EPS:
        return np.zeros_like(channel)
    return centered / sigma


def smooth(channel: Sequence[float], window: int) -> np.ndarray:
    """Centered moving average, edges padded by replicating the end samples."""
    channel = np.asarray(channel, dtype=np.float64)
    if window < 1 or window % 2 == 0 or window > channel.shape[0]:
        raise BadWindow(f"window must be odd and in [1, {channel.shape[0]}], got {window}")
    if window == 1:
        return channel.copy()
    half = window // 2
    padded = np.pad(channel, half, mode="edge")
    return np.convolve(padded, np.full(window, 1.0 / window), mode="valid")


@dataclass(frozen=True)
class ChannelSet:
    """Nine equal-length channels in :data:`CHANNEL_NAMES` order."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != N_CHANNELS:
            raise ValueError(f"ChannelSet needs shape (9, N), got {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[CHANNEL_NAMES.index(name)]

    @property
    def length(self) -> int:
        return self.data.shape[1]

    def normalized(self) -> "ChannelSet":
        return ChannelSet(np.stack([normalize_z(c) for c in self.data]))


def _forward_diff(v: np.ndarray) -> np.ndarray:
    d = np.empty_like(v)
    d[:-1] = np.diff(v)
    d[-1] = d[-2]
    return d


def raw_channels(sig: RawSignature) -> np.ndarray:
    """The nine channels at the signature's native sampling, shape (9, n_points)."""
    x = sig.column("x")
    y = sig.column("y")
    p = sig.column("pressure")
    dx = _forward_diff(x)
    dy = _forward_diff(y)
    dp = _forward_diff(p)
    speed = np.sqrt(dx * dx + dy * dy)
    return np.stack([x, y, p, sig.column("azimuth"), sig.column("altitude"), dx, dy, dp, speed])


def derive_channels(
    sig: RawSignature,
    n_resample: int = DEFAULT_RESAMPLE,
    *,
    normalize: bool = True,
    smooth_window: int | None = None,
) -> ChannelSet:
    """Validate, derive the nine channels, resample, optionally smooth, then z-score.

    With ``normalize=False`` the resampled (and smoothed) channels are
    returned in their original units; the statistical features use those.
    """
    validate(sig)
    if n_resample < MIN_RESAMPLE:
        raise LengthTooShort(f"n_resample must be >= {MIN_RESAMPLE}, got {n_resample}")
    rows = [resample(c, n_resample) for c in raw_channels(sig)]
    if smooth_window is not None and smooth_window > 1:
        rows = [smooth(r, smooth_window) for r in rows]
    cs = ChannelSet(np.stack(rows))
    return cs.normalized() if normalize else cs
