"""Delay statistics of a binned received signal.

Both the mean delay and the RMS delay spread weight each bin by the square
of its value::

    mu = sum(t_i * P_i**2) / sum(P_i**2)
    D  = sqrt(sum((t_i - mu)**2 * P_i**2) / sum(P_i**2))

``t_i`` is the bin start time.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .channel import ImpulseResponse
from .errors import InvalidArgumentError, NoSignalError


@dataclass(frozen=True)
class DelayStats:
    mean_delay: float
    rms_spread: float
    total: float
    peak: float
    peak_time: float

    def to_dict(self) -> dict:
        return asdict(self)


def _moments(s: ImpulseResponse) -> tuple[float, float]:
    """Mean and spread in bins, the mean relative to ``start_bin``.

    Weights are normalised by the peak so that equal-valued bins weigh
    exactly 1.0, which keeps symmetric cases exact in floating point.
    """
    if s.is_zero:
        raise NoSignalError("delay statistics are undefined for an all-zero signal")
    w = (s.gains / s.gains.max()) ** 2
    idx = np.arange(w.size, dtype=float)
    wsum = w.sum()
    mu = float((idx * w).sum() / wsum)
    var = float((((idx - mu) ** 2) * w).sum() / wsum)
    return mu, math.sqrt(var)


def mean_delay(s: ImpulseResponse) -> float:
    mu, _ = _moments(s)
    return (s.start_bin + mu) * s.bin_width


def rms_delay_spread(s: ImpulseResponse) -> float:
    _, d = _moments(s)
    return d * s.bin_width


def delay_stats(s: ImpulseResponse) -> DelayStats:
    mu, d = _moments(s)
    k = int(np.argmax(s.gains))
    return DelayStats(
        mean_delay=(s.start_bin + mu) * s.bin_width,
        rms_spread=d * s.bin_width,
        total=s.total,
        peak=s.peak,
        peak_time=(s.start_bin + k) * s.bin_width,
    )


def compare(conv: DelayStats | float, da: DelayStats | float) -> float:
    """Fractional reduction of the RMS delay spread, ``(D_conv - D_da) / D_conv``.

    Negative when the adapted system spreads more; the value is not clamped.
    """
    d_conv = conv.rms_spread if isinstance(conv, DelayStats) else float(conv)
    d_da = da.rms_spread if isinstance(da, DelayStats) else float(da)
    if d_conv <= 0:
        raise InvalidArgumentError("reduction is undefined when the conventional spread is zero")
    return (d_conv - d_da) / d_conv
