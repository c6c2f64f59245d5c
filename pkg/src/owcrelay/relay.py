"""Two-hop relay cascade.

Each relay is an ideal unit-gain forwarder with a programmable pure delay.
The user's photocurrent is the responsivity times the superposition, over
relays, of the transmitted waveform passed through the relay's composite
(transmitter -> relay -> user) channel and shifted by the relay's forward
delay.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ImpulseResponse, convolve
from .errors import InvalidArgumentError
from .radiometry import Detector, Emitter


@dataclass(frozen=True)
class RelayTerminal:
    id: int
    detector: Detector
    emitter: Emitter
    forward_delay: float = 0.0

    def __post_init__(self) -> None:
        if not self.forward_delay >= 0:
            raise InvalidArgumentError("forward delay must be >= 0")


@dataclass(frozen=True)
class ReceiverFrontEnd:
    detector: Detector
    responsivity: float = 1.0  # A/W

    def __post_init__(self) -> None:
        if not self.responsivity > 0:
            raise InvalidArgumentError("responsivity must be positive")


@dataclass(frozen=True, eq=False)
class TransmitWaveform:
    """Per-bin optical power (watts), starting at bin 0."""

    bin_width: float
    samples: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=float).ravel()
        if s.size and s.min() < 0:
            raise InvalidArgumentError("optical power samples must be non-negative")
        object.__setattr__(self, "samples", s)

    @classmethod
    def impulse(cls, power: float = 1.0, bin_width: float = 1e-10) -> "TransmitWaveform":
        return cls(bin_width, np.array([power]))

    def as_response(self) -> ImpulseResponse:
        return ImpulseResponse(self.bin_width, 0, self.samples)


def composite_response(h_tr: ImpulseResponse, h_ru: ImpulseResponse) -> ImpulseResponse:
    """End-to-end channel through one relay with zero forward delay."""
    return convolve(h_tr, h_ru)


def delay_to_bins(delay: float, bin_width: float) -> int:
    """Whole number of bins in ``delay``; rejects non-multiples."""
    m = round(delay / bin_width)
    if m < 0 or not math.isclose(m * bin_width, delay, rel_tol=1e-9, abs_tol=1e-6 * bin_width):
        raise InvalidArgumentError(
            f"forward delay {delay!r} s is not a non-negative multiple of the bin width {bin_width!r} s"
        )
    return int(m)


def received_signal(
    x: TransmitWaveform,
    relays: Sequence[tuple[ImpulseResponse, float]],
    fe: ReceiverFrontEnd | float = 1.0,
) -> ImpulseResponse:
    """Photocurrent per bin for ``(composite, forward_delay)`` pairs.

    ``fe`` may be a :class:`ReceiverFrontEnd` or a bare responsivity.
    Contributions are summed in list order.
    """
    R = fe.responsivity if isinstance(fe, ReceiverFrontEnd) else float(fe)
    if not R > 0:
        raise InvalidArgumentError("responsivity must be positive")
    dt = x.bin_width
    src = x.as_response()
    parts = []
    for composite, delay in relays:
        if composite.bin_width != dt:
            raise InvalidArgumentError("composite and waveform bin widths differ")
        parts.append(convolve(src, composite).shifted(delay_to_bins(delay, dt)))
    parts = [p for p in parts if not p.is_zero]
    if not parts:
        return ImpulseResponse.zero(dt)
    out = np.zeros(max(p.stop_bin for p in parts))
    for p in parts:
        out[p.start_bin : p.stop_bin] += p.gains
    return ImpulseResponse(dt, 0, R * out)
