"""Time-binned channel impulse responses.

An :class:`ImpulseResponse` is a finite sum of weighted path impulses
accumulated into uniform bins: bin ``k`` holds the summed gain of every
path whose delay ``t`` satisfies ``floor(t / bin_width) == k``. Because the
bins hold path gains rather than a density, convolution needs no
``bin_width`` factor.

:class:`ChannelEngine` evaluates the line-of-sight path plus first- and
second-order diffuse reflections off the tessellated room surfaces.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError
from .geometry import RoomModel, Tessellation, tessellate
from .radiometry import SPEED_OF_LIGHT, Detector, Emitter, link_gains, path_contribution

DEFAULT_BIN_WIDTH = 1e-10

# Paths binned per np.bincount call. Inputs below this size are accumulated
# in one pass, in enumeration order.
_FLUSH_PATHS = 1 << 22


class ImpulseResponse:
    """Non-negative gains on a uniform time grid starting at ``start_bin``.

    Leading and trailing zero bins are trimmed so that equal responses have
    equal representations. An all-zero response has no bins.
    """

    __slots__ = ("bin_width", "start_bin", "gains")

    def __init__(self, bin_width: float, start_bin: int, gains: Iterable[float]):
        if not (math.isfinite(bin_width) and bin_width > 0):
            raise InvalidArgumentError(f"bin width must be positive, got {bin_width}")
        g = np.array(gains, dtype=float).ravel()
        if g.size and (not np.all(np.isfinite(g)) or g.min() < 0.0):
            raise InvalidArgumentError("gains must be finite and non-negative")
        if int(start_bin) < 0:
            raise InvalidArgumentError("start_bin must be >= 0")
        nz = np.flatnonzero(g)
        if nz.size == 0:
            g, start_bin = g[:0], 0
        else:
            start_bin = int(start_bin) + int(nz[0])
            g = g[nz[0] : nz[-1] + 1]
        g.setflags(write=False)
        self.bin_width = float(bin_width)
        self.start_bin = int(start_bin)
        self.gains = g

    @classmethod
    def delta(cls, bin_index: int, gain: float = 1.0, bin_width: float = DEFAULT_BIN_WIDTH) -> "ImpulseResponse":
        return cls(bin_width, bin_index, [gain])

    @classmethod
    def zero(cls, bin_width: float = DEFAULT_BIN_WIDTH) -> "ImpulseResponse":
        return cls(bin_width, 0, [])

    def __repr__(self) -> str:
        return (
            f"ImpulseResponse(bin_width={self.bin_width!r}, start_bin={self.start_bin}, "
            f"n_bins={self.gains.size}, total={self.total:.6g})"
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImpulseResponse):
            return NotImplemented
        return (
            self.bin_width == other.bin_width
            and self.start_bin == other.start_bin
            and np.array_equal(self.gains, other.gains)
        )

    __hash__ = None  # type: ignore[assignment]

    def __len__(self) -> int:
        return self.gains.size

    @property
    def is_zero(self) -> bool:
        return self.gains.size == 0

    @property
    def stop_bin(self) -> int:
        """One past the last non-zero bin."""
        return self.start_bin + self.gains.size

    @property
    def total(self) -> float:
        return float(self.gains.sum())

    @property
    def peak(self) -> float:
        return float(self.gains.max()) if self.gains.size else 0.0

    @property
    def bins(self) -> np.ndarray:
        return np.arange(self.start_bin, self.stop_bin)

    @property
    def times(self) -> np.ndarray:
        """Bin start times in seconds."""
        return self.bins * self.bin_width

    def dense(self, length: int | None = None) -> np.ndarray:
        """Gains as an array indexed from bin 0."""
        n = self.stop_bin if length is None else length
        if n < self.stop_bin:
            raise InvalidArgumentError(f"length {n} truncates the response (needs {self.stop_bin})")
        out = np.zeros(n)
        out[self.start_bin : self.stop_bin] = self.gains
        return out

    def value_at(self, bin_index: int) -> float:
        i = bin_index - self.start_bin
        return float(self.gains[i]) if 0 <= i < self.gains.size else 0.0

    def shifted(self, bins: int) -> "ImpulseResponse":
        if self.is_zero:
            return self
        return ImpulseResponse(self.bin_width, self.start_bin + int(bins), self.gains)

    def scaled(self, factor: float) -> "ImpulseResponse":
        return ImpulseResponse(self.bin_width, self.start_bin, self.gains * factor)

    def to_table(self, value_name: str = "gain") -> str:
        """Two-column text table ``time_ns,<value_name>``, one row per stored bin."""
        lines = [f"time_ns,{value_name}"]
        for b, g in zip(self.bins, self.gains):
            lines.append(f"{b * self.bin_width * 1e9:.9g},{g:.9g}")
        return "\n".join(lines) + "\n"

    def to_record(self) -> dict:
        return {
            "bin_width_ns": self.bin_width * 1e9,
            "start_bin": self.start_bin,
            "gains": [float(g) for g in self.gains],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ImpulseResponse":
        return cls(rec["bin_width_ns"] / 1e9, rec["start_bin"], rec["gains"])


def convolve(a: ImpulseResponse, b: ImpulseResponse) -> ImpulseResponse:
    """Discrete convolution; start bins add and the bin width is preserved."""
    if a.bin_width != b.bin_width:
        raise InvalidArgumentError(f"bin widths differ: {a.bin_width} vs {b.bin_width}")
    if a.is_zero or b.is_zero:
        return ImpulseResponse.zero(a.bin_width)
    return ImpulseResponse(a.bin_width, a.start_bin + b.start_bin, np.convolve(a.gains, b.gains))


def delay_bins(delays: np.ndarray, bin_width: float) -> np.ndarray:
    return np.floor(np.asarray(delays, dtype=float) / bin_width).astype(np.int64)


def bin_accumulate(paths: Sequence[tuple[float, float]], bin_width: float = DEFAULT_BIN_WIDTH) -> ImpulseResponse:
    """Accumulate ``(gain, delay)`` path pairs into bins, in list order."""
    if not paths:
        return ImpulseResponse.zero(bin_width)
    arr = np.asarray(paths, dtype=float).reshape(-1, 2)
    gains, delays = arr[:, 0], arr[:, 1]
    if np.any(delays < 0) or not np.all(np.isfinite(delays)):
        raise InvalidArgumentError("path delays must be finite and non-negative")
    if np.any(gains < 0):
        raise InvalidArgumentError("path gains must be non-negative")
    bins = delay_bins(delays, bin_width)
    return ImpulseResponse(bin_width, 0, np.bincount(bins, weights=gains))


@dataclass(frozen=True)
class ChannelConfig:
    max_bounces: int = 2
    element_side_bounce1: float = 0.05
    element_side_bounce2: float = 0.20
    bin_width: float = DEFAULT_BIN_WIDTH

    def __post_init__(self) -> None:
        if self.max_bounces not in (0, 1, 2):
            raise InvalidArgumentError(f"max_bounces must be 0, 1 or 2, got {self.max_bounces}")
        if not (self.element_side_bounce1 > 0 and self.element_side_bounce2 > 0):
            raise InvalidArgumentError("element sides must be positive")
        if not self.bin_width > 0:
            raise InvalidArgumentError("bin width must be positive")

    def scaled(self, factor: float) -> "ChannelConfig":
        """Coarsen (factor > 1) or refine both element sides."""
        if not factor > 0:
            raise InvalidArgumentError(f"resolution scale must be positive, got {factor}")
        return replace(
            self,
            element_side_bounce1=self.element_side_bounce1 * factor,
            element_side_bounce2=self.element_side_bounce2 * factor,
        )


class _Accumulator:
    """Bins path gains; flushes to the dense sum in enumeration order."""

    def __init__(self, bin_width: float):
        self.bin_width = bin_width
        self.total = np.zeros(0)
        self._bins: list[np.ndarray] = []
        self._gains: list[np.ndarray] = []
        self._pending = 0

    def add(self, gains: np.ndarray, delays: np.ndarray) -> None:
        keep = gains > 0.0
        if not keep.all():
            gains, delays = gains[keep], delays[keep]
        if gains.size == 0:
            return
        self._bins.append(delay_bins(delays, self.bin_width))
        self._gains.append(gains)
        self._pending += gains.size
        if self._pending >= _FLUSH_PATHS:
            self.flush()

    def flush(self) -> None:
        if not self._pending:
            return
        counts = np.bincount(np.concatenate(self._bins), weights=np.concatenate(self._gains))
        if counts.size > self.total.size:
            counts[: self.total.size] += self.total
            self.total = counts
        else:
            self.total[: counts.size] += counts
        self._bins, self._gains, self._pending = [], [], 0

    def result(self) -> ImpulseResponse:
        self.flush()
        return ImpulseResponse(self.bin_width, 0, self.total)


class ChannelEngine:
    """Impulse responses inside one room at one resolution.

    Tessellations and the element-to-element coupling matrix of the coarse
    grid are computed once and reused for every emitter/detector pair.
    """

    def __init__(self, room: RoomModel, cfg: ChannelConfig | None = None):
        self.room = room
        self.cfg = cfg or ChannelConfig()
        self.fine: Tessellation | None = None
        self.coarse: Tessellation | None = None
        if self.cfg.max_bounces >= 1:
            self.fine = tessellate(room, self.cfg.element_side_bounce1)
        if self.cfg.max_bounces >= 2:
            self.coarse = tessellate(room, self.cfg.element_side_bounce2)
        self._coupling: tuple[np.ndarray, np.ndarray] | None = None

    def _coupling_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """Gain and delay from coarse element i (order-1 source) to element j."""
        if self._coupling is None:
            t = self.coarse
            gain, dist = link_gains(
                t.centroids[:, None, :], t.normals[:, None, :], 1.0,
                t.centroids[None, :, :], t.normals[None, :, :], t.areas[None, :],
            )
            self._coupling = (gain, dist / SPEED_OF_LIGHT)
        return self._coupling

    def _check_inside(self, *positions) -> None:
        for p in positions:
            if not self.room.contains(p):
                raise InvalidArgumentError(f"position {tuple(p)} lies outside the room")

    def response(self, e: Emitter, d: Detector) -> ImpulseResponse:
        """LOS plus diffuse reflections up to ``cfg.max_bounces``."""
        self._check_inside(e.position, d.position)
        acc = _Accumulator(self.cfg.bin_width)
        e_pos = np.asarray(e.position, dtype=float)
        e_nrm = np.asarray(e.normal, dtype=float)
        d_pos = np.asarray(d.position, dtype=float)
        d_nrm = np.asarray(d.normal, dtype=float)

        if e.position != d.position:
            g, t = path_contribution(e, d)
            acc.add(np.array([g]), np.array([t]))

        if self.fine is not None:
            src, snk = self._legs(self.fine, e, e_pos, e_nrm, d, d_pos, d_nrm)
            (g_in, t_in), (g_out, t_out) = src, snk
            acc.add((g_in * self.fine.reflectivity) * g_out, t_in + t_out)

        if self.coarse is not None:
            c = self.coarse
            (g_in, t_in), (g_out, t_out) = self._legs(c, e, e_pos, e_nrm, d, d_pos, d_nrm)
            k_gain, k_delay = self._coupling_matrix()
            a = g_in * c.reflectivity
            rows = np.flatnonzero(a)
            cols = np.flatnonzero(g_out)
            if rows.size and cols.size:
                step = max(1, _FLUSH_PATHS // max(1, len(c)))
                for lo in range(0, rows.size, step):
                    r = rows[lo : lo + step]
                    sub_g = ((a[r, None] * k_gain[np.ix_(r, cols)]) * c.reflectivity[None, cols]) * g_out[None, cols]
                    sub_t = (t_in[r, None] + k_delay[np.ix_(r, cols)]) + t_out[None, cols]
                    nz = np.nonzero(sub_g)
                    acc.add(sub_g[nz], sub_t[nz])
        return acc.result()

    @staticmethod
    def _legs(tess: Tessellation, e, e_pos, e_nrm, d, d_pos, d_nrm):
        g_in, r_in = link_gains(e_pos, e_nrm, e.order, tess.centroids, tess.normals, tess.areas)
        g_out, r_out = link_gains(tess.centroids, tess.normals, 1.0, d_pos, d_nrm, d.area, d.cos_fov)
        return (g_in, r_in / SPEED_OF_LIGHT), (g_out, r_out / SPEED_OF_LIGHT)


@functools.lru_cache(maxsize=4)
def get_engine(room: RoomModel, cfg: ChannelConfig) -> ChannelEngine:
    return ChannelEngine(room, cfg)


def impulse_response(e: Emitter, d: Detector, room: RoomModel, cfg: ChannelConfig | None = None) -> ImpulseResponse:
    return get_engine(room, cfg or ChannelConfig()).response(e, d)
