"""Delay adaptation: measure each relay's arrival time at the user and
program differential forward delays so that all relayed copies line up.

Three measurement routes are provided:

* ``direct``: genie-aided, reads the reference time off the exact composite.
* ``sequential``: relays send a unit probe pulse in turn, one per slot, all
  anchored to the transmitter's frame sync; the user windows the received
  trace slot by slot.
* ``ooc``: all relays send their own optical orthogonal codeword at once;
  the user runs one cyclic correlator per codeword.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

import numpy as np

from .channel import ImpulseResponse
from .errors import InvalidArgumentError, NoSignalError, ProbeOverlapError
from .ooc import CodeFamily, Codeword, chip_bins, encode, estimate_delay, generate
from .relay import TransmitWaveform, received_signal

Method = Literal["direct", "sequential", "ooc"]


@dataclass(frozen=True)
class ReferenceCriterion:
    kind: Literal["peak", "first-threshold"] = "peak"
    threshold_fraction: float = 0.5

    def __post_init__(self) -> None:
        if self.kind not in ("peak", "first-threshold"):
            raise InvalidArgumentError(f"unknown reference criterion {self.kind!r}")
        if not 0.0 < self.threshold_fraction <= 1.0:
            raise InvalidArgumentError("threshold_fraction must lie in (0, 1]")


@dataclass(frozen=True)
class ProbeProtocolConfig:
    """Timing of the probe protocols.

    ``code_length``/``code_weight`` left as ``None`` select an OOC family
    sized for the relay count: weight ``N + 1`` so that, with unit-gain
    arrivals, the true correlation peak (``w``) always beats the worst-case
    off-peak sum (``1 + (N - 1)``), and a period long enough to cover the
    channel memory without cyclic ambiguity.
    """

    slot_interval: float = 500e-9
    chip_duration: float = 1e-10
    probe_order: tuple[int, ...] | None = None
    ooc_regime: Literal["synthetic", "dispersive"] = "dispersive"
    code_length: int | None = None
    code_weight: int | None = None
    code_lambda: int = 1

    def __post_init__(self) -> None:
        if not self.slot_interval > 0 or not self.chip_duration > 0:
            raise InvalidArgumentError("slot interval and chip duration must be positive")
        if self.ooc_regime not in ("synthetic", "dispersive"):
            raise InvalidArgumentError(f"unknown OOC regime {self.ooc_regime!r}")


@dataclass(frozen=True)
class DelayAssignment:
    """Per-relay forward delays in whole bins; the latest relay gets 0."""

    bin_width: float
    delay_bins: Mapping[int, int]
    unreachable: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        d = {int(k): int(v) for k, v in sorted(self.delay_bins.items())}
        if any(v < 0 for v in d.values()):
            raise InvalidArgumentError("forward delays must be >= 0")
        object.__setattr__(self, "delay_bins", d)
        object.__setattr__(self, "unreachable", tuple(sorted(self.unreachable)))

    def seconds(self, relay_id: int) -> float:
        return self.delay_bins[relay_id] * self.bin_width

    @property
    def delays_ns(self) -> dict[int, float]:
        return {k: v * self.bin_width * 1e9 for k, v in self.delay_bins.items()}


@dataclass(frozen=True)
class ProbeResult:
    """Measured reference times (seconds) and relays that produced no signal."""

    times: Mapping[int, float]
    unreachable: tuple[int, ...] = ()
    bins: Mapping[int, int] = field(default_factory=dict)


def reference_bin(h: ImpulseResponse, c: ReferenceCriterion = ReferenceCriterion()) -> int:
    if h.is_zero:
        raise NoSignalError("response is all zero; relay unreachable")
    g = h.gains
    if c.kind == "peak":
        k = int(np.argmax(g))
    else:
        k = int(np.flatnonzero(g >= c.threshold_fraction * g.max())[0])
    return h.start_bin + k


def reference_time(h: ImpulseResponse, c: ReferenceCriterion = ReferenceCriterion()) -> float:
    """Arrival time (seconds) of the reference feature of ``h``."""
    return reference_bin(h, c) * h.bin_width


def differential_delays(
    t_refs: Mapping[int, float] | Sequence[float],
    bin_width: float = 1e-10,
    unreachable: Sequence[int] = (),
) -> DelayAssignment:
    """Delay every relay up to the latest arrival, rounded to whole bins (ties up)."""
    if not isinstance(t_refs, Mapping):
        t_refs = dict(enumerate(t_refs))
    if not t_refs:
        raise InvalidArgumentError("no relay reference times given")
    latest = max(t_refs.values())
    bins = {k: math.floor((latest - t) / bin_width + 0.5) for k, t in t_refs.items()}
    return DelayAssignment(bin_width, bins, tuple(unreachable))


def _bin_width(composites: Mapping[int, ImpulseResponse]) -> float:
    widths = {h.bin_width for h in composites.values()}
    if len(widths) != 1:
        raise InvalidArgumentError("composites must share one bin width")
    return widths.pop()


def _window(trace: ImpulseResponse, lo: int, hi: int) -> ImpulseResponse:
    """Part of ``trace`` in bins ``[lo, hi)`` re-referenced to ``lo``."""
    a = max(lo, trace.start_bin)
    b = min(hi, trace.stop_bin)
    if b <= a:
        return ImpulseResponse.zero(trace.bin_width)
    seg = trace.gains[a - trace.start_bin : b - trace.start_bin]
    return ImpulseResponse(trace.bin_width, a - lo, seg)


def simulate_sequential_probe(
    composites: Mapping[int, ImpulseResponse],
    cfg: ProbeProtocolConfig = ProbeProtocolConfig(),
    c: ReferenceCriterion = ReferenceCriterion(),
) -> ProbeResult:
    """Relays send a unit pulse in turn; the user measures each slot.

    The pulse of the relay in position ``r`` of the probe order leaves at
    ``r * slot_interval`` after frame sync and traverses the full
    transmitter -> relay -> user composite. Each slot's reference time is
    reported relative to the slot start.
    """
    dt = _bin_width(composites)
    slot = round(cfg.slot_interval / dt)
    if slot < 1 or not math.isclose(slot * dt, cfg.slot_interval, rel_tol=1e-9):
        raise InvalidArgumentError("slot interval must be a positive multiple of the bin width")
    order = cfg.probe_order if cfg.probe_order is not None else tuple(sorted(composites))
    if sorted(order) != sorted(composites):
        raise InvalidArgumentError("probe order must be a permutation of the relay ids")
    memory = max((h.stop_bin for h in composites.values()), default=0)
    if memory > slot:
        raise ProbeOverlapError(
            f"slot interval ({slot} bins) is shorter than the channel memory ({memory} bins)"
        )
    pulse = TransmitWaveform.impulse(1.0, dt)
    trace = received_signal(pulse, [(composites[rid], r * slot * dt) for r, rid in enumerate(order)])

    times, bins, missing = {}, {}, []
    for r, rid in enumerate(order):
        win = _window(trace, r * slot, (r + 1) * slot)
        if win.is_zero:
            missing.append(rid)
            continue
        k = reference_bin(win, c)
        bins[rid] = k
        times[rid] = k * dt
    return ProbeResult(dict(sorted(times.items())), tuple(sorted(missing)), dict(sorted(bins.items())))


def probe_code_family(n_relays: int, min_length: int, cfg: ProbeProtocolConfig = ProbeProtocolConfig()) -> CodeFamily:
    """OOC family with at least ``n_relays`` codewords and period >= ``min_length`` chips."""
    lam = cfg.code_lambda
    w = cfg.code_weight or (n_relays + 1)
    if cfg.code_length is not None:
        fam = generate(cfg.code_length, w, lam, max_codewords=n_relays)
        if len(fam) < n_relays:
            raise InvalidArgumentError(
                f"({cfg.code_length}, {w}, {lam}) yields only {len(fam)} codewords for {n_relays} relays"
            )
        return fam
    # twice the Johnson-minimal length leaves room for a greedy search
    n = max(min_length, 2 * w * (w - 1) * n_relays + 1)
    while True:
        fam = generate(n, w, lam, max_codewords=n_relays)
        if len(fam) >= n_relays:
            return fam
        n = math.ceil(n * 1.25)


def simulate_ooc_probe(
    composites: Mapping[int, ImpulseResponse],
    codes: Mapping[int, Codeword] | Sequence[Codeword] | None = None,
    cfg: ProbeProtocolConfig = ProbeProtocolConfig(),
    c: ReferenceCriterion = ReferenceCriterion(),
    synthetic: bool | None = None,
) -> ProbeResult:
    """All relays send their codeword at frame sync; one correlator per code.

    In the synthetic regime each composite is replaced by a unit-gain
    impulse at its reference bin, so arrivals fall on whole chips when the
    chip equals one bin. The dispersive regime sends the chips through the
    full composites and reports the correlation-peak chip.
    """
    dt = _bin_width(composites)
    k = chip_bins(cfg.chip_duration, dt)
    synthetic = cfg.ooc_regime == "synthetic" if synthetic is None else synthetic

    ids = sorted(composites)
    missing = tuple(rid for rid in ids if composites[rid].is_zero)
    live = [rid for rid in ids if rid not in missing]
    if synthetic:
        channels = {rid: ImpulseResponse.delta(reference_bin(composites[rid], c), 1.0, dt) for rid in live}
    else:
        channels = {rid: composites[rid] for rid in live}
    if not live:
        return ProbeResult({}, missing)
    memory = max(h.stop_bin for h in channels.values())

    if codes is None:
        fam = probe_code_family(len(ids), math.ceil(memory / k) + 1, cfg)
        codes = dict(zip(ids, fam.codewords))
    elif not isinstance(codes, Mapping):
        codes = dict(zip(ids, codes))
    if set(codes) < set(ids):
        raise InvalidArgumentError("every relay needs a codeword")
    used = [codes[rid] for rid in ids]
    if len(set(used)) != len(used):
        raise InvalidArgumentError("codewords must be pairwise distinct")
    n = used[0].n
    if any(cw.n != n for cw in used):
        raise InvalidArgumentError("codewords must share one length")
    if memory > n * k:
        raise ProbeOverlapError(
            f"code period ({n * k} bins) is shorter than the channel memory ({memory} bins)"
        )

    total = np.zeros(memory + n * k)
    for rid in live:
        part = received_signal(encode(codes[rid], cfg.chip_duration, dt), [(channels[rid], 0.0)])
        total[part.start_bin : part.stop_bin] += part.gains
    received = ImpulseResponse(dt, 0, total)

    times, bins = {}, {}
    for rid in live:
        chips = estimate_delay(received, codes[rid], cfg.chip_duration, dt)
        bins[rid] = chips * k
        times[rid] = chips * cfg.chip_duration
    return ProbeResult(times, missing, bins)


def adapt(
    composites: Mapping[int, ImpulseResponse],
    method: Method = "direct",
    c: ReferenceCriterion = ReferenceCriterion(),
    probe: ProbeProtocolConfig = ProbeProtocolConfig(),
    codes: Mapping[int, Codeword] | Sequence[Codeword] | None = None,
) -> DelayAssignment:
    """Delay assignment for the chosen measurement route.

    Unreachable relays (all-zero composites) are listed in
    ``DelayAssignment.unreachable`` and receive no delay entry.
    """
    dt = _bin_width(composites)
    if method == "direct":
        missing = tuple(rid for rid, h in sorted(composites.items()) if h.is_zero)
        bins = {rid: reference_bin(h, c) for rid, h in sorted(composites.items()) if not h.is_zero}
    elif method == "sequential":
        res = simulate_sequential_probe(composites, probe, c)
        bins, missing = res.bins, res.unreachable
    elif method == "ooc":
        res = simulate_ooc_probe(composites, codes, probe, c)
        bins, missing = res.bins, res.unreachable
    else:
        raise InvalidArgumentError(f"unknown adaptation method {method!r}")
    if not bins:
        raise NoSignalError("no relay reaches the user")
    latest = max(bins.values())
    return DelayAssignment(dt, {rid: latest - b for rid, b in bins.items()}, missing)
