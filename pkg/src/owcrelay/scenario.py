"""Relay deployment scenarios and the conventional-vs-adapted sweep.

A scenario fixes the room, the ceiling transmitter, the relay terminals and
the user detector. :func:`run_sweep` moves the user over a grid on the
communication plane and, at every position, builds the received signal
twice: once with all forward delays zero (conventional relaying) and once
with the delays from the configured adaptation method.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .adaptation import DelayAssignment, ProbeProtocolConfig, ReferenceCriterion, adapt
from .channel import ChannelConfig, ChannelEngine, ImpulseResponse
from .config import deep_merge, load_config, validate
from .errors import InvalidArgumentError, NoSignalError
from .geometry import RoomModel, Vec3
from .metrics import DelayStats, compare, delay_stats
from .radiometry import Detector, Emitter, lambertian_order, normal_from_angles
from .relay import RelayTerminal, TransmitWaveform, composite_response, received_signal

log = logging.getLogger(__name__)

SCENARIOS = (1, 2, 3)
MODES = ("conventional", "da")


@dataclass(frozen=True)
class UserSpec:
    z: float = 1.0
    elevation: float = 90.0
    azimuth: float = 0.0
    fov: float = 90.0
    area: float = 1e-4
    responsivity: float = 1.0

    def detector(self, x: float, y: float) -> Detector:
        return Detector(Vec3(x, y, self.z), normal_from_angles(self.elevation, self.azimuth), self.area, self.fov)


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: int | str
    room: RoomModel
    transmitter: Emitter
    relays: tuple[RelayTerminal, ...]
    user: UserSpec = UserSpec()
    channel: ChannelConfig = ChannelConfig()
    resolution_scale: float = 4.0
    include_direct: bool = False
    method: str = "direct"
    criterion: ReferenceCriterion = ReferenceCriterion()
    probe: ProbeProtocolConfig = ProbeProtocolConfig()
    sweep: tuple[tuple[float, float], ...] = ()
    relay_depth: float | None = None

    def __post_init__(self) -> None:
        if self.relay_depth is not None and not self.relay_depth > 0:
            raise InvalidArgumentError("relay depth must be positive")
        if not self.relays:
            raise InvalidArgumentError("a scenario needs at least one relay")
        ids = [r.id for r in self.relays]
        if len(set(ids)) != len(ids):
            raise InvalidArgumentError("relay ids must be unique")
        points = [self.transmitter.position] + [r.detector.position for r in self.relays]
        points += [(x, y, self.user.z) for x, y in self.sweep]
        for p in points:
            if not self.room.contains(p):
                raise InvalidArgumentError(f"position {tuple(p)} lies outside the room")

    @property
    def effective_channel(self) -> ChannelConfig:
        return self.channel.scaled(self.resolution_scale)


def _inward_normal(room: RoomModel, p: Sequence[float]) -> Vec3:
    """Inward normal of the side wall closest to ``p``."""
    dists = [
        (p[0], Vec3(1.0, 0.0, 0.0)),
        (room.width - p[0], Vec3(-1.0, 0.0, 0.0)),
        (p[1], Vec3(0.0, 1.0, 0.0)),
        (room.length - p[1], Vec3(0.0, -1.0, 0.0)),
    ]
    return min(dists, key=lambda t: t[0])[1]


def default_wall_positions(room: RoomModel, z: float, per_wall: int = 6, spacing: float = 1.0) -> list[tuple[Vec3, Vec3]]:
    """Relays on both long walls (x=0 then x=W), centred along y."""
    ys = [room.length / 2 + (k - (per_wall - 1) / 2) * spacing for k in range(per_wall)]
    out = []
    for x, nx in ((0.0, 1.0), (room.width, -1.0)):
        out += [(Vec3(x, y, z), Vec3(nx, 0.0, 0.0)) for y in ys]
    return out


def perimeter_arc_positions(room: RoomModel, z: float, count: int = 12, spacing: float = 1.0) -> list[tuple[Vec3, Vec3]]:
    """Relays ``spacing`` apart along the perimeter, centred on the x=0 wall.

    The perimeter is walked from the corner (0, 0) along x=0, then y=L,
    x=W and y=0. Positions falling within 1 mm of a corner are rejected.
    """
    W, L = room.width, room.length
    perim = 2 * (W + L)
    centre = L / 2
    out = []
    for k in range(count):
        s = (centre + (k - (count - 1) / 2) * spacing) % perim
        if s < L:
            p, n = Vec3(0.0, s, z), Vec3(1.0, 0.0, 0.0)
        elif s < L + W:
            p, n = Vec3(s - L, L, z), Vec3(0.0, -1.0, 0.0)
        elif s < 2 * L + W:
            p, n = Vec3(W, L - (s - L - W), z), Vec3(-1.0, 0.0, 0.0)
        else:
            p, n = Vec3(W - (s - 2 * L - W), 0.0, z), Vec3(0.0, 1.0, 0.0)
        corner = min(abs(s - c) for c in (0.0, L, L + W, 2 * L + W, perim))
        if corner < 1e-3:
            raise InvalidArgumentError(f"relay {k + 1} would sit in a room corner")
        out.append((p, n))
    return out


def make_relay(
    rid: int,
    position: Vec3,
    emitter_normal: Vec3,
    transmitter: Emitter,
    area: float = 1e-4,
    fov: float = 90.0,
    order: float = 1.0,
) -> RelayTerminal:
    """Relay whose detector looks straight at the transmitter."""
    boresight = (Vec3(*transmitter.position) - position).unit()
    return RelayTerminal(rid, Detector(position, boresight, area, fov), Emitter(position, emitter_normal, order))


def scenario_from_dict(cfg: Mapping[str, Any], scenario_id: int | str = "custom", relay_depth: float | None = None) -> ScenarioConfig:
    """Build a :class:`ScenarioConfig` from a merged configuration mapping."""
    r = cfg["room"]
    room = RoomModel(
        length=r["length_m"], width=r["width_m"], height=r["height_m"],
        wall_reflectivity=r["reflectivity"]["walls"],
        ceiling_reflectivity=r["reflectivity"]["ceiling"],
        floor_reflectivity=r["reflectivity"]["floor"],
    )
    t = cfg["transmitter"]
    tx = Emitter(
        Vec3(*t["position_m"]), Vec3(*t["normal"]).unit(),
        lambertian_order(t["half_power_semiangle_deg"]), t["optical_power_w"],
    )

    rc = cfg["relays"]
    depth = rc.get("depth_m") if rc.get("depth_m") is not None else relay_depth
    if rc["layout"] == "explicit":
        if not rc["positions"]:
            raise InvalidArgumentError("explicit relay layout needs at least one position")
        placed = []
        for item in rc["positions"]:
            p = Vec3(*item["position_m"])
            n = Vec3(*item["normal"]).unit() if item.get("normal") else _inward_normal(room, p)
            placed.append((p, n))
    else:
        if depth is None:
            raise InvalidArgumentError("relay depth below the ceiling is required for preset layouts")
        z = room.height - depth
        if rc["layout"] == "default-walls":
            placed = default_wall_positions(room, z, rc["count_per_wall"], rc["spacing_m"])
        else:
            placed = perimeter_arc_positions(room, z, 2 * rc["count_per_wall"], rc["spacing_m"])
    relays = tuple(
        make_relay(i + 1, p, n, tx, rc["detector_area_m2"], rc["detector_fov_deg"], rc["emitter_order"])
        for i, (p, n) in enumerate(placed)
    )

    u = cfg["user"]
    user = UserSpec(u["z_m"], u["elevation_deg"], u["azimuth_deg"], u["fov_deg"], u["area_m2"], u["responsivity_a_per_w"])
    c = cfg["channel"]
    channel = ChannelConfig(c["max_bounces"], c["element_side_bounce1_m"], c["element_side_bounce2_m"], c["bin_width_ns"] / 1e9)
    a = cfg["adaptation"]
    p = a["probe"]
    probe = ProbeProtocolConfig(
        slot_interval=p["slot_interval_ns"] / 1e9,
        chip_duration=p["chip_duration_ns"] / 1e9,
        ooc_regime=p["ooc_regime"],
        code_length=p["code_length"],
        code_weight=p["code_weight"],
        code_lambda=p["code_lambda"],
    )
    sweep = tuple((float(x), float(y)) for x in cfg["sweep"]["x_m"] for y in cfg["sweep"]["y_m"])
    return ScenarioConfig(
        scenario_id=scenario_id,
        room=room,
        transmitter=tx,
        relays=relays,
        user=user,
        channel=channel,
        resolution_scale=float(c["resolution_scale"]),
        include_direct=bool(c["include_direct_path"]),
        method=a["method"],
        criterion=ReferenceCriterion(a["criterion"], a["threshold_fraction"]),
        probe=probe,
        sweep=sweep,
        relay_depth=depth if rc["layout"] != "explicit" else None,
    )


def build_scenario(k: int, overrides: Mapping[str, Any] | None = None, config: Mapping[str, Any] | None = None) -> ScenarioConfig:
    """Scenario ``k`` (1, 2 or 3): relays 0.5, 1.0 or 1.5 m below the ceiling.

    ``config`` is a merged configuration mapping (defaults when omitted);
    ``overrides`` is deep-merged on top, e.g.
    ``{"relays": {"layout": "explicit", "positions": [...]}}``.
    """
    if k not in SCENARIOS:
        raise InvalidArgumentError(f"scenario must be one of {SCENARIOS}, got {k!r}")
    cfg = dict(config) if config is not None else load_config()
    if overrides:
        cfg = deep_merge(cfg, overrides)
        validate(cfg)
    depth = cfg["relays"]["scenario_depths_m"][k - 1]
    return scenario_from_dict(cfg, scenario_id=k, relay_depth=depth)


@dataclass(frozen=True)
class RunRecord:
    scenario: int | str
    mode: str
    position: tuple[float, float, float]
    delays_ns: Mapping[int, float]
    stats: DelayStats
    reduction: float
    impulse_file: str
    warnings: tuple[str, ...] = ()
    signal: ImpulseResponse | None = field(default=None, compare=False, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "mode": self.mode,
            "position_m": list(self.position),
            "delays_ns": {str(k): v for k, v in self.delays_ns.items()},
            "stats": self.stats.to_dict(),
            "reduction": self.reduction,
            "impulse_file": self.impulse_file,
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RunRecord":
        return cls(
            scenario=d["scenario"],
            mode=d["mode"],
            position=tuple(d["position_m"]),
            delays_ns={int(k): v for k, v in d["delays_ns"].items()},
            stats=DelayStats(**d["stats"]),
            reduction=d["reduction"],
            impulse_file=d["impulse_file"],
            warnings=tuple(d["warnings"]),
        )


@dataclass
class PositionResult:
    position: tuple[float, float, float]
    conventional: ImpulseResponse
    adapted: ImpulseResponse
    assignment: DelayAssignment
    composites: dict[int, ImpulseResponse]
    warnings: tuple[str, ...]


class ScenarioRunner:
    """Evaluates user positions for one scenario.

    Transmitter-to-relay responses do not depend on the user and are
    computed once, on first use.
    """

    def __init__(self, cfg: ScenarioConfig, engine: ChannelEngine | None = None, h_tr: Mapping[int, ImpulseResponse] | None = None):
        self.cfg = cfg
        self.engine = engine or ChannelEngine(cfg.room, cfg.effective_channel)
        self._h_tr = dict(h_tr) if h_tr is not None else None

    @property
    def h_tr(self) -> dict[int, ImpulseResponse]:
        if self._h_tr is None:
            self._h_tr = {r.id: self.engine.response(self.cfg.transmitter, r.detector) for r in self.cfg.relays}
        return self._h_tr

    def composites(self, user: Detector) -> dict[int, ImpulseResponse]:
        return {
            r.id: composite_response(self.h_tr[r.id], self.engine.response(r.emitter, user))
            for r in self.cfg.relays
        }

    def evaluate(self, x: float, y: float) -> PositionResult:
        cfg = self.cfg
        user = cfg.user.detector(x, y)
        comps = self.composites(user)
        dt = cfg.effective_channel.bin_width
        warnings = tuple(f"relay {rid} unreachable" for rid, h in comps.items() if h.is_zero)
        live = {rid: h for rid, h in comps.items() if not h.is_zero}
        if not live:
            raise NoSignalError(f"no relay reaches the user at ({x}, {y}, {cfg.user.z})")
        assignment = adapt(live, cfg.method, cfg.criterion, cfg.probe)
        pulse = TransmitWaveform.impulse(cfg.transmitter.optical_power, dt)
        R = cfg.user.responsivity
        conv = received_signal(pulse, [(h, 0.0) for h in live.values()], R)
        da = received_signal(pulse, [(h, assignment.seconds(rid)) for rid, h in live.items()], R)
        if cfg.include_direct:
            direct = received_signal(pulse, [(self.engine.response(cfg.transmitter, user), 0.0)], R)
            conv, da = _add(conv, direct), _add(da, direct)
        return PositionResult((x, y, cfg.user.z), conv, da, assignment, comps, warnings)


def _add(a: ImpulseResponse, b: ImpulseResponse) -> ImpulseResponse:
    n = max(a.stop_bin, b.stop_bin)
    return ImpulseResponse(a.bin_width, 0, a.dense(n) + b.dense(n))


def _impulse_name(scenario, mode: str, pos: tuple[float, float, float]) -> str:
    x, y, z = pos
    return f"impulse/s{scenario}_{mode}_x{x:g}_y{y:g}_z{z:g}.csv"


def records_for(cfg: ScenarioConfig, res: PositionResult) -> list[RunRecord]:
    s_conv, s_da = delay_stats(res.conventional), delay_stats(res.adapted)
    red = compare(s_conv, s_da) if s_conv.rms_spread > 0 else 0.0
    zero = {rid: 0.0 for rid in res.assignment.delay_bins}
    out = []
    for mode, stats, sig, delays in (
        ("conventional", s_conv, res.conventional, zero),
        ("da", s_da, res.adapted, res.assignment.delays_ns),
    ):
        out.append(
            RunRecord(cfg.scenario_id, mode, res.position, delays, stats, red,
                      _impulse_name(cfg.scenario_id, mode, res.position), res.warnings, sig)
        )
    return out


_worker_runner: ScenarioRunner | None = None


def _init_worker(cfg: ScenarioConfig, h_tr: dict[int, ImpulseResponse]) -> None:
    global _worker_runner
    _worker_runner = ScenarioRunner(cfg, h_tr=h_tr)


def _evaluate_in_worker(pos: tuple[float, float]) -> PositionResult:
    return _worker_runner.evaluate(*pos)


def run_sweep(cfg: ScenarioConfig, workers: int = 1, runner: ScenarioRunner | None = None) -> list[RunRecord]:
    """Records ordered by mode, then sweep position.

    Results do not depend on ``workers``: every position is evaluated by
    the same deterministic code path and collected in sweep order.
    """
    runner = runner or ScenarioRunner(cfg)
    positions = list(cfg.sweep)
    if workers > 1 and len(positions) > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(cfg, runner.h_tr)) as pool:
            results = list(pool.map(_evaluate_in_worker, positions))
    else:
        results = [runner.evaluate(x, y) for x, y in positions]
    pairs = [records_for(cfg, r) for r in results]
    for r in results:
        for w in r.warnings:
            log.warning("scenario %s at %s: %s", cfg.scenario_id, r.position, w)
    return [p[0] for p in pairs] + [p[1] for p in pairs]


def summarize(records: Sequence[RunRecord]) -> list[dict[str, Any]]:
    """Per-scenario and overall mean spreads and mean reduction."""
    rows = []
    groups: dict[Any, list[RunRecord]] = {}
    for r in records:
        groups.setdefault(r.scenario, []).append(r)

    def row(label, recs):
        conv = [r for r in recs if r.mode == "conventional"]
        da = [r for r in recs if r.mode == "da"]
        per_pos = {r.position: r.reduction for r in recs}
        return {
            "scenario": label,
            "positions": len(per_pos),
            "mean_D_conv_ns": _mean([r.stats.rms_spread * 1e9 for r in conv]),
            "mean_D_da_ns": _mean([r.stats.rms_spread * 1e9 for r in da]),
            "mean_reduction_pct": _mean([v * 100 for v in per_pos.values()]),
        }

    for label, recs in groups.items():
        rows.append(row(label, recs))
    if len(groups) > 1:
        # overall mean over every (scenario, position) pair
        reductions = [rr for g in groups.values() for rr in {r.position: r.reduction for r in g}.values()]
        overall = row("all", records)
        overall["positions"] = len(reductions)
        overall["mean_reduction_pct"] = _mean([v * 100 for v in reductions])
        rows.append(overall)
    return rows


def _mean(vals: Sequence[float]) -> float:
    return math.fsum(vals) / len(vals) if vals else float("nan")
