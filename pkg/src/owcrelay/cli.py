"""Command-line entry point.

Exit codes: 0 success, 1 invalid configuration or arguments, 2 runtime
error, 3 no signal at the user.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .adaptation import ReferenceCriterion, adapt, reference_bin, simulate_ooc_probe, simulate_sequential_probe
from .channel import ChannelConfig, ChannelEngine
from .config import load_config
from .errors import InvalidArgumentError, NoSignalError
from .metrics import delay_stats
from .ooc import generate, verify_family
from .oracle import naive_impulse_response
from .output import emit, summary_csv
from .scenario import MODES, SCENARIOS, ScenarioRunner, build_scenario, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_NO_SIGNAL = 0, 1, 2, 3

log = logging.getLogger("owcrelay")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; here 2 means a runtime failure
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _scenario_ids(value: str) -> tuple[int, ...]:
    if value == "all":
        return SCENARIOS
    try:
        k = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 1, 2, 3 or all, got {value!r}") from None
    if k not in SCENARIOS:
        raise argparse.ArgumentTypeError(f"expected 1, 2, 3 or all, got {value!r}")
    return (k,)


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    ov: dict[str, Any] = {}
    if getattr(args, "resolution_scale", None) is not None:
        ov.setdefault("channel", {})["resolution_scale"] = args.resolution_scale
    if getattr(args, "method", None) is not None:
        ov.setdefault("adaptation", {})["method"] = args.method
    if getattr(args, "regime", None) is not None:
        ov.setdefault("adaptation", {}).setdefault("probe", {})["ooc_regime"] = args.regime
    return ov


def _load(args: argparse.Namespace) -> dict[str, Any]:
    return load_config(args.config, _overrides(args))


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args)
    records = []
    for k in args.scenario:
        sc = build_scenario(k, config=cfg)
        log.info("scenario %d: %d relays, %d positions", k, len(sc.relays), len(sc.sweep))
        records += run_sweep(sc, workers=args.workers)
    if args.mode != "both":
        records = [r for r in records if r.mode == args.mode]
    written = emit(records, args.out, args.format, impulses=not args.no_impulses)
    log.info("wrote %d files under %s", len(written), args.out)
    sys.stdout.write(summary_csv(records))
    return EXIT_OK


def _position(args: argparse.Namespace, cfg: dict[str, Any]) -> tuple[float, float]:
    if args.z is not None and not math.isclose(args.z, cfg["user"]["z_m"]):
        cfg["user"]["z_m"] = args.z
    return args.x, args.y


def cmd_impulse(args: argparse.Namespace) -> int:
    cfg = _load(args)
    x, y = _position(args, cfg)
    sc = build_scenario(args.scenario, config=cfg)
    res = ScenarioRunner(sc).evaluate(x, y)
    for w in res.warnings:
        log.warning(w)
    tables = {
        "conventional": res.conventional,
        "da": res.adapted,
        **{f"relay{rid}": h for rid, h in res.composites.items()},
    }
    print("signal,mu_ns,D_ns,total_gain,peak_gain")
    for name in ("conventional", "da"):
        s = delay_stats(tables[name])
        print(f"{name},{s.mean_delay * 1e9:.9g},{s.rms_spread * 1e9:.9g},{s.total:.9g},{s.peak:.9g}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        tag = f"s{args.scenario}_x{x:g}_y{y:g}_z{res.position[2]:g}"
        for name, h in tables.items():
            (out / f"{tag}_{name}.csv").write_text(h.to_table("value"), encoding="utf-8")
    return EXIT_OK


def cmd_probe(args: argparse.Namespace) -> int:
    cfg = _load(args)
    x, y = _position(args, cfg)
    sc = build_scenario(args.scenario, config=cfg)
    comps = ScenarioRunner(sc).composites(sc.user.detector(x, y))
    if all(h.is_zero for h in comps.values()):
        raise NoSignalError(f"no relay reaches the user at ({x}, {y})")
    if args.method == "sequential":
        res = simulate_sequential_probe(comps, sc.probe, sc.criterion)
    else:
        res = simulate_ooc_probe(comps, None, sc.probe, sc.criterion)
    genie = adapt(comps, "direct", sc.criterion)
    measured = adapt(comps, args.method, sc.criterion, sc.probe)
    print("relay_id,reference_ns,measured_ns,direct_delay_ns,probe_delay_ns,match")
    dt = sc.effective_channel.bin_width
    for rid, h in sorted(comps.items()):
        if rid in res.unreachable:
            print(f"{rid},,,,,unreachable")
            continue
        ref = reference_bin(h, sc.criterion) * dt * 1e9
        m = res.times[rid] * 1e9
        dd, pd = genie.delays_ns[rid], measured.delays_ns[rid]
        print(f"{rid},{ref:.9g},{m:.9g},{dd:.9g},{pd:.9g},{int(dd == pd)}")
    return EXIT_OK


def cmd_ooc(args: argparse.Namespace) -> int:
    fam = generate(args.n, args.w, args.lam, max_codewords=args.count)
    if not verify_family(fam):
        raise RuntimeError("generated family failed correlation verification")
    sys.stdout.write(fam.to_text())
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    cfg = _load(args)
    x, y = _position(args, cfg)
    sc = build_scenario(args.scenario, config=cfg)
    ch = ChannelConfig(args.bounces, args.element_side, args.element_side, sc.channel.bin_width)
    engine = ChannelEngine(sc.room, ch)
    user = sc.user.detector(x, y)
    links = [("tx->user", sc.transmitter, user)]
    links += [(f"tx->relay{r.id}", sc.transmitter, r.detector) for r in sc.relays[: args.relays]]
    links += [(f"relay{r.id}->user", r.emitter, user) for r in sc.relays[: args.relays]]
    worst = 0.0
    print("link,bins,total_gain,max_rel_diff")
    for name, e, d in links:
        fast = engine.response(e, d)
        ref = naive_impulse_response(e, d, sc.room, ch)
        n = max(fast.stop_bin, ref.stop_bin)
        a, b = fast.dense(n), ref.dense(n)
        scale = max(abs(b).max(), 1e-300) if n else 1.0
        diff = float(abs(a - b).max() / scale) if n else 0.0
        worst = max(worst, diff)
        print(f"{name},{len(ref)},{ref.total:.9g},{diff:.3g}")
    ok = worst <= args.rtol
    print(f"# worst relative difference {worst:.3g} ({'within' if ok else 'exceeds'} {args.rtol:g})")
    return EXIT_OK if ok else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="owcrelay", description="Relay-assisted indoor optical wireless simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (-v info, -vv debug)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, scenario_all: bool = False):
        sp.add_argument("--config", type=Path, help="YAML file merged over the shipped defaults")
        if scenario_all:
            sp.add_argument("--scenario", type=_scenario_ids, default=SCENARIOS, help="1, 2, 3 or all")
        else:
            sp.add_argument("--scenario", type=int, choices=SCENARIOS, default=1)
        sp.add_argument("--resolution-scale", type=float, help="multiplies both element sides (1 = full resolution)")

    def position(sp):
        sp.add_argument("--x", type=float, default=1.0)
        sp.add_argument("--y", type=float, default=1.0)
        sp.add_argument("--z", type=float, help="user height; defaults to the configured plane")

    r = sub.add_parser("run", help="full conventional vs adapted sweep")
    common(r, scenario_all=True)
    r.add_argument("--mode", choices=MODES + ("both",), default="both")
    r.add_argument("--method", choices=("direct", "sequential", "ooc"))
    r.add_argument("--out", type=Path, default=Path("results"))
    r.add_argument("--format", choices=("csv", "structured"), default="csv")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--no-impulses", action="store_true", help="skip per-record impulse tables")
    r.set_defaults(func=cmd_run)

    i = sub.add_parser("impulse", help="aggregate and per-relay responses at one user position")
    common(i)
    position(i)
    i.add_argument("--method", choices=("direct", "sequential", "ooc"))
    i.add_argument("--out", type=Path, help="directory for time_ns,value tables")
    i.set_defaults(func=cmd_impulse)

    pr = sub.add_parser("probe", help="simulate a delay-measurement protocol at one position")
    common(pr)
    position(pr)
    pr.add_argument("--method", choices=("sequential", "ooc"), default="sequential")
    pr.add_argument("--regime", choices=("synthetic", "dispersive"))
    pr.set_defaults(func=cmd_probe)

    o = sub.add_parser("ooc", help="print an optical orthogonal code family")
    o.add_argument("--n", type=int, default=73)
    o.add_argument("--w", type=int, default=3)
    o.add_argument("--lambda", dest="lam", type=int, default=1)
    o.add_argument("--count", type=int, help="stop after this many codewords")
    o.set_defaults(func=cmd_ooc)

    orc = sub.add_parser("oracle", help="compare the production channel engine with the naive loop engine")
    common(orc)
    position(orc)
    orc.add_argument("--element-side", type=float, default=0.5)
    orc.add_argument("--bounces", type=int, choices=(0, 1, 2), default=2)
    orc.add_argument("--relays", type=int, default=2, help="relay links to include besides tx->user")
    orc.add_argument("--rtol", type=float, default=1e-9)
    orc.set_defaults(func=cmd_oracle)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NoSignalError as exc:
        log.error("no signal: %s", exc)
        return EXIT_NO_SIGNAL
    except InvalidArgumentError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        log.error("%s: %s", type(exc).__name__, exc)
        log.debug("traceback", exc_info=True)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
