"""Command line entry point: ``mmbloat run|list|validate``."""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, ScenarioConfig, load_config
from .harness import run_scenario
from .scenarios import builtin_scenarios, get_scenario, scenario_names

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2


def resolve(target: str) -> ScenarioConfig:
    """Builtin scenario name, or a path to a JSON config file."""
    if target in scenario_names():
        return get_scenario(target)
    path = Path(target)
    if path.exists():
        return load_config(path)
    raise ConfigError("scenario", f"{target!r} is neither a builtin scenario nor a config file")


def _format_summary(log) -> str:
    lines = [f"{log.scenario}:"]
    for row in log.summary_rows():
        fid, ue, kind = row[0], row[1], row[2]
        goodput, mean_rtt, p95 = row[6], row[7], row[8]
        lines.append(f"  {fid:>4} {ue:>4} {kind:<5} goodput {goodput / 1e6:9.1f} Mbps  "
                     f"rtt mean {mean_rtt * 1e3:7.1f} ms  p95 {p95 * 1e3:7.1f} ms  "
                     f"p95/time {row[10] * 1e3:7.1f} ms  losses {row[11]}")
    return "\n".join(lines)


def _run_one(cfg: ScenarioConfig, out: Optional[str]) -> str:
    log = run_scenario(cfg, out)
    return _format_summary(log)


def cmd_run(args) -> int:
    try:
        cfgs = []
        for target in args.targets:
            cfg = resolve(target)
            if args.seed is not None:
                cfg.seed = args.seed
            if args.set:
                cfg = cfg.with_overrides(args.set)
            cfgs.append(cfg.validate())
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    outs: list[Optional[str]] = []
    for cfg in cfgs:
        if args.out is None:
            outs.append(None)
        elif len(cfgs) == 1:
            outs.append(args.out)
        else:
            outs.append(str(Path(args.out) / cfg.name))
    try:
        if args.jobs > 1 and len(cfgs) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_run_one, cfgs, outs))
        else:
            results = [_run_one(c, o) for c, o in zip(cfgs, outs)]
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for text in results:
        print(text)
    return EXIT_OK


def cmd_list(args) -> int:
    for cfg in builtin_scenarios():
        print(f"{cfg.name:<22} {cfg.duration:6.1f} s  {cfg.description}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        cfg = resolve(args.config)
        if args.set:
            cfg = cfg.with_overrides(args.set)
        cfg.validate()
    except ConfigError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ValueError) as exc:
        print(f"cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print(f"ok: {cfg.name}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmbloat",
                                description="TCP over intermittent mmWave links: queue and "
                                            "receive-window experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run builtin scenarios or config files")
    run.add_argument("targets", nargs="+", metavar="scenario|config")
    run.add_argument("--out", help="output directory (one subdirectory per target when several)")
    run.add_argument("--seed", type=int)
    run.add_argument("--set", action="append", default=[], metavar="path=value",
                     help="override a config field, e.g. ues.0.queue=codel")
    run.add_argument("--jobs", type=int, default=1, help="parallel scenario runs")
    run.set_defaults(func=cmd_run)

    ls = sub.add_parser("list", help="list builtin scenarios")
    ls.set_defaults(func=cmd_list)

    val = sub.add_parser("validate", help="check a config file or scenario name")
    val.add_argument("config")
    val.add_argument("--set", action="append", default=[], metavar="path=value")
    val.set_defaults(func=cmd_validate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
