"""Command-line entry point: ``qthermo run|validate|list-scenarios``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import scenarios
from .dynamics import validate_generator
from .errors import ConfigError, NumericalError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

log = logging.getLogger("qthermo")


def _resolve(config: str) -> Path:
    path = Path(config)
    if path.exists() or path.suffix == ".json":
        return path
    return scenarios.preset_path(config)


def _run_one(config: str, out: str, seed):
    summary = scenarios.run_scenario(_resolve(config), out, seed)
    return config, summary


def _guarded(fn, *args):
    try:
        return fn(*args), EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return None, EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return None, EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return None, EXIT_IO


def cmd_run(args) -> int:
    status = EXIT_OK
    if args.jobs > 1 and len(args.configs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_guarded, _run_one, c, args.out, args.seed) for c in args.configs]
            results = [f.result() for f in futures]
    else:
        results = [_guarded(_run_one, c, args.out, args.seed) for c in args.configs]
    for result, code in results:
        if code != EXIT_OK:
            status = status or code
            continue
        config, summary = result
        checks = ", ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in sorted(summary.checks.items()))
        print(f"{config}: {summary.scenario} -> {summary.outputs['csv']} ({checks})")
    return status


def _validate(config: str) -> str:
    doc = scenarios.load_config(_resolve(config))
    cfg = scenarios.parse_config(doc)
    lines = [f"{config}: valid {cfg.kind} scenario"]
    if cfg.kind in ("closed-bipartite-exchange", "qubit-thermal-bath"):
        gen = scenarios.build_generator(cfg)
        report = validate_generator(gen, [cfg.t0, cfg.t1])
        lines.append(f"  channels: {len(gen.channels)}, regime: {report.regime}")
        lines.append(f"  dissipator basis: {'orthonormal' if report.basis.passed else 'NOT orthonormal'}")
        lines.extend(f"    {msg}" for msg in report.basis.failures)
    return "\n".join(lines)


def cmd_validate(args) -> int:
    status = EXIT_OK
    for config in args.configs:
        text, code = _guarded(_validate, config)
        if code:
            status = status or code
        else:
            print(text)
    return status


def cmd_list(args) -> int:
    for name in scenarios.preset_names():
        doc = json.loads(scenarios.preset_path(name).read_text(encoding="utf-8"))
        print(f"{name:24s} {doc['scenario']:28s} {doc.get('description', '')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qthermo", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run scenario configs (paths or preset names)")
    run.add_argument("configs", nargs="+")
    run.add_argument("--out", default=".", help="output directory")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--jobs", type=int, default=1, help="run independent configs concurrently")
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check configs without running them")
    val.add_argument("configs", nargs="+")
    val.set_defaults(func=cmd_validate)

    lst = sub.add_parser("list-scenarios", help="list shipped scenario presets")
    lst.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        print("config error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
