"""``marketfield`` command line.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .config import FORMATS, RunConfig, load_config
from .errors import ConfigError
from .figures import run_demand, run_figure
from .verify import DEFAULT_TOLERANCES, run_checks


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser():
    parser = _Parser(prog="marketfield", description="Choice-field soliton figures and verification.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fig = sub.add_parser("figure", help="regenerate one of figures 1-8")
    fig.add_argument("id", type=int, choices=range(1, 9), metavar="{1-8}")
    fig.add_argument("--config", metavar="PATH")
    fig.add_argument("--out", metavar="DIR")
    fig.add_argument("--format", choices=FORMATS)

    dem = sub.add_parser("demand", help="emit the demand-circle family")
    dem.add_argument("--config", metavar="PATH")
    dem.add_argument("--out", metavar="DIR")

    ver = sub.add_parser("verify", help="run the numerical self-checks")
    ver.add_argument("--config", metavar="PATH")
    ver.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
    return parser


def _config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        return load_config(path)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror or exc}") from None


def _tolerances(items):
    out = {}
    for item in items:
        name, sep, raw = item.partition("=")
        name = name.strip()
        if not sep or name not in DEFAULT_TOLERANCES:
            raise ConfigError(f"bad --tol {item!r}; known checks: {', '.join(DEFAULT_TOLERANCES)}")
        try:
            out[name] = float(raw)
        except ValueError:
            raise ConfigError(f"tolerance for {name} is not a number: {raw!r}") from None
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config(args.config)
        if args.command == "figure":
            for path in run_figure(args.id, config, out_dir=args.out, fmt=args.format):
                print(path)
            return 0
        if args.command == "demand":
            for path in run_demand(config, out_dir=args.out):
                print(path)
            return 0
        tolerances = _tolerances(args.tol)
    except ConfigError as exc:
        print(f"marketfield: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"marketfield: I/O error: {exc}", file=sys.stderr)
        return 2

    results = run_checks(config, tolerances)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name:<{width}}  measured={r.measured:.3e}  tol={r.tolerance:.3e}  {r.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        return 1
    print(f"all {len(results)} checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
