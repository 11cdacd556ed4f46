"""Command-line entry point: ``run``, ``sweep`` and ``rates`` verbs."""

import argparse
import logging
import sys
from pathlib import Path

from . import scenario as sc
from .phonon_bath import IntermediateRegime

EXIT_OK, EXIT_USAGE, EXIT_PHYSICS = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default; 2 is reserved for physics aborts
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_source(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", choices=sorted(sc.PRESETS))
    g.add_argument("--config", type=Path, help="scenario config file")
    p.add_argument("--out", type=Path, required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chainboson",
                     description="Damping/diffusion dynamics of a SQUID chain "
                                 "in a phonon bath.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True,
                                parser_class=_Parser)
    p = sub.add_parser("run", help="integrate one scenario")
    _add_source(p)
    p = sub.add_parser("sweep", help="run a scenario over one parameter")
    _add_source(p)
    p.add_argument("--axis", required=True, help="config key to vary")
    p.add_argument("--values", required=True,
                   help="comma-separated values, e.g. 0.5,1.0,1.5")
    p.add_argument("--workers", type=int, default=None)
    p = sub.add_parser("rates", help="print rate table and network only")
    _add_source(p)
    return parser


def _load(args) -> tuple[sc.ScenarioConfig, str]:
    if args.preset:
        return sc.preset(args.preset), args.preset
    return sc.parse_config(args.config.read_text()), args.config.stem


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg, label = _load(args)
        if args.verb == "run":
            report = sc.run_scenario(cfg, args.out, label)
            print(report.to_text(), end="")
        elif args.verb == "rates":
            args.out.mkdir(parents=True, exist_ok=True)
            *_, report = sc.analyse(cfg, label)
            text = report.to_text()
            (args.out / "rates.txt").write_text(text)
            print(text, end="")
        else:
            values = [float(v) for v in args.values.split(",") if v.strip()]
            reports = sc.sweep(cfg, args.axis, values, args.out, args.workers)
            for r in reports:
                comps = " ".join("{" + ",".join(map(str, c)) + "}"
                                 for c in r.components)
                edges = " ".join(f"{a}-{b}" for a, b in r.edges)
                print(f"{r.label}: {r.status.split(':')[0]}  "
                      f"components {comps}  edges {edges}")
            if any(r.status != "ok" for r in reports):
                return EXIT_PHYSICS
    except IntermediateRegime as exc:
        print(f"physics-validity abort: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except (sc.ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
