"""Command-line front end: ``glauber-corr <subcommand> --config run.toml --out DIR``.

Exit status is 0 iff every audit of the run passes; 2 flags a configuration
or regime error.
"""

from __future__ import annotations

import argparse
import sys

from .lattice import DomainError
from .regime import RegimeError
from .runner import ConfigError, compare, load_config, run

SUBCOMMANDS = {
    "validate-regime": "regime-report",
    "evolve": "evolve",
    "fixed-point": "fixed-point",
    "mc-sim": "mc-compare",
    "check-positivity": "positivity",
    "ergodicity": "ergodicity",
}


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glauber-corr",
                                     description="Correlation-function evolution of Glauber dynamics")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, scenario in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"run the {scenario} scenario")
        p.add_argument("--config", required=True, help="TOML experiment config")
        p.add_argument("--out", help="output directory (default: config 'output' or out-<scenario>)")
        p.add_argument("--seed", type=_u64, help="override the config seed")
        p.add_argument("--quiet", action="store_true", help="print nothing on success")
    p = sub.add_parser("compare", help="diff two result bundles")
    p.add_argument("bundle_a")
    p.add_argument("bundle_b")
    p.add_argument("--tol", type=float, default=1e-2, help="tolerance on trajectory differences")
    p.add_argument("--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compare":
            rep = compare(args.bundle_a, args.bundle_b, args.tol)
            if not args.quiet:
                for row in rep.rows:
                    print("  ".join(str(x) for x in row))
                print(f"{rep.kind}: max diff {rep.max_diff:.6g} -> {'PASS' if rep.passed else 'FAIL'}")
            return 0 if rep.passed else 1
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        bundle = run(cfg, SUBCOMMANDS[args.command], args.out)
    except RegimeError as exc:
        print(f"regime error: {exc.inequality} fails, margin {exc.margin:.6g}", file=sys.stderr)
        return 2
    except (ConfigError, DomainError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not args.quiet or not bundle.passed:
        for line in bundle.summary:
            print(line)
        for v in bundle.verdicts:
            print(f"[{'PASS' if v.passed else 'FAIL'}] {v.name}: value {v.value:.6g}, "
                  f"bound {v.bound:.6g}")
        print(f"bundle written to {bundle.out_dir}")
    return 0 if bundle.passed else 1


if __name__ == "__main__":
    sys.exit(main())
