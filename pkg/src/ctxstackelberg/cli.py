"""Command-line entry point.

Subcommands::

    run      play one algorithm against one scenario for several seeds
    sweep    repeat a run config over several horizons and fit the regret exponent
    regions  dump the best-response regions and extreme points of one context
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ._validation import ConfigurationError, InstanceFormatError
from .environments import SCENARIOS
from .game import Context, FiniteContexts
from .geometry import region_report
from .harness import resolve_instance, run_experiment, run_sweep
from .learners import ALGORITHMS


def build_parser():
    parser = argparse.ArgumentParser(prog="ctxstackelberg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--instance", help="instance JSON file or builtin:<name> (optional for olt-lower-bound)")
    run.add_argument("--scenario", required=True, choices=SCENARIOS)
    run.add_argument("--alg", required=True, choices=ALGORITHMS)
    run.add_argument("--T", type=int, required=True, help="horizon")
    run.add_argument("--seeds", type=int, default=1, help="number of replicates")
    run.add_argument("--seed", type=int, default=0, help="base seed")
    run.add_argument("--delta", type=float)
    run.add_argument("--eta", type=float)
    run.add_argument("--M", type=int, help="weight-grid resolution")
    run.add_argument("--N", type=int, help="exploration rounds per spanner element")
    run.add_argument("--Z", type=int, help="number of blocks")
    run.add_argument("--follower-probs", type=float, nargs="+", help="stochastic follower distribution")
    run.add_argument("--out", default="out", help="output directory")

    sweep = sub.add_parser("sweep", help="scaling study over several horizons")
    sweep.add_argument("--config", required=True, help="JSON config with a list-valued 'T'")
    sweep.add_argument("--out", help="output directory (overrides the config)")

    regions = sub.add_parser("regions", help="print the region report of one context")
    regions.add_argument("--instance", required=True)
    regions.add_argument("--context", required=True,
                         help="context label, or comma-separated vector for box instances")
    regions.add_argument("--delta", type=float, default=1e-3)
    return parser


def _context(game, spec):
    space = game.context_space
    if isinstance(space, FiniteContexts):
        for z in space.contexts:
            if z.label == spec:
                return z
        raise ConfigurationError(f"context: unknown label {spec!r}")
    try:
        return Context(tuple(float(v) for v in spec.split(",")))
    except ValueError:
        raise ConfigurationError(f"context: expected a comma-separated vector, got {spec!r}") from None


def _cmd_run(args):
    config = {
        "instance": args.instance, "scenario": args.scenario, "alg": args.alg, "T": args.T,
        "seeds": args.seeds, "seed": args.seed, "delta": args.delta, "eta": args.eta,
        "M": args.M, "N": args.N, "Z": args.Z, "follower_probs": args.follower_probs, "out": args.out,
    }
    agg, _ = run_experiment(config)
    print(f"T={args.T} seeds={args.seeds} mean R(T)={agg['mean_regret'][-1]:.4f} "
          f"R(T)/T={agg['mean_avg_regret'][-1]:.4f} -> {args.out}")


def _cmd_sweep(args):
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"config: cannot read {args.config}: {exc}") from None
    summary = run_sweep(config, args.out)
    print(f"slope={summary['slope']:.3f} +- {summary['slope_stderr']:.3f}")


def _cmd_regions(args):
    game, _ = resolve_instance(args.instance, None)
    z = _context(game, args.context)
    print(json.dumps(region_report(game, z, args.delta), indent=2))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        {"run": _cmd_run, "sweep": _cmd_sweep, "regions": _cmd_regions}[args.command](args)
    except (ConfigurationError, InstanceFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
