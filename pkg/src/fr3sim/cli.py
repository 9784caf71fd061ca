"""Command-line front end: run / compare / dump-scenario."""

import argparse
import dataclasses
import logging
import sys

from .engine import RunSpec, compare, run
from .scenario import (STRATEGIES, ScenarioConfig, generate_topology,
                       load_scenario, save_scenario)


def _base_config(args) -> ScenarioConfig:
    if getattr(args, "config", None):
        config, _ = load_scenario(args.config)
    else:
        config = ScenarioConfig()
    if args.seed is not None:
        config.seed = args.seed
    if getattr(args, "sixg_bw", None):
        config.sixg_bandwidth_mhz = float(args.sixg_bw)
    if getattr(args, "sixg_trx", None):
        config.sixg_n_trx = args.sixg_trx
    return config


def _add_common(p, strategy_required=True):
    p.add_argument("--strategy", choices=STRATEGIES, required=strategy_required)
    p.add_argument("--sixg-bw", type=int, choices=(200, 400), default=None,
                   help="6G bandwidth in MHz")
    p.add_argument("--sixg-trx", type=int, choices=(128, 256), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", help="scenario YAML (generator config or explicit topology)")


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    ap = argparse.ArgumentParser(prog="fr3sim")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one deployment strategy")
    _add_common(p_run)
    p_run.add_argument("--snapshots", type=int, default=10)
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--power-presets", help="alternate power preset JSON")
    p_run.add_argument("--mcs-table", help="alternate MCS table JSON")

    p_cmp = sub.add_parser("compare", help="run several strategies and tabulate ratios")
    _add_common(p_cmp, strategy_required=False)
    p_cmp.add_argument("--strategies", required=True,
                       help="comma-separated strategy tags")
    p_cmp.add_argument("--baseline", default=None,
                       help="strategy tag ratios are normalized to "
                            "(default: FourG_FiveG if present, else first)")
    p_cmp.add_argument("--snapshots", type=int, default=10)
    p_cmp.add_argument("--out", required=True, help="output directory")
    p_cmp.add_argument("--power-presets")
    p_cmp.add_argument("--mcs-table")

    p_dump = sub.add_parser("dump-scenario",
                            help="generate and write an explicit topology YAML")
    _add_common(p_dump)
    p_dump.add_argument("--out", required=True, help="output YAML path")

    args = ap.parse_args(argv)
    try:
        if args.command == "run":
            config = _base_config(args)
            config.strategy = args.strategy
            spec = RunSpec(config=config, n_snapshots=args.snapshots,
                           out_dir=args.out,
                           power_presets_path=args.power_presets,
                           mcs_table_path=args.mcs_table)
            report = run(spec)
            p = report.percentiles
            print(f"{config.strategy}: mean {p['mean']:.2f} Mbps, "
                  f"p5 {p['p5']:.2f}, p50 {p['p50']:.2f}, p95 {p['p95']:.2f}, "
                  f"power {report.power_kw['total']:.1f} kW")
            print(f"reports written to {args.out}")
        elif args.command == "compare":
            import os
            tags = [t.strip() for t in args.strategies.split(",") if t.strip()]
            for t in tags:
                if t not in STRATEGIES:
                    ap.error(f"unknown strategy {t!r}")
            specs = []
            for t in tags:
                config = _base_config(args)
                config.strategy = t
                specs.append(RunSpec(
                    config=config, n_snapshots=args.snapshots,
                    out_dir=os.path.join(args.out, t),
                    power_presets_path=args.power_presets,
                    mcs_table_path=args.mcs_table))
            baseline = args.baseline or ("FourG_FiveG" if "FourG_FiveG" in tags
                                         else tags[0])
            if baseline not in tags:
                ap.error(f"baseline {baseline!r} not among strategies")
            rows = compare(specs, baseline_index=tags.index(baseline),
                           out_path=os.path.join(args.out, "comparison.csv"))
            for row in rows:
                print(f"{row['strategy']:>16}: mean {row['mean_mbps']:8.2f} Mbps "
                      f"({row['ratio_mean']:.2f}x)  power {row['power_kw']:7.1f} kW "
                      f"({row['ratio_power']:.2f}x)")
        elif args.command == "dump-scenario":
            config = _base_config(args)
            config.strategy = args.strategy
            topo = generate_topology(config)
            save_scenario(args.out, config, topo)
            print(f"wrote {len(topo.sites)} sites / {len(topo.cells)} cells "
                  f"to {args.out}")
    except Exception as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
