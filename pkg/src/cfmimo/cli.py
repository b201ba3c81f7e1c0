"""Command line front end.

    simulate --config run.json [--drops D] [--seed S] [--oracle T]
             [--sweep axis=v1,v2,...] [--out DIR] [--set key=value ...]
    simulate plot --results DIR [--out DIR]

Exit codes: 0 success, 2 configuration error, 3 closed form and simulation
disagree beyond the configured tolerance.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import ConfigError, RunConfig
from .harness import consistency_pass, run_experiment, sweep


def _parse_value(text: str):
    """JSON literal when possible, else the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _parse_sweep(spec: str):
    axis, sep, rest = spec.partition("=")
    if not sep or not rest:
        raise ConfigError("--sweep expects axis=v1,v2,...")
    return axis, [_parse_value(tok) for tok in rest.split(",")]


def _run_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simulate",
                                description="Cell-free massive MIMO SE/EE runs "
                                            "under channel aging")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--drops", type=int, help="override the drop count")
    p.add_argument("--seed", type=int, help="override the base seed")
    p.add_argument("--oracle", type=int, metavar="TRIALS",
                   help="run the closed-form vs simulation check with this "
                        "many trials")
    p.add_argument("--sweep", metavar="AXIS=V1,V2,...",
                   help="sweep one axis instead of a single run")
    p.add_argument("--out", help="output directory (default from config)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   dest="overrides", help="override a config key by dotted path")
    p.add_argument("--workers", type=int, help="parallel drop workers")
    return p


def _cmd_run(argv) -> int:
    args = _run_parser().parse_args(argv)
    cfg = RunConfig.load(args.config)
    for item in args.overrides:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError("--set expects key=value")
        cfg.override(key, _parse_value(val))
    if args.drops is not None:
        cfg.override("drops", args.drops)
    if args.seed is not None:
        cfg.override("seed", args.seed)
    if args.workers is not None:
        cfg.override("workers", args.workers)
    if args.oracle is not None:
        cfg.override("trials", args.oracle)
    out_dir = args.out if args.out is not None else cfg.out_dir

    if args.sweep is not None:
        axis, values = _parse_sweep(args.sweep)
        if cfg.trials > 0:
            rows, max_rel = consistency_pass(cfg)
            ok = max_rel <= cfg.oracle_rel_tol
            print(f"consistency: max relative error {max_rel:.3%} "
                  f"({'ok' if ok else 'FAIL'} at {cfg.oracle_rel_tol:.1%})")
            if not ok:
                return 3
        sweep(cfg, axis, values, out_dir=out_dir)
        print(f"wrote sweep_{axis}.csv to {out_dir}")
        return 0

    result = run_experiment(cfg, out_dir=out_dir)
    for sch, s in result.summary().items():
        print(f"{sch}: median {s['median']:.3f}, 5% {s['p05']:.3f} bits/s/Hz")
    if result.energy is not None:
        print(f"energy: total {result.energy.p_total:.1f} W, "
              f"EE {result.energy.ee / 1e6:.2f} Mbit/J")
    if result.oracle_passed is not None:
        state = "ok" if result.oracle_passed else "FAIL"
        print(f"consistency: max relative error {result.oracle_max_rel_err:.3%} "
              f"({state} at {cfg.oracle_rel_tol:.1%})")
    print(f"wrote {len(result.files)} files to {result.out_dir}")
    return 3 if result.oracle_passed is False else 0


def _cmd_plot(argv) -> int:
    p = argparse.ArgumentParser(prog="simulate plot",
                                description="Render figures from a results "
                                            "directory")
    p.add_argument("--results", required=True, help="directory with run outputs")
    p.add_argument("--out", help="where to put the PNGs (default: results dir)")
    args = p.parse_args(argv)
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("plotting needs matplotlib (pip install cfmimo[plot])", file=sys.stderr)
        return 2
    res_dir = args.results
    out_dir = args.out if args.out is not None else res_dir
    if not os.path.isdir(res_dir):
        raise ConfigError(f"not a directory: {res_dir}")
    os.makedirs(out_dir, exist_ok=True)
    import csv as _csv
    made = []

    cdf_files = sorted(f for f in os.listdir(res_dir)
                       if f.startswith("cdf_") and f.endswith(".csv"))
    if cdf_files:
        fig, ax = plt.subplots(figsize=(5.5, 4))
        for name in cdf_files:
            with open(os.path.join(res_dir, name)) as fh:
                rows = list(_csv.DictReader(fh))
            ax.plot([float(r["se_bits_per_hz"]) for r in rows],
                    [float(r["cdf"]) for r in rows],
                    label=name[len("cdf_"):-len(".csv")])
        ax.set_xlabel("SE (bits/s/Hz)")
        ax.set_ylabel("CDF")
        ax.legend()
        ax.grid(alpha=0.3)
        fig.savefig(os.path.join(out_dir, "cdf.png"), dpi=150, bbox_inches="tight")
        plt.close(fig)
        made.append("cdf.png")

    for name in sorted(f for f in os.listdir(res_dir)
                       if f.startswith("sweep_") and f.endswith(".csv")):
        axis = name[len("sweep_"):-len(".csv")]
        with open(os.path.join(res_dir, name)) as fh:
            rows = list(_csv.DictReader(fh))
        med = [r for r in rows if r["statistic"] == "median"]
        fig, ax = plt.subplots(figsize=(5.5, 4))
        for sch in sorted({r["scheme"] for r in med}):
            pts = [r for r in med if r["scheme"] == sch]
            ax.errorbar([float(r[axis]) for r in pts],
                        [float(r["value"]) for r in pts],
                        yerr=[float(r["stderr"]) for r in pts],
                        marker="o", capsize=3, label=sch)
        ax.set_xlabel(axis)
        ax.set_ylabel("median SE (bits/s/Hz)")
        ax.legend()
        ax.grid(alpha=0.3)
        png = f"sweep_{axis}.png"
        fig.savefig(os.path.join(out_dir, png), dpi=150, bbox_inches="tight")
        plt.close(fig)
        made.append(png)

    if not made:
        print(f"nothing to plot in {res_dir}", file=sys.stderr)
        return 2
    print(f"wrote {', '.join(made)} to {out_dir}")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "plot":
            return _cmd_plot(argv[1:])
        return _cmd_run(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
