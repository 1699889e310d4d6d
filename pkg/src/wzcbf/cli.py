"""Command line runner for the named experiments.

    wzcbf <experiment> [mode] [--config PATH] [--seed N] [--out DIR] [--threads N] [--quiet]

Exit status is 0 when every embedded check passes, 2 when a check fails and
1 on an execution error.  Each run writes its CSV tables and a
``manifest.json`` (configuration, its hash, versions, produced files and
check outcomes) into the output directory.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, config_hash, run_experiment
from .fieldio import write_ensemble, write_table

MODED = ("wz-solution-convergence", "usc")


def build_parser():
    parser = argparse.ArgumentParser(prog="wzcbf", description="Wong-Zakai CBF experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        if name in MODED:
            p.add_argument("mode", choices=("additive", "multiplicative"))
        p.add_argument("--config", type=Path, help="JSON file with configuration fields")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--out", type=Path, default=Path("results"), help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker threads for independent trajectories")
        p.add_argument("--quiet", action="store_true", help="suppress the check report")
    return parser


def load_config(args):
    data = {}
    if args.config is not None:
        with open(args.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
    data["experiment"] = args.experiment
    if getattr(args, "mode", None):
        data["mode"] = args.mode
    if args.seed is not None:
        data["seed"] = args.seed
    return ExperimentConfig.from_dict(data)


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_outputs(cfg, result, out):
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for name, (cols, rows) in result.tables.items():
        path = out / f"{name}.csv"
        write_table(path, cols, rows)
        files.append(path)
    for name, ens in result.ensembles.items():
        members = []
        for t in ens.depths:
            for i, _ in enumerate(ens.ic_norms):
                members.append((ens.endpoints[(t, i)], {"depth": t, "ic": i}))
        path, index = out / f"{name}_ensemble.bin", out / f"{name}_ensemble.json"
        write_ensemble(path, index, members)
        files += [path, index]
    manifest = {
        "experiment": cfg.experiment,
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg),
        "versions": {
            "wzcbf": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "files": [{"name": p.name, "sha256": _sha256(p)} for p in files],
        "checks": [{"name": n, "passed": ok, "detail": d} for n, ok, d in result.checks],
        "passed": result.passed,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return files


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        if args.threads < 1:
            raise ConfigError("threads: must be at least 1")
        result = run_experiment(cfg, threads=args.threads)
        write_outputs(cfg, result, args.out)
    except (ConfigError, OSError, ValueError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    if not args.quiet:
        for name, ok, detail in result.checks:
            print(f"{'PASS' if ok else 'FAIL'}  {cfg.experiment}:{name}  {detail}")
    return 0 if result.passed else 2


if __name__ == "__main__":
    sys.exit(main())
