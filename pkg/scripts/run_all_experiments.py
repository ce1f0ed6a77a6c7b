#!/usr/bin/env python3
"""Run every registered experiment with one seed and print a verdict table.

Usage: python scripts/run_all_experiments.py [--seed S] [--out DIR] [--jobs N]
"""

import argparse
import sys
import time

from gfflab.cli import _KEY_TABLE, ExperimentConfig, validate_config, write_result
from gfflab.experiments import EXPERIMENT_DEFAULTS, EXPERIMENTS, ExperimentResult


def configure(name: str, seed: int, out_dir: str, jobs: int) -> ExperimentConfig:
    cfg = ExperimentConfig(experiment=name, seed=seed, jobs=jobs)
    cfg.output = f"{out_dir}/{name}"
    for key, value in EXPERIMENT_DEFAULTS.get(name, {}).items():
        field, parser = _KEY_TABLE[key]
        setattr(cfg, field, parser(value))
    validate_config(cfg)
    return cfg


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="out")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    failures = []
    print(f"{'experiment':<22} {'verdict':<8} {'seconds':>8}")
    for name in sorted(EXPERIMENTS):
        cfg = configure(name, args.seed, args.out, args.jobs)
        start = time.perf_counter()
        result: ExperimentResult = EXPERIMENTS[name](cfg)
        elapsed = time.perf_counter() - start
        write_result(result, cfg.output)
        print(f"{name:<22} {'PASS' if result.passed else 'FAIL':<8} {elapsed:>8.2f}")
        if not result.passed:
            failures.append(name)
    if failures:
        print(f"failed: {', '.join(failures)}")
        return 1
    print("all experiments passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
