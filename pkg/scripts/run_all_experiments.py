#!/usr/bin/env python3
"""Run every bundled CLI experiment config into out/<name>/."""

import sys
from pathlib import Path

from qsd.cli import main as qsd_main
from qsd.config import ExperimentConfig

ROOT = Path(__file__).resolve().parent.parent


def main():
    failures = 0
    for cfg_path in sorted((ROOT / "configs").glob("*.cfg")):
        cfg = ExperimentConfig.from_file(cfg_path)
        kind = cfg.get_str("experiment", "kind")
        out = ROOT / "out" / cfg_path.stem
        print(f"== {kind}: {cfg_path.name} -> {out}")
        rc = qsd_main([kind, "--config", str(cfg_path), "--out", str(out)])
        failures += rc != 0
    print(f"done, {failures} failing experiment(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
