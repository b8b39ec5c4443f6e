#!/usr/bin/env python3
"""
Run an experiment config from a source checkout.

Usage:
  python run_experiment_cli.py run configs/scalar_quartic.json
  python run_experiment_cli.py run configs/path_quartic.json --sweep grids=99,199
  python run_experiment_cli.py compare runs/path_quartic/run_0 runs/path_quartic/run_1
"""
import os
import sys

# Ensure rmgauss/ is importable
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from rmgauss.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
