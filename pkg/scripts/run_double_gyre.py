#!/usr/bin/env python
"""Run the double-gyre benchmark with its stock configuration.

Fits the classical delay fit plus all four reduced variants (sampling 100,
Gaussian 200, sparse 100, Krylov 100 measurements) at rank 20 on the first
174 of 200 snapshots, then writes the report and per-variant CSVs.
"""

import sys

from delaydmd.cli import main

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "results/double-gyre"
    sys.exit(main(["run", "--problem", "double-gyre", "--seed", "0",
                   "--out", out]))
