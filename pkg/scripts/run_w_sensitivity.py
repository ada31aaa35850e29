#!/usr/bin/env python3
"""Sweep the volatility weight on the desk-scale task.

Defaults to w in {0.01, 0.05, 0.1} next to a cosine reference; pass --w to
change the grid, or any other `sweep-w` flag to forward it.
"""

import os
import sys

from schedlab.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIG = os.path.join(HERE, "desk_blobs.ini")

if __name__ == "__main__":
    args = sys.argv[1:]
    if "--w" not in args:
        args = ["--w", "0.01,0.05,0.1", *args]
    if "--out" not in args:
        args = ["--out", "results/w_sensitivity", *args]
    sys.exit(main(["sweep-w", "--config", CONFIG, *args]))
