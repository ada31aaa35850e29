#!/usr/bin/env python3
"""Run the desk-scale scheduler comparison and print where the CSVs landed.

Any extra arguments are forwarded to the `compare` subcommand, so e.g.
`scripts/run_desk_experiment.py --jobs 4 --out /tmp/desk` works.
"""

import os
import sys

from schedlab.cli import main

HERE = os.path.dirname(os.path.abspath(__file__))
CONFIG = os.path.join(HERE, "desk_blobs.ini")

if __name__ == "__main__":
    sys.exit(main(["compare", "--config", CONFIG, *sys.argv[1:]]))
