#!/usr/bin/env python3
"""Overhead-adjusted rate and NMSE versus pilot count on a 256-subcarrier grid.

The point of the sweep: with a twin prior, two pilots already beat the best
LS operating point. Pass --full-scale to widen to 2048 subcarriers.
Writes pilot.csv, pilot_nmse.svg, pilot_se.svg under --out.
"""
import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from chest.cli import main

CONFIG = {
    "system": {"n_rx": 16, "n_subcarriers": 256, "cp_length": 128, "n_pilots": 32},
}

if __name__ == "__main__":
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as fh:
        json.dump(CONFIG, fh)
        cfg = fh.name
    argv = ["pilot-sweep", "--config", cfg, "--out", "results/pilot",
            "--snr=-15,0,15"]
    sys.exit(main(argv + sys.argv[1:]))
