#!/usr/bin/env python3
"""NMSE versus SNR for all four estimators, with the analytic curve overlaid.

Desk scale (16 antennas) runs in seconds; pass --full-scale for the
64-antenna configuration. Writes nmse.csv and nmse.svg under --out.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from chest.cli import main

if __name__ == "__main__":
    argv = ["nmse-sweep", "--out", "results/nmse"]
    sys.exit(main(argv + sys.argv[1:]))
