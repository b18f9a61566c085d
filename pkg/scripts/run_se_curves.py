#!/usr/bin/env python3
"""Genie-aided spectral efficiency versus SNR against the ideal-CSI curve.

Writes se.csv and se.svg under --out (default results/se). Any chest CLI
flag can be appended, e.g. --full-scale or --trials 100.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from chest.cli import main

if __name__ == "__main__":
    argv = ["se-sweep", "--out", "results/se"]
    sys.exit(main(argv + sys.argv[1:]))
