#!/usr/bin/env python3
"""ECDF of per-subcarrier post-combining SNR at a low and a mid SNR point.

Writes ecdf.csv and ecdf.svg under --out (default results/ecdf).
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from chest.cli import main

if __name__ == "__main__":
    argv = ["ecdf", "--out", "results/ecdf", "--snr=-10,5"]
    sys.exit(main(argv + sys.argv[1:]))
