#!/usr/bin/env python3
"""Write the three bundled reference-figure presets as CSV files.

Usage: python scripts/reproduce_figures.py [outdir]
"""

import sys
from pathlib import Path

from entshare.cli import main

outdir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("figures")
outdir.mkdir(parents=True, exist_ok=True)

for fig in (1, 2, 3):
    path = outdir / f"figure{fig}.csv"
    code = main(["figure", str(fig), "--out", str(path)])
    if code != 0:
        sys.exit(code)
    print(f"wrote {path}")

print("columns: exponent, lhs (joint-cut power), then one reference bound per column")
