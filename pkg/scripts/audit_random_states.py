#!/usr/bin/env python3
"""Random-state audit of the sharing inequalities, plus W-state sweeps.

Runs the three-qubit fuzz battery (monogamy at y=2 and the weighted pair
bound at y=3 for concurrence, base polygamy at powers 1 and 2 for the
assistance measure) and then sweeps the two W-state examples from first
principles. Exit code 1 if any fuzz violation appears.

Usage: python scripts/audit_random_states.py [samples] [seed]
"""

import sys

from entshare.cli import main

samples = sys.argv[1] if len(sys.argv) > 1 else "500"
seed = sys.argv[2] if len(sys.argv) > 2 else "20240817"

code = main(["fuzz", "--samples", samples, "--dims", "2,2,2", "--seed", seed,
             "--out", "fuzz_report.json"])
print(f"fuzz report -> fuzz_report.json (exit {code})")

main(["sweep", "--family", "w5", "--measure", "tau_assistance", "--side", "polygamy",
      "--grid", "0.1:2:0.1", "--seed", seed, "--out", "w5_polygamy_sweep.csv"])
print("w5 first-principles polygamy sweep -> w5_polygamy_sweep.csv")

main(["sweep", "--family", "w4", "--measure", "concurrence", "--side", "monogamy",
      "--grid", "2:6:0.1", "--seed", seed, "--out", "w4_monogamy_sweep.csv"])
print("w4 first-principles monogamy sweep -> w4_monogamy_sweep.csv")

sys.exit(code)
