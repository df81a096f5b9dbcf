"""Run the shipped sample plan and print the ranked report.

Usage: python scripts/run_sample_plan.py [--out DIR] [--jobs N]
"""

import argparse
import sys
from pathlib import Path

from dsekit.cli import main

PLAN = Path(__file__).resolve().parents[1] / "plans" / "sample.yaml"

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results/sample")
    parser.add_argument("--jobs", default="1")
    args = parser.parse_args()
    sys.exit(main(["run", "--plan", str(PLAN), "--out", args.out, "--jobs", args.jobs]))
