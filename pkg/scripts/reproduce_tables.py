#!/usr/bin/env python3
"""Regenerate the finite-horizon threshold tables and the welfare examples.

Writes finite_k2.csv, finite_k3.csv and welfare_examples.csv (plus manifest
and diagnostics sidecars) into the output directory, default ./out.
"""
import sys
from pathlib import Path

from searchcontest.cli import main


def run(out_dir: str = "out") -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rc = 0
    rc |= main(["table", "finite_k2", "--out", str(out / "finite_k2.csv")])
    rc |= main(["table", "finite_k3", "--out", str(out / "finite_k3.csv")])
    rc |= main(["table", "welfare_examples", "--n", "2", "--cost", "0.1",
                "--out", str(out / "welfare_examples.csv")])
    return rc


if __name__ == "__main__":
    sys.exit(run(*sys.argv[1:]))
