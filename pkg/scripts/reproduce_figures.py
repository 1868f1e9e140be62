#!/usr/bin/env python3
"""Write the three sweep tables (with manifests) into one directory.

    python scripts/reproduce_figures.py [outdir]
"""
import sys
from pathlib import Path

from lossqfi.cli import main


def run(outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    for fig in ("fig1", "fig2l", "fig2r"):
        code = main(["sweep", fig, "--out", str(outdir / f"sweep_{fig}.csv")])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(run(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("figures")))
