#!/usr/bin/env python
"""Regenerate the bundled scenario fixtures from the reference builders."""
import sys
from pathlib import Path

from dpe_multipath.cli import load_scenario, write_scenario
from dpe_multipath.mc import make_reference_scenario

NAMES = ("table1", "case1", "case2", "case3", "table6")


def main() -> int:
    outdir = Path(__file__).resolve().parents[1] / "src" / "dpe_multipath" / "scenarios"
    outdir.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        scenario = make_reference_scenario(name)
        path = outdir / f"{name}.scenario"
        write_scenario(scenario, path)
        if load_scenario(path) != scenario:
            print(f"{name}: round trip mismatch", file=sys.stderr)
            return 1
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
