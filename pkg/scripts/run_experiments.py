#!/usr/bin/env python
"""Run each experiment driver once over the bundled scenarios and print summaries."""
import argparse

from dpe_multipath import ExperimentConfig, ExperimentKind, Space, make_reference_scenario
from dpe_multipath import mc


def show(title: str, report) -> bool:
    n_pass = sum(1 for c in report.checks if c.passed)
    print(f"{title}: {'PASS' if report.passed else 'FAIL'} "
          f"({n_pass}/{len(report.checks)} checks, {len(report.rows)} rows)")
    for c in report.checks:
        if not c.passed:
            print(f"  FAIL {c.name}: expected {c.expected}, got {c.actual} (tol {c.tol})")
    return report.passed


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=mc.REFERENCE_SEED)
    args = ap.parse_args()

    ok = show(
        "elevation sweep",
        ExperimentConfig(kind=ExperimentKind.ELEVATION_SWEEP).run(),
    )
    ok &= show(
        "azimuth monte carlo",
        ExperimentConfig(
            kind=ExperimentKind.AZIMUTH_MC, trials=args.trials, seed=args.seed
        ).run(),
    )
    for case in ("case1", "case2", "case3", "table6"):
        ok &= show(
            f"case study {case}",
            ExperimentConfig(
                kind=ExperimentKind.CASE_STUDY,
                scenario=make_reference_scenario(case),
                case_id=case,
            ).run(),
        )
    for case in ("case1", "case3", "table6"):
        ok &= show(
            f"oracle compare {case} (position)",
            ExperimentConfig(
                kind=ExperimentKind.ORACLE_COMPARE,
                scenario=make_reference_scenario(case),
            ).run(),
        )
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
