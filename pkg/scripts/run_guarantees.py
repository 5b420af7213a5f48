"""Run the Monte Carlo guarantee experiments in scripts/specs/ (or the given spec files).

    python3 scripts/run_guarantees.py
    python3 scripts/run_guarantees.py scripts/specs/res_valid.json --trials 50 --out results.json
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from querylearn.cli import load_trial_spec
from querylearn.oracle import monte_carlo_guarantee

SPECS = Path(__file__).resolve().parent / "specs"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("specs", nargs="*", help="spec JSON files (default: every file in scripts/specs)")
    ap.add_argument("--trials", type=int, help="override the trial count")
    ap.add_argument("--seed", type=int, help="override the seed")
    ap.add_argument("--out", help="write a JSON summary here")
    args = ap.parse_args(argv)

    paths = [Path(p) for p in args.specs] or sorted(SPECS.glob("*.json"))
    rows = []
    for path in paths:
        spec = load_trial_spec(path)
        if args.trials is not None:
            spec = dataclasses.replace(spec, trials=args.trials)
        if args.seed is not None:
            spec = dataclasses.replace(spec, seed=args.seed)
        start = time.perf_counter()
        report = monte_carlo_guarantee(spec)
        elapsed = time.perf_counter() - start
        print(report.format())
        print(f"elapsed: {elapsed:.1f}s\n")
        rows.append(
            {
                "name": report.name,
                "fragment": report.fragment,
                "samples_per_trial": report.samples_per_trial,
                "query_validity": str(report.query_validity),
                "proof_rate": report.proof_rate,
                "invalid_premise_rate": report.invalid_premise_rate,
                "margin": report.margin,
                "passed": report.passed,
                "seconds": round(elapsed, 2),
            }
        )
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    return 0 if all(r["passed"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
