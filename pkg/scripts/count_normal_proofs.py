"""Enumerate normal treelike refutations and compare with the counting bounds.

For each (N, s) the script prints the number of distinct normal proofs of
the empty clause with pebbling space at most s, the range of proof sizes seen
and the analytic bounds on size and count.  Each proof is also checked
against the size lower bound implied by its own pebbling space.
"""
from __future__ import annotations

import argparse
import sys
import time

from querylearn.oracle import enumerate_normal_proofs, pebbling_space
from querylearn.resolution import count_bounds

DEFAULT_PAIRS = ["2,1", "2,2", "3,2", "3,3", "4,2", "4,3"]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="normal proof counts versus bounds")
    ap.add_argument("pairs", nargs="*", default=DEFAULT_PAIRS, help="N,s pairs")
    args = ap.parse_args(argv)

    print(f"{'N':>2} {'s':>2} {'proofs':>8} {'bound':>14} {'k range':>10} {'k max':>8} {'ok':>3} {'time':>6}")
    all_ok = True
    for pair in args.pairs:
        n, s = (int(v) for v in pair.split(","))
        start = time.perf_counter()
        proofs = enumerate_normal_proofs(n, s)
        b = count_bounds(n, s)
        sizes = [p.size() for p in proofs]
        ok = len(proofs) <= b.max_proofs_floor and all(
            2 ** pebbling_space(p.root) - 1 <= p.size() <= b.max_k_floor for p in proofs
        )
        all_ok &= ok
        k_range = f"{min(sizes)}..{max(sizes)}" if sizes else "-"
        print(
            f"{n:>2} {s:>2} {len(proofs):>8} {b.max_proofs_floor:>14} {k_range:>10} "
            f"{b.max_k_floor:>8} {'yes' if ok else 'NO':>3} {time.perf_counter() - start:>5.1f}s"
        )
    return 0 if all_ok else 1


if __name__ == "__main__":
    sys.exit(main())
