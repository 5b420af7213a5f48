"""Compare the verbatim resolution learner with the backtracking variant.

The verbatim search gives up on a clause when the second recursive call for a
literal fails; the backtracking variant moves on to the next literal.  This
script counts random instances on which the two disagree and checks the
backtracking variant against the reference search over all consistent clauses.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from querylearn.generators import random_cnf, random_obscured_scene
from querylearn.oracle import all_consistent_clauses, reference_space_search
from querylearn.resolution import EMPTY, learn_search_space


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="verbatim versus backtracking learner")
    ap.add_argument("--instances", type=int, default=5000)
    ap.add_argument("--max-atoms", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--no-reference", action="store_true", help="skip the reference search")
    args = ap.parse_args(argv)

    differ = refutable = wrong = 0
    for i in range(args.instances):
        rng = np.random.default_rng([args.seed, i])
        n = int(rng.integers(1, args.max_atoms + 1))
        phi = random_cnf(rng, n, int(rng.integers(0, 2 * n + 2)))
        samples = [random_obscured_scene(rng, n, 0.35) for _ in range(int(rng.integers(1, 9)))]
        s = int(rng.integers(1, 4))
        plain = learn_search_space(phi, s, EMPTY, samples) is not None
        back = learn_search_space(phi, s, EMPTY, samples, backtrack=True) is not None
        differ += plain != back
        refutable += back
        if not args.no_reference:
            wrong += back != (reference_space_search(phi, all_consistent_clauses(samples, n), s) is not None)
    print(f"instances: {args.instances}")
    print(f"refutable (backtracking): {refutable}")
    print(f"verbatim and backtracking disagree: {differ}")
    if not args.no_reference:
        print(f"backtracking disagrees with reference: {wrong}")
    return 0 if wrong == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
