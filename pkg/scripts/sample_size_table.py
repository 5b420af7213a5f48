"""Print sample sizes for both fragments over a grid of N, epsilon and eta."""
from __future__ import annotations

import argparse

from querylearn.chaining import sample_size_chaining
from querylearn.resolution import sample_size_resolution


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--space", type=int, default=2)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    ap.add_argument("--eta", type=float, nargs="+", default=[1.0, 0.5, 0.1])
    ap.add_argument("--atoms", type=int, nargs="+", default=[4, 8, 16, 32])
    args = ap.parse_args(argv)

    header = f"{'N':>4} {'eps':>5} {'eta':>5} {'chaining':>10} {'res s=' + str(args.space):>14}"
    print(f"delta = {args.delta}")
    print(header)
    for n in args.atoms:
        for eps in args.eps:
            for eta in args.eta:
                mc = sample_size_chaining(n, eps, args.delta, eta)
                mr = sample_size_resolution(n, args.space, eps, args.delta, eta) if args.space <= n else "-"
                print(f"{n:>4} {eps:>5} {eta:>5} {mc:>10} {mr:>14}")


if __name__ == "__main__":
    main()
