"""Two-spin Heisenberg walk on the full register at several temperatures.

Compares the sampled occupation of the singlet (E = 2) with its Gibbs
weight e^{-2 beta} / (3 + e^{-2 beta}).

    python scripts/heisenberg_demo.py --betas 0 0.5 1 2 --m 10000
"""

from __future__ import annotations

import argparse
import time

from qmetropolis.cli import heisenberg_demo


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--betas", type=float, nargs="+", default=[0.0, 0.5, 1.0, 2.0])
    p.add_argument("--m", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=1)
    args = p.parse_args()

    print(f"{'beta':>5} {'occupation':>11} {'stderr':>8} {'Gibbs':>8} {'z':>6} {'aborts':>6} {'time':>6}")
    for beta in args.betas:
        t0 = time.perf_counter()
        out = heisenberg_demo(beta, args.m, args.seed)
        print(
            f"{beta:>5.2f} {out['excited_occupation']:>11.4f} {out['stderr']:>8.4f} "
            f"{out['gibbs_prediction']:>8.4f} {out['z_score']:>6.2f} {out['aborts']:>6d} "
            f"{time.perf_counter() - t0:>5.1f}s"
        )


if __name__ == "__main__":
    main()
