"""Inverse spectral gap of the zero-temperature walk on the open XX chain.

Prints the dense gap for N = 2..7 at several fields next to the inverse
boundary weight of the lowest single-fermion mode, (N + 1) / (2 sin^2(pi / (N + 1))),
and flags sizes where a second stationary state makes the gap vanish.

    python scripts/gap_scan.py --fields 0.3 0.5 1.0 --nmax 7 --out gaps.csv
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from qmetropolis.cli import gap_scan_rows, rows_to_csv


def boundary_mode_prediction(n: int) -> float:
    return (n + 1) / (2 * math.sin(math.pi / (n + 1)) ** 2)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--fields", type=float, nargs="+", default=[0.3, 0.5, 0.7, 1.0, 1.5])
    p.add_argument("--nmax", type=int, default=7)
    p.add_argument("--out", default=None)
    args = p.parse_args()

    ns = list(range(2, args.nmax + 1))
    all_rows = []
    for g in args.fields:
        t0 = time.perf_counter()
        rows = gap_scan_rows(ns, g, math.inf)
        print(f"g = {g}  ({time.perf_counter() - t0:.1f}s)")
        print(f"  {'N':>2} {'1/gap':>10} {'boundary mode':>14}")
        for row in rows:
            n, inv = row["N"], row["inverse_gap"]
            note = "  second fixed point" if math.isinf(inv) else ""
            print(f"  {n:>2} {inv:>10.4f} {boundary_mode_prediction(n):>14.4f}{note}")
            all_rows.append({"g": g, **row})
        inv = np.array([r["inverse_gap"] for r in rows])
        ok = np.isfinite(inv)
        if ok.sum() > 1:
            slope = np.polyfit(np.log(np.array(ns)[ok]), np.log(inv[ok]), 1)[0]
            print(f"  log-log slope over finite points: {slope:.2f}")
    if args.out:
        header = ["g", "N", "gap", "inverse_gap", "dim", "mode", "truncation_tail"]
        with open(args.out, "w") as fh:
            fh.write(rows_to_csv(all_rows, header))


if __name__ == "__main__":
    main()
