#!/usr/bin/env python3
"""Writes the bundled SYNTHETIC impact-style dataset (h, alpha, v -> area).

The values come from a made-up ballistic-limit model plus bounded noise;
they are not measurements. The model has partial derivatives below
L = (175, 0.075, 0.1) and the noise is below T/2, so the rows are
Lipschitz-with-tolerance feasible for T = 1.
"""
import argparse
import csv
import random

H = (0.062, 0.125)
ALPHA = (0.0, 30.0)
V = (2300.0, 3200.0)


def area(h, a, v):
    limit = 2720.0 + 1625.0 * (h - H[0]) + 0.7 * a
    return max(0.0, 0.08 * (v - limit))


def rows(seed):
    rng = random.Random(seed)
    out = []
    # Columns of shots at v = 2850 and v = 3200. The largest attainable area
    # sits between the two shots of the thin, normal-incidence column, and
    # only those two cones touch it.
    for h in (H[0], 0.0935, H[1]):
        for a in ALPHA:
            out.append((h, a, 2850.0))
            out.append((h, a, V[1]))
    # Slower shots on a jittered 5 x 2 x 2 lattice below the columns.
    for i in range(5):
        for j in range(2):
            for k in range(2):
                h = H[0] + (i + rng.uniform(0.1, 0.9)) / 5 * (H[1] - H[0])
                a = ALPHA[0] + (j + rng.uniform(0.1, 0.9)) / 2 * (ALPHA[1] - ALPHA[0])
                v = V[0] + (k + rng.uniform(0.1, 0.9)) / 2 * (2800.0 - V[0])
                out.append((h, a, v))
    table = []
    for h, a, v in out:
        g = area(h, a, v)
        if g > 0.0:
            g = max(0.0, g + rng.uniform(-0.25, 0.25))
        table.append([round(h, 4), round(a, 2), round(v, 1), round(g, 3)])
    # A repeated shot with a different outcome: multi-valued data.
    rep = table[-1][:3] + [round(table[-1][3] + 0.6, 3)]
    table[-2] = rep
    return [[f"S{n + 1:02d}"] + r for n, r in enumerate(table)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("output")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    with open(args.output, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["label", "h", "alpha", "v", "area"])
        w.writerows(rows(args.seed))


if __name__ == "__main__":
    main()
