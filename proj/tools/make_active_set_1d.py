#!/usr/bin/env python3
"""Writes a SYNTHETIC one-dimensional dataset of 32 rows on [0, 1] for
L = 1, T = 0, m = 1.1, theta = 0.75.

Rows D31 = (0.3, 1) and D32 = (0.7, 1) fix the Markov maximum 1.3, reached
at both ends of the interval. The other thirty rows lie between them, well
inside both cones, and each one alone gives a smaller failure bound than
D31 or D32 alone.
"""
import argparse
import csv
import math


def rows():
    out = []
    for i in range(30):
        x = 0.32 + 0.36 * i / 29
        g = 1.0 + 0.4 * min(x - 0.3, 0.7 - x) * math.cos(5.0 * x)
        out.append((round(x, 6), round(g, 6)))
    out.append((0.3, 1.0))
    out.append((0.7, 1.0))
    return [[f"D{n + 1:02d}", x, g] for n, (x, g) in enumerate(out)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("output")
    args = ap.parse_args()
    with open(args.output, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["label", "x", "g"])
        w.writerows(rows())


if __name__ == "__main__":
    main()
