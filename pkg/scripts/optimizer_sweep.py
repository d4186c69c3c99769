#!/usr/bin/env python
"""Solve the eigenproblem over a grid of weights p and compare with the analytic curve."""
from __future__ import annotations

import argparse

import numpy as np

from metradeoff.choi import optimize
from metradeoff.fidelity import gf_residual


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--steps", type=int, default=21)
    args = p.parse_args()

    print(f"{'p':>5} {'a':>10} {'b':>10} {'F':>10} {'G':>10} {'span_res':>10} {'gf_res':>10}")
    for w in np.linspace(0, 1, args.steps):
        opt = optimize(float(w), args.dim)
        pt = opt.point
        gf = gf_residual(pt.F, pt.G, args.dim)
        print(f"{w:5.2f} {pt.a:10.6f} {pt.b:10.6f} {pt.F:10.6f} {pt.G:10.6f} {opt.residual:10.2e} {gf:10.2e}")


if __name__ == "__main__":
    main()
