#!/usr/bin/env python
"""Monte-Carlo fidelities of the discrete and covariant optimal instruments."""
from __future__ import annotations

import argparse

import numpy as np

from metradeoff.fidelity import closed_form_F, closed_form_G, mc_fidelities
from metradeoff.haar import SeededStream
from metradeoff.instrument import OptimalParams, optimal_discrete_instrument, optimal_seed


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=int, default=1)
    args = p.parse_args()

    print("kind,a,F_closed,F_mc,F_sigmas,G_closed,G_mc,G_sigmas")
    for k, a in enumerate(np.linspace(0, 1, 5)):
        params = OptimalParams.from_a(float(a), args.dim)
        F0, G0 = closed_form_F(params.a, args.dim), closed_form_G(params.a, args.dim)
        for kind, instr in (("discrete", optimal_discrete_instrument(params)), ("covariant", optimal_seed(params))):
            F, G = mc_fidelities(instr, args.samples, SeededStream(args.seed, k), jobs=args.jobs)
            print(f"{kind},{a:.2f},{F0:.6f},{F.value:.6f},{F.sigmas(F0):.2f},{G0:.6f},{G.value:.6f},{G.sigmas(G0):.2f}")


if __name__ == "__main__":
    main()
