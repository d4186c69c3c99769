#!/usr/bin/env python
"""Write the optimal I-D tradeoff curves for d = 2, 4, 8 as CSV files."""
from __future__ import annotations

import argparse
from pathlib import Path

from metradeoff.cli import main as cli_main


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--outdir", type=Path, default=Path("results"))
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--dims", type=int, nargs="+", default=[2, 4, 8])
    args = p.parse_args()

    args.outdir.mkdir(parents=True, exist_ok=True)
    for d in args.dims:
        out = args.outdir / f"tradeoff_d{d}.csv"
        code = cli_main(["curve", "--dim", str(d), "--points", str(args.points), "--out", str(out)])
        if code:
            raise SystemExit(code)
        print(out)


if __name__ == "__main__":
    main()
