"""Effect of the iteration budget on the joint decoder and on Turbo-SIC.

Each budget mn is split as (m, n_inner) = (mn // 10, 10) for Turbo-SIC; the
joint decoder gets mn flooding iterations.  All budgets decode the same
draws, so the curves are directly comparable.
"""

import argparse
from dataclasses import replace
from pathlib import Path

from ccresm_sim.cli import parse_snr
from ccresm_sim.harness import SweepConfig, SweepResult, run_sweep
from ccresm_sim.plotting import emit_plot


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--snr", default="-12:0.5:-8")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--budgets", default="10,20,50")
    p.add_argument("--packets", type=int, default=2000)
    p.add_argument("--N", type=int, default=512)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="results")
    args = p.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    base = SweepConfig(schemes=("ccresm", "turbo_sic"), snr_db=parse_snr(args.snr),
                       deltas=(args.delta,), N=args.N, packets=args.packets, seed=args.seed)
    cells = []
    for mn in (int(b) for b in args.budgets.split(",")):
        if mn % 10:
            raise SystemExit(f"budget {mn} is not a multiple of 10")
        res = run_sweep(replace(base, m=mn // 10, n_inner=10))
        # tag each curve with its budget so the plot separates them
        cells += [replace(c, scheme=f"{c.scheme} mn={mn}") for c in res.cells]
        print(f"mn={mn}: " + ", ".join(f"{c.scheme}@{c.snr_db:g}={c.ber:.2e}" for c in res.cells))
    merged = SweepResult(cells)
    merged.to_csv(out / "iteration_sweep.csv")
    emit_plot(merged, "ber", out / "iterations_ber.svg", title=f"delta = {args.delta:g}")


if __name__ == "__main__":
    main()
