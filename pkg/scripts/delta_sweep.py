"""BER and PER against SNR for every receiver at several symbol offsets.

Writes ``<out>/delta_sweep.csv`` plus ``ber.svg`` and ``per.svg``.  The
default grid covers the waterfall of all three offsets; use a smaller
``--packets`` for a quick look.
"""

import argparse
import sys
import time
from pathlib import Path

from ccresm_sim.cli import parse_snr
from ccresm_sim.harness import SCHEMES, SweepConfig, run_sweep
from ccresm_sim.plotting import emit_plot


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--snr", default="-12:0.5:-4")
    p.add_argument("--delta", default="0.1,0.3,0.5")
    p.add_argument("--packets", type=int, default=2000)
    p.add_argument("--N", type=int, default=512)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="results")
    args = p.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = SweepConfig(schemes=SCHEMES, snr_db=parse_snr(args.snr),
                      deltas=tuple(float(d) for d in args.delta.split(",")),
                      N=args.N, packets=args.packets, seed=args.seed, workers=args.workers,
                      out=str(out / "delta_sweep.csv"))
    t0 = time.time()

    def progress(done, total, task):
        print(f"\r{done}/{total} chunks, {time.time() - t0:.0f} s", end="", file=sys.stderr)

    res = run_sweep(cfg, progress=progress)
    print(file=sys.stderr)
    emit_plot(res, "ber", out / "ber.svg", title=f"mn = {cfg.total_iterations}")
    emit_plot(res, "per", out / "per.svg", title=f"mn = {cfg.total_iterations}")
    for c in res.cells:
        print(f"{c.scheme:12s} delta={c.delta:<4g} snr={c.snr_db:6.2f}  ber={c.ber:.3e}  per={c.per:.3e}")


if __name__ == "__main__":
    main()
