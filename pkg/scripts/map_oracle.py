"""How often belief propagation matches brute-force MAP on tiny codes."""

import argparse

from ccresm_sim.oracles import map_agreement


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--snr", default="-3,0,3,6")
    args = p.parse_args()
    print(" snr_db  joint  single_user")
    for snr in (float(s) for s in args.snr.split(",")):
        rep = map_agreement(N=args.N, trials=args.trials, snr_db=snr, delta=args.delta)
        print(f"{snr:7.1f}  {rep.joint_rate:.3f}  {rep.single_rate:.3f}")


if __name__ == "__main__":
    main()
