"""Command line entry point: ``simulate``, ``plot`` and ``decode-oracle``."""

import argparse
import logging
import math
import sys

from .harness import SCHEMES, SweepConfig, SweepResult, run_sweep
from .ra_codec import ConfigError

# flag name -> (SweepConfig field, parser)
_SIM_KEYS = {
    "schemes": ("schemes", lambda s: tuple(x.strip() for x in s.split(",") if x.strip())),
    "snr": ("snr_db", None),
    "delta": ("deltas", lambda s: tuple(float(x) for x in s.split(","))),
    "N": ("N", int),
    "q": ("q", int),
    "m": ("m", int),
    "n-inner": ("n_inner", int),
    "packets": ("packets", int),
    "seed": ("seed", int),
    "out": ("out", str),
    "tail": ("include_tail_sample", None),
    "batch-size": ("batch_size", int),
    "workers": ("workers", int),
}


def parse_snr(text):
    """``start:step:stop`` (inclusive) or a comma list; ``inf`` is allowed."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"SNR range must be start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"bad SNR range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(round(start + i * step, 10)) for i in range(count))
    return tuple(float(x) for x in text.split(","))


def _parse_bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _convert(key, value):
    field, conv = _SIM_KEYS[key]
    if key == "snr":
        return field, parse_snr(value)
    if key == "tail":
        return field, _parse_bool(value)
    try:
        return field, conv(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def read_config_file(path):
    """Flat ``key = value`` file using the CLI flag names; ``#`` starts a comment."""
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("_", "-")
        if key not in _SIM_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_sweep_config(args):
    """SweepConfig from an optional config file overridden by explicit flags."""
    raw = read_config_file(args.config) if args.config else {}
    for key in _SIM_KEYS:
        val = getattr(args, key.replace("-", "_"))
        if val is not None:
            raw[key] = val
    kwargs = dict(_convert(k, v) for k, v in raw.items())
    return SweepConfig(**kwargs)


def _add_simulate(sub):
    p = sub.add_parser("simulate", help="run a BER/PER sweep and write CSV")
    p.add_argument("--config", help="flat key = value file with the same keys as the flags")
    p.add_argument("--schemes", help=f"comma list from {','.join(SCHEMES)}")
    p.add_argument("--snr", help="start:step:stop or comma list, in dB")
    p.add_argument("--delta", help="comma list of offsets in (0, 1)")
    p.add_argument("--N", dest="N")
    p.add_argument("--q")
    p.add_argument("--m")
    p.add_argument("--n-inner", dest="n_inner")
    p.add_argument("--packets")
    p.add_argument("--seed")
    p.add_argument("--out")
    p.add_argument("--tail", help="include the trailing single-user sample (true/false)")
    p.add_argument("--batch-size", dest="batch_size")
    p.add_argument("--workers")
    p.add_argument("--quiet", action="store_true")


def _simulate(args):
    cfg = build_sweep_config(args)
    progress = None
    if not args.quiet:
        def progress(done, total, task):
            _, _, delta, snr, trials = task
            print(f"[{done}/{total}] delta={delta:g} snr={snr:g} trials {trials[0]}..{trials[-1]}",
                  file=sys.stderr)
    result = run_sweep(cfg, progress=progress)
    if not cfg.out:
        sys.stdout.write(result.to_csv())
    else:
        print(f"wrote {len(result.cells)} rows to {cfg.out}", file=sys.stderr)
    return 0


def _plot(args):
    from .plotting import emit_plot

    result = SweepResult.from_csv(args.inp)
    emit_plot(result, args.kind, args.out, title=args.title)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def _oracle(args):
    from .oracles import map_agreement

    rep = map_agreement(N=args.N, q=args.q, trials=args.trials, snr_db=args.snr,
                        delta=args.delta, iters=args.iters, seed=args.seed)
    print(f"joint MAP agreement:       {rep.joint_agree}/{rep.trials} = {rep.joint_rate:.3f}")
    print(f"single-user MAP agreement: {rep.single_agree}/{rep.trials} = {rep.single_rate:.3f}")
    return 0


def make_parser():
    parser = argparse.ArgumentParser(prog="ccresm-sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _add_simulate(sub)

    p = sub.add_parser("plot", help="render a results CSV as an SVG")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--kind", choices=("ber", "per"), default="ber")
    p.add_argument("--out", required=True)
    p.add_argument("--title")

    p = sub.add_parser("decode-oracle", help="BP versus brute-force MAP on tiny codes")
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--snr", type=float, default=6.0)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    handlers = {"simulate": _simulate, "plot": _plot, "decode-oracle": _oracle}
    try:
        return handlers[args.command](args)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

