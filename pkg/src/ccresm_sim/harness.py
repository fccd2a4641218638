"""Monte Carlo BER/PER sweeps over scheme x delta x SNR.

Every trial draws its packets, interleavers and noise from a generator keyed
by ``(seed, trial, delta, snr_db)``.  The scheme is not part of the key, so
all schemes in a cell decode exactly the same collisions.
"""

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .baselines import (
    SicConfig,
    decode_independent_batch,
    decode_single_user_batch,
    decode_turbo_sic_batch,
)
from .ccresm import decode_batch
from .phy_channel import ChannelConfig, compute_evidence, draw_noise, snr_to_sigma2, superpose
from .ra_codec import ConfigError, ra_encode_batch

SCHEMES = ("ccresm", "turbo_sic", "independent", "single_user")

CSV_HEADER = ("scheme", "delta", "snr_db", "packets", "bit_errors", "bits", "ber", "ber_ci95",
              "pkt_errors", "pkts", "per", "per_ci95", "mean_iters")


@dataclass(frozen=True)
class SweepConfig:
    schemes: tuple = SCHEMES
    snr_db: tuple = tuple(np.arange(-12.0, -3.99, 0.5).round(2))
    deltas: tuple = (0.1, 0.3, 0.5)
    N: int = 512
    q: int = 3
    m: int = 5
    n_inner: int = 10
    packets: int = 2000
    seed: int = 42
    out: str = None
    include_tail_sample: bool = False
    batch_size: int = 200
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown or not self.schemes:
            raise ConfigError(f"unknown schemes {sorted(unknown)}; choose from {SCHEMES}")
        if self.packets < 1:
            raise ConfigError("packets must be >= 1")
        if not self.snr_db:
            raise ConfigError("at least one SNR point is required")
        for d in self.deltas:
            if not 0.0 < d < 1.0:
                raise ConfigError(f"delta {d} outside (0, 1)")
        if self.N < 1 or self.q < 1 or self.batch_size < 1 or self.workers < 1:
            raise ConfigError("N, q, batch_size and workers must be >= 1")
        SicConfig(self.m, self.n_inner)

    @property
    def n(self):
        return self.N * self.q

    @property
    def total_iterations(self):
        """C-CRESM and the single-decoder schemes get the full Turbo-SIC budget."""
        return self.m * self.n_inner


@dataclass(frozen=True)
class TrialRecord:
    scheme: str
    snr_db: float
    delta: float
    trial: int
    bit_errors: tuple
    packet_errors: tuple
    iterations: int


@dataclass(frozen=True)
class CellResult:
    scheme: str
    delta: float
    snr_db: float
    packets: int
    bit_errors: int
    bits: int
    pkt_errors: int
    pkts: int
    mean_iters: float
    has_per: bool = True

    @property
    def ber(self):
        return self.bit_errors / self.bits

    @property
    def ber_ci95(self):
        return wilson_halfwidth(self.bit_errors, self.bits)

    @property
    def per(self):
        return self.pkt_errors / self.pkts if self.has_per else None

    @property
    def per_ci95(self):
        return wilson_halfwidth(self.pkt_errors, self.pkts) if self.has_per else None

    @property
    def key(self):
        return (self.scheme, self.delta, self.snr_db)


@dataclass
class SweepResult:
    cells: list
    records: list = field(default_factory=list)

    def __post_init__(self):
        self.cells = sorted(self.cells, key=lambda c: c.key)

    def cell(self, scheme, delta, snr_db):
        for c in self.cells:
            if c.key == (scheme, float(delta), float(snr_db)):
                return c
        raise KeyError((scheme, delta, snr_db))

    def curve(self, scheme, delta, kind="ber"):
        """``(snr, value)`` arrays for one scheme and delta, sorted by SNR."""
        cells = [c for c in self.cells if c.scheme == scheme and c.delta == float(delta)]
        return (np.array([c.snr_db for c in cells]),
                np.array([getattr(c, kind) for c in cells], dtype=float))

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for c in self.cells:
            per = "" if not c.has_per else _fmt(c.per)
            per_ci = "" if not c.has_per else _fmt(c.per_ci95)
            w.writerow([c.scheme, _fmt(c.delta), _fmt(c.snr_db), c.packets, c.bit_errors, c.bits,
                        _fmt(c.ber), _fmt(c.ber_ci95), c.pkt_errors if c.has_per else "",
                        c.pkts if c.has_per else "", per, per_ci, _fmt(c.mean_iters)])
        text = buf.getvalue()
        if path is not None:
            try:
                Path(path).write_text(text)
            except OSError as exc:
                raise OSError(f"cannot write results to {path}: {exc}") from exc
        return text

    @classmethod
    def from_csv(cls, path):
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise OSError(f"cannot read results from {path}: {exc}") from exc
        rows = list(csv.DictReader(io.StringIO(text)))
        cells = []
        for row in rows:
            has_per = bool(row.get("pkt_errors")) and bool(row.get("pkts"))
            cells.append(CellResult(
                scheme=row["scheme"], delta=float(row["delta"]), snr_db=float(row["snr_db"]),
                packets=int(row["packets"]), bit_errors=int(row["bit_errors"]),
                bits=int(row["bits"]),
                pkt_errors=int(row["pkt_errors"]) if has_per else 0,
                pkts=int(row["pkts"]) if has_per else 0,
                mean_iters=float(row.get("mean_iters") or "nan"), has_per=has_per))
        return cls(cells)


def _fmt(x):
    return repr(float(x))


def wilson_halfwidth(errors, trials, z=1.959963984540054):
    """Half-width of the 95% Wilson score interval for a binomial rate."""
    if trials == 0:
        return float("nan")
    p = errors / trials
    denom = 1.0 + z * z / trials
    return z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom


def _float_key(x):
    return int(round(float(x) * 1_000_000)) + (1 << 40)


def trial_rng(seed, trial, delta, snr_db):
    """Independent generator for one trial of one (delta, SNR) cell."""
    snr = float(snr_db)
    snr_key = (1 << 41) if math.isinf(snr) else _float_key(snr)
    return np.random.default_rng(np.random.SeedSequence([seed, trial, _float_key(delta), snr_key]))


@dataclass
class TrialBatch:
    sA: np.ndarray
    sB: np.ndarray
    piA: np.ndarray
    piB: np.ndarray
    noise: tuple


def draw_trials(cfg, delta, snr_db, trials):
    """Draw packets, interleavers and unit-variance noise for a list of trials."""
    chan = ChannelConfig(delta, float(snr_to_sigma2(snr_db)), cfg.n, cfg.include_tail_sample)
    sA, sB, piA, piB, odd, even, tail = [], [], [], [], [], [], []
    for t in trials:
        rng = trial_rng(cfg.seed, t, delta, snr_db)
        sA.append(rng.integers(0, 2, cfg.N, dtype=np.uint8))
        sB.append(rng.integers(0, 2, cfg.N, dtype=np.uint8))
        piA.append(rng.permutation(cfg.n))
        piB.append(rng.permutation(cfg.n))
        o, e, tl = draw_noise(chan, rng)
        odd.append(o)
        even.append(e)
        tail.append(tl)
    noise = (np.array(odd), np.array(even), np.array(tail) if cfg.include_tail_sample else None)
    return chan, TrialBatch(np.array(sA), np.array(sB), np.array(piA), np.array(piB), noise)


def decode_scheme(scheme, chan, batch, cfg):
    """Run one scheme on a drawn batch; returns ``(list of (sA_hat, sB_hat or None), iters)``."""
    xA = ra_encode_batch(batch.sA, batch.piA, cfg.q)
    xB = ra_encode_batch(batch.sB, batch.piB, cfg.q)
    iters = cfg.total_iterations
    if scheme == "single_user":
        r = superpose(xA, None, chan, batch.noise)
        out = decode_single_user_batch(r, batch.piA, cfg.q, chan, iters)
        return out.source_bits, None, out.iterations
    r = superpose(xA, xB, chan, batch.noise)
    if scheme == "turbo_sic":
        res = decode_turbo_sic_batch(r, batch.piA, batch.piB, cfg.q, chan,
                                     SicConfig(cfg.m, cfg.n_inner))
    else:
        P = compute_evidence(r, chan)
        if scheme == "ccresm":
            res = decode_batch(P, batch.piA, batch.piB, cfg.q, iters)
        elif scheme == "independent":
            res = decode_independent_batch(P, batch.piA, batch.piB, cfg.q, iters)
        else:
            raise ConfigError(f"unknown scheme {scheme!r}")
    return res.sA_hat, res.sB_hat, res.iterations_used


def _records(scheme, delta, snr_db, trials, batch, sA_hat, sB_hat, iters):
    eA = (sA_hat != batch.sA).sum(axis=1)
    eB = None if sB_hat is None else (sB_hat != batch.sB).sum(axis=1)
    recs = []
    for i, t in enumerate(trials):
        bit_errors = (int(eA[i]),) if eB is None else (int(eA[i]), int(eB[i]))
        recs.append(TrialRecord(scheme, float(snr_db), float(delta), int(t), bit_errors,
                                tuple(e > 0 for e in bit_errors), int(iters[i])))
    return recs


def _run_chunk(args):
    cfg, schemes, delta, snr_db, trials = args
    chan, batch = draw_trials(cfg, delta, snr_db, trials)
    out = []
    for scheme in schemes:
        sA_hat, sB_hat, iters = decode_scheme(scheme, chan, batch, cfg)
        out.extend(_records(scheme, delta, snr_db, trials, batch, sA_hat, sB_hat, iters))
    return out


def run_trial(scheme, snr_db, delta, cfg, trial):
    """Decode a single trial; identical inputs give an identical record."""
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}")
    return _run_chunk((cfg, (scheme,), float(delta), float(snr_db), [int(trial)]))[0]


def aggregate(records, N):
    """Fold trial records into one CellResult per (scheme, delta, snr)."""
    groups = {}
    for rec in records:
        groups.setdefault((rec.scheme, rec.delta, rec.snr_db), []).append(rec)
    cells = []
    for (scheme, delta, snr), recs in groups.items():
        recs = sorted(recs, key=lambda r: r.trial)
        users = len(recs[0].bit_errors)
        cells.append(CellResult(
            scheme=scheme, delta=delta, snr_db=snr, packets=len(recs),
            bit_errors=sum(sum(r.bit_errors) for r in recs), bits=users * N * len(recs),
            pkt_errors=sum(sum(r.packet_errors) for r in recs), pkts=users * len(recs),
            mean_iters=sum(r.iterations for r in recs) / len(recs)))
    return cells


def run_sweep(cfg, keep_records=False, progress=None):
    """Run every (delta, SNR) cell for every scheme and aggregate.

    Work is split into chunks of ``cfg.batch_size`` trials; with
    ``cfg.workers > 1`` chunks run in worker processes.  Results are reduced
    in a fixed order, so the output does not depend on the worker count.
    """
    tasks = []
    for delta in cfg.deltas:
        for snr in cfg.snr_db:
            for start in range(0, cfg.packets, cfg.batch_size):
                trials = list(range(start, min(start + cfg.batch_size, cfg.packets)))
                tasks.append((cfg, cfg.schemes, delta, snr, trials))
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            chunks = list(pool.map(_run_chunk, tasks))
    else:
        chunks = []
        for i, task in enumerate(tasks):
            chunks.append(_run_chunk(task))
            if progress is not None:
                progress(i + 1, len(tasks), task)
    records = [rec for chunk in chunks for rec in chunk]
    result = SweepResult(aggregate(records, cfg.N), records if keep_records else [])
    if cfg.out:
        result.to_csv(cfg.out)
    return result


def snr_at_target(snr, values, target, floor):
    """SNR where a decreasing error curve first crosses ``target``.

    Interpolates log10(value) linearly in dB.  Zero counts are replaced by
    ``floor`` (half an error's worth is the usual choice).  Returns ``nan``
    if the curve never reaches the target and ``-inf`` if it starts below it.
    """
    snr = np.asarray(snr, dtype=float)
    values = np.maximum(np.asarray(values, dtype=float), floor)
    order = np.argsort(snr)
    snr, values = snr[order], values[order]
    if values[0] <= target:
        return -math.inf
    for i in range(1, len(snr)):
        if values[i] <= target:
            hi, lo = math.log10(values[i - 1]), math.log10(values[i])
            f = (hi - math.log10(target)) / (hi - lo)
            return float(snr[i - 1] + f * (snr[i] - snr[i - 1]))
    return math.nan


def with_budget(cfg, m, n_inner):
    return replace(cfg, m=m, n_inner=n_inner)
