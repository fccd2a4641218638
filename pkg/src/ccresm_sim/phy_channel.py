"""Two-user asynchronous BPSK collision with oversampling.

The receiver takes two samples per symbol of user A: one over the first
``delta`` of the symbol (where B is still sending its previous symbol) and
one over the remaining ``1 - delta``.  In 0-based terms, for ``k = 0..n-1``::

    r[2k]     = bpsk(xA[k]) + bpsk(xB[k-1]) + w_odd[k]     var delta * sigma2
    r[2k + 1] = bpsk(xA[k]) + bpsk(xB[k])   + w_even[k]    var (1 - delta) * sigma2

with ``bpsk(xB[-1]) = 0``.  The optional tail sample ``r[2n]`` carries
``bpsk(xB[n-1])`` alone.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .messages import EPS, llr_to_pair
from .ra_codec import ConfigError

log = logging.getLogger(__name__)


def snr_to_sigma2(snr_db):
    """SNR = 1 / sigma2, in dB."""
    return 10.0 ** (-np.asarray(snr_db, dtype=float) / 10.0)


@dataclass(frozen=True)
class ChannelConfig:
    delta: float
    sigma2: float
    n: int
    include_tail_sample: bool = False

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ConfigError(f"delta must lie in the open interval (0, 1), got {self.delta}")
        if self.sigma2 < 0:
            raise ConfigError(f"sigma2 must be >= 0, got {self.sigma2}")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if self.delta < 0.01 or self.delta > 0.99:
            log.warning("delta=%g is nearly aligned; the collision model is ill-conditioned", self.delta)

    @property
    def var_odd(self):
        return self.delta * self.sigma2

    @property
    def var_even(self):
        return (1.0 - self.delta) * self.sigma2

    @property
    def frame_length(self):
        return 2 * self.n + int(self.include_tail_sample)


@dataclass(frozen=True)
class SampleFrame:
    r: np.ndarray
    delta: float


def bpsk(bits):
    """0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=float)


def draw_noise(cfg, rng, batch=()):
    """Standard-normal draws used to build one frame: ``(odd, even, tail)``."""
    shape = tuple(batch) + (cfg.n,)
    odd = rng.standard_normal(shape)
    even = rng.standard_normal(shape)
    tail = rng.standard_normal(tuple(batch)) if cfg.include_tail_sample else None
    return odd, even, tail


def superpose(xA, xB, cfg, noise=None):
    """Deterministic frame from coded bits and unit-variance noise draws.

    ``xB=None`` builds the interference-free frame of user A alone.  Leading
    batch axes are supported; the result has last axis ``cfg.frame_length``.
    """
    a = bpsk(xA)
    if a.shape[-1] != cfg.n:
        raise ConfigError(f"xA has length {a.shape[-1]}, expected n={cfg.n}")
    if xB is None:
        b = np.zeros_like(a)
    else:
        b = bpsk(xB)
        if b.shape != a.shape:
            raise ConfigError(f"xA and xB shapes differ: {a.shape} vs {b.shape}")
    b_prev = np.zeros_like(b)
    b_prev[..., 1:] = b[..., :-1]
    r = np.empty(a.shape[:-1] + (cfg.frame_length,))
    r[..., 0:2 * cfg.n:2] = a + b_prev
    r[..., 1:2 * cfg.n:2] = a + b
    if cfg.include_tail_sample:
        r[..., 2 * cfg.n] = b[..., -1]
    if noise is not None:
        odd, even, tail = noise
        r[..., 0:2 * cfg.n:2] += np.sqrt(cfg.var_odd) * odd
        r[..., 1:2 * cfg.n:2] += np.sqrt(cfg.var_even) * even
        if cfg.include_tail_sample:
            r[..., 2 * cfg.n] += np.sqrt(cfg.var_odd) * tail
    return r


def overlap_and_sample(xA, xB, cfg, rng):
    xA = np.asarray(xA)
    xB = np.asarray(xB)
    if xA.shape != (cfg.n,) or xB.shape != (cfg.n,):
        raise ConfigError(f"packets must both have length n={cfg.n}")
    r = superpose(xA, xB, cfg, draw_noise(cfg, rng))
    return SampleFrame(r=r, delta=cfg.delta)


def _posterior(r, centers, log_weights, var):
    """Normalized posterior over Gaussian hypotheses at ``centers``.

    ``var == 0`` gives the indicator of the nearest center, as does a
    variance so small that the exponent would overflow.
    """
    r = np.asarray(r, dtype=float)[..., None]
    if var < 1e-300:
        nearest = np.argmin(np.abs(r - centers), axis=-1)
        return np.eye(len(centers))[nearest]
    logits = -((r - centers) ** 2) / (2.0 * var) + log_weights
    logits -= logits.max(axis=-1, keepdims=True)
    p = np.exp(logits)
    return p / p.sum(axis=-1, keepdims=True)


_SUM_CENTERS = np.array([2.0, 0.0, -2.0])
_SUM_LOGW = np.log([1.0, 2.0, 1.0])
_BIT_CENTERS = np.array([1.0, -1.0])
_BIT_LOGW = np.zeros(2)


def compute_evidence(frame, cfg):
    """Evidence triples ``(p0, p1, p2)`` for every sample of ``frame``.

    Index 0 and the optional tail sample see a single user, so their triples
    are ``(p0, p1, 0)`` over that user's bit.  Every other triple is the
    posterior of the number of 1-bits among the two overlapped symbols.
    Leading batch axes of ``frame`` (or a raw array) are preserved.
    """
    r = frame.r if isinstance(frame, SampleFrame) else np.asarray(frame, dtype=float)
    if r.shape[-1] != cfg.frame_length:
        raise ConfigError(f"frame has {r.shape[-1]} samples, expected {cfg.frame_length}")
    n = cfg.n
    P = np.zeros(r.shape + (3,))
    P[..., 0:2 * n:2, :] = _posterior(r[..., 0:2 * n:2], _SUM_CENTERS, _SUM_LOGW, cfg.var_odd)
    P[..., 1:2 * n:2, :] = _posterior(r[..., 1:2 * n:2], _SUM_CENTERS, _SUM_LOGW, cfg.var_even)
    P[..., 0, :] = 0.0
    P[..., 0, :2] = _posterior(r[..., 0], _BIT_CENTERS, _BIT_LOGW, cfg.var_odd)
    if cfg.include_tail_sample:
        P[..., 2 * n, :] = 0.0
        P[..., 2 * n, :2] = _posterior(r[..., 2 * n], _BIT_CENTERS, _BIT_LOGW, cfg.var_odd)
    return P


def combined_llr(samples, variances):
    """LLR ln(p0/p1) of a +-1 symbol seen in several independent Gaussian samples."""
    llr = 0.0
    for s, v in zip(samples, variances):
        v = np.maximum(v, EPS * EPS)
        llr = llr + 2.0 * np.asarray(s) / v
    return llr


def single_user_beliefs(r, cfg):
    """Code-bit beliefs ``(..., n, 2)`` for user A from an interference-free frame."""
    r = np.asarray(r, dtype=float)
    llr = combined_llr([r[..., 0:2 * cfg.n:2], r[..., 1:2 * cfg.n:2]],
                       [cfg.var_odd, cfg.var_even])
    return llr_to_pair(llr)
