"""Comparison receivers: independent MUD + channel decoding, and Turbo-SIC."""

from dataclasses import dataclass

import numpy as np

from .ccresm import DecodeResult, evidence_likelihoods
from .messages import llr_to_pair, normalize
from .phy_channel import ChannelConfig, SampleFrame, combined_llr, single_user_beliefs
from .ra_codec import ConfigError, ra_bp, source_margin


def mud_front_end(evidence, include_tail_sample=False):
    """Exact per-bit posteriors from the uncoded collision chain.

    Without check and source nodes the virtual graph reduces to the path
    ``xA[0] - xB[0] - xA[1] - xB[1] - ...`` with one pairwise factor per
    sample, so forward-backward gives exact marginals.  ``evidence`` is
    ``(..., 2n[+1], 3)``; returns ``(beliefsA, beliefsB)`` each ``(..., n, 2)``.
    """
    P = evidence_likelihoods(evidence)
    L = P.shape[-2]
    tail = include_tail_sample or L % 2 == 1
    n = (L - int(tail)) // 2
    T = 2 * n
    batch = P.shape[:-2]

    # pairwise factor f_t(u, v) = P_t[u + v] between chain nodes t-1 and t
    F = np.stack([P[..., 1:T, 0:2], P[..., 1:T, 1:3]], axis=-2)

    alpha = np.empty(batch + (T, 2))
    beta = np.empty(batch + (T, 2))
    alpha[..., 0, :] = normalize(P[..., 0, :2])
    for t in range(1, T):
        a = np.einsum("...u,...uv->...v", alpha[..., t - 1, :], F[..., t - 1, :, :])
        alpha[..., t, :] = a / a.sum(axis=-1, keepdims=True)
    beta[..., T - 1, :] = normalize(P[..., T, :2]) if tail else 0.5
    for t in range(T - 1, 0, -1):
        b = np.einsum("...uv,...v->...u", F[..., t - 1, :, :], beta[..., t, :])
        beta[..., t - 1, :] = b / b.sum(axis=-1, keepdims=True)
    post = normalize(alpha * beta)
    return post[..., 0::2, :], post[..., 1::2, :]


def decode_independent_batch(evidence, piA, piB, q, iters, early_stop=True):
    bA, bB = mud_front_end(evidence)
    outA = ra_bp(bA, piA, q, iters, early_stop=early_stop)
    outB = ra_bp(bB, piB, q, iters, early_stop=early_stop)
    return _result(outA, outB)


def decode_independent(evidence, cfgA, cfgB, iters):
    res = decode_independent_batch(np.asarray(evidence)[None], cfgA.pi[None], cfgB.pi[None],
                                   cfgA.q, iters)
    return res.row(0)


def _result(outA, outB, iterations=None):
    if iterations is None:
        iterations = np.maximum(outA.iterations, outB.iterations)
    return DecodeResult(
        outA.source_bits, outB.source_bits, iterations,
        outA.converged & outB.converged,
        np.minimum(source_margin(outA.source_beliefs), source_margin(outB.source_beliefs)),
        outA.source_beliefs, outB.source_beliefs)


@dataclass(frozen=True)
class SicConfig:
    """Turbo-SIC iteration budget and cancellation options.

    ``m`` outer rounds of ``n_inner`` RA iterations each.  ``feedback``
    selects a-posteriori (``"app"``) or extrinsic soft bits for cancellation.
    ``residual_interference`` adds the interferer's remaining variance
    ``1 - xbar**2`` to each sample's noise variance before combining.
    """

    m: int = 5
    n_inner: int = 10
    feedback: str = "app"
    residual_interference: bool = True

    def __post_init__(self):
        if self.m < 1 or self.n_inner < 1:
            raise ConfigError(f"m and n_inner must be >= 1, got m={self.m}, n_inner={self.n_inner}")
        if self.feedback not in ("app", "extrinsic"):
            raise ConfigError(f"feedback must be 'app' or 'extrinsic', got {self.feedback!r}")

    @property
    def total_iterations(self):
        return self.m * self.n_inner


def _soft_amplitude(beliefs):
    return beliefs[..., 0] - beliefs[..., 1]


def cancel_and_combine(r, xbarA, xbarB, chan, residual_interference=True):
    """Per-user code-bit beliefs after subtracting the other user's soft signal.

    ``r`` is ``(B, 2n[+1])``; ``xbarA``/``xbarB`` are the expected BPSK
    amplitudes ``(B, n)``.  Each symbol's cleaned samples are combined with
    inverse-variance weights.
    """
    n = chan.n
    r_odd = r[:, 0:2 * n:2]
    r_even = r[:, 1:2 * n:2]
    vo, ve = chan.var_odd, chan.var_even

    def resid(xbar):
        return (1.0 - xbar ** 2) if residual_interference else np.zeros_like(xbar)

    xbarB_prev = np.zeros_like(xbarB)
    xbarB_prev[:, 1:] = xbarB[:, :-1]
    resB_prev = resid(xbarB_prev)
    resB_prev[:, 0] = 0.0
    llrA = combined_llr([r_odd - xbarB_prev, r_even - xbarB],
                        [vo + resB_prev, ve + resid(xbarB)])

    # B's second sample is the next odd sample, shared with xA[k+1]
    odd_next = np.zeros_like(r_odd)
    odd_next[:, :-1] = r_odd[:, 1:] - xbarA[:, 1:]
    var_next = np.full_like(r_odd, np.inf)
    var_next[:, :-1] = vo + resid(xbarA[:, 1:])
    if chan.include_tail_sample:
        odd_next[:, -1] = r[:, 2 * n]
        var_next[:, -1] = vo
    with np.errstate(divide="ignore"):
        llrB = combined_llr([r_even - xbarA, odd_next], [ve + resid(xbarA), var_next])
    return llr_to_pair(llrA), llr_to_pair(llrB)


def decode_turbo_sic_batch(r, piA, piB, q, chan, sic, init_soft=None, early_stop=True):
    """Turbo-SIC on a batch of frames ``r`` ``(B, 2n[+1])``.

    ``init_soft`` optionally gives starting soft amplitudes ``(xbarA, xbarB)``;
    by default both are 0 (nothing known about the interferer).
    """
    r = np.atleast_2d(np.asarray(r, dtype=float))
    B = r.shape[0]
    n = chan.n
    if r.shape[1] != chan.frame_length or piA.shape != (B, n) or piB.shape != (B, n):
        raise ConfigError("frame and interleaver shapes do not match the channel config")
    if init_soft is None:
        xbarA = np.zeros((B, n))
        xbarB = np.zeros((B, n))
    else:
        xbarA, xbarB = (np.broadcast_to(np.asarray(x, dtype=float), (B, n)).copy()
                        for x in init_soft)
    key = "coded_app" if sic.feedback == "app" else "coded_ext"
    total = np.zeros(B, dtype=np.int64)
    for _ in range(sic.m):
        chA, chB = cancel_and_combine(r, xbarA, xbarB, chan, sic.residual_interference)
        outA = ra_bp(chA, piA, q, sic.n_inner, early_stop=early_stop)
        outB = ra_bp(chB, piB, q, sic.n_inner, early_stop=early_stop)
        xbarA = _soft_amplitude(getattr(outA, key))
        xbarB = _soft_amplitude(getattr(outB, key))
        total += np.maximum(outA.iterations, outB.iterations)
    return _result(outA, outB, total)


def decode_turbo_sic(frame, cfgA, cfgB, sic, sigma2, include_tail_sample=False, init_soft=None):
    r = frame.r if isinstance(frame, SampleFrame) else np.asarray(frame, dtype=float)
    delta = frame.delta if isinstance(frame, SampleFrame) else None
    if delta is None:
        raise ConfigError("decode_turbo_sic needs a SampleFrame carrying delta")
    chan = ChannelConfig(delta, sigma2, cfgA.n, include_tail_sample)
    res = decode_turbo_sic_batch(r[None], cfgA.pi[None], cfgB.pi[None], cfgA.q, chan, sic,
                                 init_soft=init_soft)
    return res.row(0)


def decode_single_user_batch(r, pis, q, chan, iters, early_stop=True):
    """Benchmark: user A alone on the same oversampled channel."""
    return ra_bp(single_user_beliefs(r, chan), pis, q, iters, early_stop=early_stop)


__all__ = [
    "SicConfig",
    "mud_front_end",
    "decode_independent",
    "decode_independent_batch",
    "decode_turbo_sic",
    "decode_turbo_sic_batch",
    "decode_single_user_batch",
    "cancel_and_combine",
]
