"""Exhaustive-enumeration references for small instances.

These work from the Gaussian sample model directly and share no code with
the message-passing decoders beyond the encoder, so they can be used to
check them.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .ra_codec import ra_encode_batch


def all_words(length):
    return np.array(list(itertools.product((0, 1), repeat=length)), dtype=np.uint8)


def _amp(bits):
    return 1.0 - 2.0 * bits.astype(float)


def frame_mean(xA, xB):
    """Noise-free two-user frame, broadcasting over leading axes."""
    a = _amp(xA)
    b = _amp(xB)
    b_prev = np.concatenate([np.zeros_like(b[..., :1]), b[..., :-1]], axis=-1)
    out = np.empty(np.broadcast_shapes(a.shape, b.shape)[:-1] + (2 * a.shape[-1],))
    out[..., 0::2] = a + b_prev
    out[..., 1::2] = a + b
    return out


def frame_loglik(r, xA, xB, delta, sigma2):
    """Gaussian log-likelihood of a 2n-sample frame (constant terms dropped)."""
    n = np.asarray(xA).shape[-1]
    var = np.empty(2 * n)
    var[0::2] = delta * sigma2
    var[1::2] = (1 - delta) * sigma2
    d = np.asarray(r)[..., :2 * n] - frame_mean(xA, xB)
    return -0.5 * np.sum(d * d / var, axis=-1)


def joint_map(r, piA, piB, q, delta, sigma2):
    """Most likely source pair ``(sA, sB)`` by enumerating every combination."""
    N = len(piA) // q
    words = all_words(N)
    XA = ra_encode_batch(words, np.asarray(piA), q)
    XB = ra_encode_batch(words, np.asarray(piB), q)
    ll = frame_loglik(r, XA[:, None, :], XB[None, :, :], delta, sigma2)
    i, j = np.unravel_index(np.argmax(ll), ll.shape)
    return words[i], words[j]


def single_user_map(beliefs, pi, q):
    """Most likely source word given per-code-bit beliefs ``(n, 2)``."""
    N = len(pi) // q
    words = all_words(N)
    X = ra_encode_batch(words, np.asarray(pi), q)
    logb = np.log(np.asarray(beliefs))
    score = np.where(X == 0, logb[:, 0], logb[:, 1]).sum(axis=1)
    return words[np.argmax(score)]


def chain_marginals(r, n, delta, sigma2, tail=False):
    """Exact per-bit posteriors of uncoded ``xA``, ``xB`` (uniform priors).

    Enumerates all ``4**n`` coded-bit combinations, so keep ``n <= 8``.
    """
    combos = all_words(2 * n)
    xA, xB = combos[:, :n], combos[:, n:]
    ll = frame_loglik(r, xA, xB, delta, sigma2)
    if tail:
        ll = ll - 0.5 * (r[2 * n] - _amp(xB[:, -1])) ** 2 / (delta * sigma2)
    w = np.exp(ll - ll.max())
    w /= w.sum()
    pA1 = (w[:, None] * xA).sum(axis=0)
    pB1 = (w[:, None] * xB).sum(axis=0)
    return np.stack([1 - pA1, pA1], axis=-1), np.stack([1 - pB1, pB1], axis=-1)


def joint_source_marginals(r, piA, piB, q, delta, sigma2):
    """Exact per-source-bit posteriors of both users by full enumeration."""
    N = len(piA) // q
    words = all_words(N)
    XA = ra_encode_batch(words, np.asarray(piA), q)
    XB = ra_encode_batch(words, np.asarray(piB), q)
    ll = frame_loglik(r, XA[:, None, :], XB[None, :, :], delta, sigma2)
    w = np.exp(ll - ll.max())
    w /= w.sum()
    pA1 = (w.sum(axis=1)[:, None] * words).sum(axis=0)
    pB1 = (w.sum(axis=0)[:, None] * words).sum(axis=0)
    return np.stack([1 - pA1, pA1], axis=-1), np.stack([1 - pB1, pB1], axis=-1)


@dataclass
class OracleReport:
    trials: int
    joint_agree: int
    single_agree: int

    @property
    def joint_rate(self):
        return self.joint_agree / self.trials

    @property
    def single_rate(self):
        return self.single_agree / self.trials


def map_agreement(N=4, q=3, trials=1000, snr_db=6.0, delta=0.5, iters=50, seed=0):
    """How often BP matches brute-force MAP, jointly and for one user.

    The joint check decodes two-user collisions with the virtual-graph
    decoder; the single-user check feeds user A's interference-free beliefs
    to the RA decoder.
    """
    from .ccresm import decode_batch
    from .phy_channel import ChannelConfig, compute_evidence, draw_noise, single_user_beliefs, superpose
    from .ra_codec import ra_bp

    rng = np.random.default_rng(seed)
    n = N * q
    sigma2 = 10 ** (-snr_db / 10)
    chan = ChannelConfig(delta, sigma2, n)
    sA = rng.integers(0, 2, (trials, N), dtype=np.uint8)
    sB = rng.integers(0, 2, (trials, N), dtype=np.uint8)
    piA = np.array([rng.permutation(n) for _ in range(trials)])
    piB = np.array([rng.permutation(n) for _ in range(trials)])
    xA = ra_encode_batch(sA, piA, q)
    xB = ra_encode_batch(sB, piB, q)
    noise = draw_noise(chan, rng, (trials,))
    r = superpose(xA, xB, chan, noise)
    res = decode_batch(compute_evidence(r, chan), piA, piB, q, iters)

    r1 = superpose(xA, None, chan, noise)
    beliefs = single_user_beliefs(r1, chan)
    single = ra_bp(beliefs, piA, q, iters).source_bits

    joint_ok = single_ok = 0
    for t in range(trials):
        mA, mB = joint_map(r[t], piA[t], piB[t], q, delta, sigma2)
        joint_ok += bool(np.array_equal(mA, res.sA_hat[t]) and np.array_equal(mB, res.sB_hat[t]))
        single_ok += bool(np.array_equal(single_user_map(beliefs[t], piA[t], q), single[t]))
    return OracleReport(trials, joint_ok, single_ok)
