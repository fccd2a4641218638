"""Repeat-accumulate encoder and single-user sum-product decoder.

Bits are ``uint8`` numpy arrays.  Interleavers are 0-based permutations of
``range(q * N)``: the repeated word ``rep[i] = s[i // q]`` is read out in
the order ``d[k] = rep[pi[k]]`` and accumulated, ``x[k] = x[k-1] ^ d[k]``.
Check node ``k`` therefore joins source ``pi[k] // q`` with code bits
``k - 1`` and ``k`` (check 0 has degree 2).
"""

from dataclasses import dataclass

import numpy as np

from .flooding import max_change, run_flooding
from .messages import (
    UNIFORM,
    chk_update,
    hard_decision,
    leave_one_out_product,
    normalize,
    var_update,
)


class ConfigError(ValueError):
    """Invalid code, channel or sweep configuration."""


@dataclass(frozen=True)
class RaConfig:
    N: int
    q: int
    pi: np.ndarray

    def __post_init__(self):
        if self.N < 1 or self.q < 1:
            raise ConfigError(f"N and q must be >= 1, got N={self.N}, q={self.q}")
        pi = np.asarray(self.pi, dtype=np.int64)
        if pi.shape != (self.n,) or not np.array_equal(np.sort(pi), np.arange(self.n)):
            raise ConfigError("pi must be a permutation of range(q*N)")
        object.__setattr__(self, "pi", pi)

    @property
    def n(self):
        return self.q * self.N

    @classmethod
    def random(cls, N, q, seed):
        return cls(N, q, build_interleaver(N, q, seed))


def build_interleaver(N, q, seed):
    """Uniform random permutation of ``range(q*N)``, fixed by ``seed``.

    ``seed`` may be an int, a SeedSequence or a numpy Generator.
    """
    if N < 1 or q < 1:
        raise ConfigError("N and q must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return rng.permutation(q * N).astype(np.int64)


def ra_encode(source, cfg):
    source = np.asarray(source, dtype=np.uint8)
    if source.shape[-1] != cfg.N:
        raise ConfigError(f"source length {source.shape[-1]} != N={cfg.N}")
    return ra_encode_batch(source, cfg.pi, cfg.q)


def ra_encode_batch(sources, pis, q):
    """Encode ``sources[..., N]`` with matching interleavers ``pis[..., qN]``."""
    sources = np.asarray(sources, dtype=np.uint8)
    d = np.take_along_axis(np.repeat(sources, q, axis=-1),
                           np.broadcast_to(pis, sources.shape[:-1] + pis.shape[-1:]), axis=-1)
    return np.bitwise_xor.accumulate(d, axis=-1).astype(np.uint8)


def _shift_left(m):
    """m[k+1] at position k, uniform at the last position."""
    out = np.empty_like(m)
    out[:, :-1] = m[:, 1:]
    out[:, -1] = UNIFORM
    return out


def _shift_right(m):
    """m[k-1] at position k, uniform at position 0."""
    out = np.empty_like(m)
    out[:, 1:] = m[:, :-1]
    out[:, 0] = UNIFORM
    return out


class RaMessages:
    """Edge messages of a batch of single-user RA Tanner graphs.

    All arrays are ``(B, n, 2)`` and indexed by check/code position ``k``:

    ``x2c_same``  code k -> check k        ``c2x_same``  check k -> code k
    ``x2c_next``  code k -> check k+1      ``c2x_prev``  check k -> code k-1
    ``s2c``       source -> check k        ``c2s``       check k -> source
    """

    names = ("x2c_same", "x2c_next", "c2s", "s2c", "c2x_same", "c2x_prev")

    def __init__(self, pis, q):
        pis = np.asarray(pis, dtype=np.int64)
        self.q = q
        self.B, self.n = pis.shape
        self.N = self.n // q
        # order[b, i*q + t] = check position of the t-th replica of source i
        self.order = np.argsort(pis, axis=1, kind="stable")
        self._flat = None
        for name in self.names:
            setattr(self, name, np.full((self.B, self.n, 2), 0.5))

    def take(self, mask):
        self.order = self.order[mask]
        self.B = self.order.shape[0]
        self._flat = None
        for name in self.names:
            setattr(self, name, getattr(self, name)[mask])

    def snapshot(self):
        # updates always allocate new arrays, so references are a valid snapshot
        return {name: getattr(self, name) for name in self.names}

    @property
    def flat(self):
        if self._flat is None:
            self._flat = (self.order + self.n * np.arange(self.B)[:, None]).ravel()
        return self._flat

    def _gather_sources(self, m):
        return np.take(m.reshape(-1, 2), self.flat, axis=0).reshape(self.B, self.N, self.q, 2)

    def _scatter_sources(self, grouped):
        out = np.empty((self.B * self.n, 2))
        out[self.flat] = grouped.reshape(-1, 2)
        return out.reshape(self.B, self.n, 2)

    def code_to_check(self, ch):
        """``ch`` is the product of channel-side messages at each code node."""
        self.x2c_same = var_update(ch, _shift_left(self.c2x_prev))
        self.x2c_next = var_update(ch, self.c2x_same)

    def check_to_source(self):
        c2s = chk_update(_shift_right(self.x2c_next), self.x2c_same)
        c2s[:, 0] = self.x2c_same[:, 0]
        self.c2s = c2s

    def source_to_check(self):
        grouped = self._gather_sources(self.c2s)
        self.s2c = self._scatter_sources(normalize(leave_one_out_product(grouped, axis=2)))

    def check_to_code(self):
        c2x_same = chk_update(self.s2c, _shift_right(self.x2c_next))
        c2x_same[:, 0] = self.s2c[:, 0]
        self.c2x_same = c2x_same
        c2x_prev = chk_update(self.s2c, self.x2c_same)
        c2x_prev[:, 0] = UNIFORM
        self.c2x_prev = c2x_prev

    def check_side(self):
        """Product of the check-to-code messages arriving at each code node."""
        return var_update(self.c2x_same, _shift_left(self.c2x_prev))

    def source_beliefs(self):
        grouped = self._gather_sources(self.c2s)
        return normalize(np.prod(grouped, axis=2))


def source_margin(beliefs):
    """Min over source nodes of |log(p0/p1)|, per row."""
    return np.abs(np.log(beliefs[..., 0]) - np.log(beliefs[..., 1])).min(axis=-1)


class _SingleUserState:
    def __init__(self, ch, pis, q, trace=None):
        self.ch = ch
        self.msgs = RaMessages(pis, q)
        self.trace = trace
        self.want_decisions = False

    @property
    def batch(self):
        return self.msgs.B

    def step(self):
        m = self.msgs
        old = m.snapshot()
        m.code_to_check(self.ch)
        self._trace("code_to_check")
        m.check_to_source()
        self._trace("check_to_source")
        m.source_to_check()
        self._trace("source_to_check")
        m.check_to_code()
        self._trace("check_to_code")
        change = np.max([max_change(getattr(m, k), old[k]) for k in m.names], axis=0)
        return change, hard_decision(m.source_beliefs()) if self.want_decisions else None

    def _trace(self, phase):
        if self.trace is not None:
            self.trace(phase, self.msgs)

    def outputs(self, mask):
        m = self.msgs
        beliefs = m.source_beliefs()[mask]
        side = m.check_side()[mask]
        return {
            "source_bits": hard_decision(beliefs),
            "source_beliefs": beliefs,
            "coded_app": var_update(side, self.ch[mask]),
            "coded_ext": side,
        }

    def take(self, mask):
        self.ch = self.ch[mask]
        self.msgs.take(mask)


@dataclass
class RaDecodeOutput:
    """Batched result of single-user RA decoding (leading axis = packet)."""

    source_bits: np.ndarray
    source_beliefs: np.ndarray
    coded_app: np.ndarray
    coded_ext: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray


def ra_bp(ch, pis, q, iters, tol=1e-6, early_stop=True, trace=None):
    """Sum-product decoding of a batch of RA codewords.

    ``ch`` holds channel beliefs ``(B, n, 2)`` for the code bits and ``pis``
    the matching interleavers ``(B, n)``.  With ``early_stop`` a row stops
    once no message moves by more than ``tol`` within an iteration.
    """
    ch = normalize(np.asarray(ch, dtype=float))
    pis = np.asarray(pis)
    if ch.shape[:2] != pis.shape or pis.shape[1] % q:
        raise ConfigError(f"belief shape {ch.shape} does not match interleavers {pis.shape}")
    state = _SingleUserState(ch, pis, q, trace)
    out, iterations, converged = run_flooding(state, iters, tol if early_stop else -1.0)
    return RaDecodeOutput(iterations=iterations, converged=converged, **out)


def ra_decode_single(beliefs, cfg, iters, early_stop=True):
    """Decode one packet from per-code-bit beliefs ``(qN, 2)``; returns source bits."""
    beliefs = np.asarray(beliefs, dtype=float)
    if beliefs.shape != (cfg.n, 2):
        raise ConfigError(f"expected beliefs of shape {(cfg.n, 2)}, got {beliefs.shape}")
    out = ra_bp(beliefs[None], cfg.pi[None], cfg.q, iters, early_stop=early_stop)
    return out.source_bits[0]
