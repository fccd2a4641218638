"""Joint BP decoding of two misaligned RA packets on the virtual Tanner graph.

The two users' RA graphs are tied together by add nodes, one per
two-user sample.  In 0-based indices, sample ``2k + 1`` joins ``xA[k]`` and
``xB[k]`` and sample ``2k`` (``k >= 1``) joins ``xA[k]`` and ``xB[k-1]``.
Sample 0 attaches its evidence straight to ``xA[0]``.

Each code node therefore has two channel-side slots, stored per user as
``(B, n, 2)`` arrays::

    A slot 0: sample 2k      A slot 1: sample 2k+1
    B slot 0: sample 2k+1    B slot 1: sample 2k+2 (tail or nothing at k=n-1)
"""

from dataclasses import dataclass, field

import numpy as np

from .flooding import max_change, run_flooding
from .messages import (
    UNIFORM,
    add_update,
    chk_update,
    hard_decision,
    normalize,
    var_update,
)
from .ra_codec import ConfigError, RaConfig, RaMessages, source_margin

__all__ = [
    "VirtualGraph",
    "DecodeResult",
    "build_virtual_graph",
    "add_update",
    "chk_update",
    "var_update",
    "evidence_likelihoods",
    "decode",
    "decode_batch",
]


@dataclass(frozen=True)
class VirtualGraph:
    """Node and edge index structure of the two-user virtual Tanner graph.

    Node labels are tuples: ``("s", u, i)``, ``("c", u, k)``, ``("x", u, k)``,
    ``("a", j)`` and ``("e", j)`` with ``u`` in ``"AB"`` and 0-based sample
    index ``j``.  The decoder only needs the interleavers; the explicit
    edge list is kept for inspection and structural checks.
    """

    cfgA: RaConfig
    cfgB: RaConfig
    include_tail_sample: bool = False
    edges: tuple = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self._build_edges()))

    @property
    def N(self):
        return self.cfgA.N

    @property
    def q(self):
        return self.cfgA.q

    @property
    def n(self):
        return self.cfgA.n

    @property
    def n_samples(self):
        return 2 * self.n + int(self.include_tail_sample)

    def add_pairs(self):
        """``{j: (kA, kB)}`` for every add node (sample index ``j >= 1``)."""
        pairs = {}
        for k in range(self.n):
            if k >= 1:
                pairs[2 * k] = (k, k - 1)
            pairs[2 * k + 1] = (k, k)
        return pairs

    def _build_edges(self):
        for u, cfg in (("A", self.cfgA), ("B", self.cfgB)):
            for k in range(cfg.n):
                yield ("c", u, k), ("s", u, int(cfg.pi[k]) // cfg.q)
                yield ("c", u, k), ("x", u, k)
                if k >= 1:
                    yield ("c", u, k), ("x", u, k - 1)
        for j, (kA, kB) in self.add_pairs().items():
            yield ("a", j), ("x", "A", kA)
            yield ("a", j), ("x", "B", kB)
            yield ("e", j), ("a", j)
        yield ("e", 0), ("x", "A", 0)
        if self.include_tail_sample:
            yield ("e", 2 * self.n), ("x", "B", self.n - 1)

    def adjacency(self):
        adj = {}
        for a, b in self.edges:
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        return adj

    def nodes(self, kind):
        return sorted({v for e in self.edges for v in e if v[0] == kind})


def build_virtual_graph(cfgA, cfgB, include_tail_sample=False):
    if cfgA.N != cfgB.N or cfgA.q != cfgB.q:
        raise ConfigError(
            f"users must share N and q: A=({cfgA.N},{cfgA.q}) B=({cfgB.N},{cfgB.q})")
    return VirtualGraph(cfgA, cfgB, include_tail_sample)


@dataclass
class DecodeResult:
    """Decoded packets of both users.

    For a single decode the bit arrays have shape ``(N,)`` and the rest are
    scalars; batched decoders add a leading packet axis to every field.
    """

    sA_hat: np.ndarray
    sB_hat: np.ndarray
    iterations_used: np.ndarray
    converged: np.ndarray
    final_margin: np.ndarray
    beliefsA: np.ndarray = None
    beliefsB: np.ndarray = None

    def row(self, b):
        return DecodeResult(self.sA_hat[b], self.sB_hat[b], int(self.iterations_used[b]),
                            bool(self.converged[b]), float(self.final_margin[b]),
                            None if self.beliefsA is None else self.beliefsA[b],
                            None if self.beliefsB is None else self.beliefsB[b])


def evidence_likelihoods(P, posterior_factor=False):
    """Turn per-sample posterior triples into add-node factors.

    A posterior triple weights ``y = 1`` twice because two bit pairs produce
    it.  On the graph each bit pair is its own configuration, so the factor
    must be the likelihood ``(p0, p1 / 2, p2)``.  ``posterior_factor`` keeps the
    posterior unchanged.  Single-user samples (index 0, tail) are left alone.
    """
    P = np.array(P, dtype=float)
    if not posterior_factor:
        n2 = P.shape[-2] - (P.shape[-2] % 2)
        P[..., 1:n2, 1] *= 0.5
        P[..., 1:n2, :] /= P[..., 1:n2, :].sum(axis=-1, keepdims=True)
    return P


class _JointState:
    def __init__(self, P, piA, piB, q, trace=None):
        B, L, _ = P.shape
        n = piA.shape[1]
        self.n = n
        self.tail = L == 2 * n + 1
        # evidence is read-only for the whole decode
        self.P_odd = P[:, 0:2 * n:2]
        self.P_even = P[:, 1:2 * n:2]
        self.first = normalize(P[:, 0, :2])
        self.last = normalize(P[:, 2 * n, :2]) if self.tail else None
        self.A = RaMessages(piA, q)
        self.B = RaMessages(piB, q)
        # code -> add and add -> code, one array per slot
        self.outA = [np.full((B, n, 2), 0.5) for _ in range(2)]
        self.outB = [np.full((B, n, 2), 0.5) for _ in range(2)]
        self.inA = [np.full((B, n, 2), 0.5) for _ in range(2)]
        self.inB = [np.full((B, n, 2), 0.5) for _ in range(2)]
        self.trace = trace
        self.want_decisions = False

    @property
    def batch(self):
        return self.A.B

    def _edge_arrays(self):
        return self.outA + self.outB + self.inA + self.inB

    def snapshot(self):
        snap = list(self._edge_arrays())
        for msgs in (self.A, self.B):
            snap.extend(getattr(msgs, k) for k in msgs.names)
        return snap

    def _trace(self, phase):
        if self.trace is not None:
            self.trace(phase, self)

    def add_to_code(self):
        inA0 = np.empty_like(self.inA[0])
        inA0[:, 1:] = add_update(self.P_odd[:, 1:], self.outB[1][:, :-1])
        inA0[:, 0] = self.first
        inA1 = add_update(self.P_even, self.outB[0])
        inB0 = add_update(self.P_even, self.outA[1])
        inB1 = np.empty_like(self.inB[1])
        inB1[:, :-1] = add_update(self.P_odd[:, 1:], self.outA[0][:, 1:])
        inB1[:, -1] = self.last if self.tail else UNIFORM
        self.inA = [inA0, inA1]
        self.inB = [inB0, inB1]

    def code_to_add(self):
        for msgs, inc, name in ((self.A, self.inA, "outA"), (self.B, self.inB, "outB")):
            side = msgs.check_side()
            setattr(self, name, [var_update(side, inc[1]), var_update(side, inc[0])])

    def step(self):
        old = self.snapshot()
        self.add_to_code()
        self._trace("add_to_code")
        chA = var_update(self.inA[0], self.inA[1])
        chB = var_update(self.inB[0], self.inB[1])
        self.A.code_to_check(chA)
        self.B.code_to_check(chB)
        self._trace("code_to_check")
        self.A.check_to_source()
        self.B.check_to_source()
        self._trace("check_to_source")
        self.A.source_to_check()
        self.B.source_to_check()
        self._trace("source_to_check")
        self.A.check_to_code()
        self.B.check_to_code()
        self._trace("check_to_code")
        self.code_to_add()
        self._trace("code_to_add")
        new = self.snapshot()
        change = np.max([max_change(a, b) for a, b in zip(new, old)], axis=0)
        if not self.want_decisions:
            return change, None
        decisions = np.concatenate(
            [hard_decision(self.A.source_beliefs()), hard_decision(self.B.source_beliefs())], axis=1)
        return change, decisions

    def outputs(self, mask):
        bA = self.A.source_beliefs()[mask]
        bB = self.B.source_beliefs()[mask]
        return {
            "sA": hard_decision(bA),
            "sB": hard_decision(bB),
            "margin": np.minimum(source_margin(bA), source_margin(bB)),
            "bA": bA,
            "bB": bB,
        }

    def take(self, mask):
        self.P_odd = self.P_odd[mask]
        self.P_even = self.P_even[mask]
        self.first = self.first[mask]
        if self.tail:
            self.last = self.last[mask]
        self.A.take(mask)
        self.B.take(mask)
        for name in ("outA", "outB", "inA", "inB"):
            setattr(self, name, [m[mask] for m in getattr(self, name)])


def decode_batch(evidence, piA, piB, q, max_iters, tol=1e-6, decision_stop=False,
                 posterior_factor=False, trace=None):
    """Joint decode of a batch of collisions.

    ``evidence`` is ``(B, 2n, 3)`` (or ``2n + 1`` samples with the tail)
    from :func:`compute_evidence`; ``piA``, ``piB`` are ``(B, n)``.
    ``trace(phase, state)`` is called after every phase of every iteration.
    """
    P = np.asarray(evidence, dtype=float)
    piA = np.atleast_2d(piA)
    piB = np.atleast_2d(piB)
    if P.ndim != 3 or piA.shape != piB.shape or P.shape[0] != piA.shape[0]:
        raise ConfigError("evidence must be (B, L, 3) with matching (B, n) interleavers")
    n = piA.shape[1]
    if P.shape[1] not in (2 * n, 2 * n + 1):
        raise ConfigError(f"evidence length {P.shape[1]} does not match n={n}")
    P = evidence_likelihoods(P, posterior_factor)
    state = _JointState(P, piA, piB, q, trace)
    out, iterations, converged = run_flooding(
        state, max_iters, tol=tol, decision_stop=decision_stop)
    return DecodeResult(out["sA"], out["sB"], iterations, converged, out["margin"],
                        out["bA"], out["bB"])


def decode(evidence, graph, max_iters, **kwargs):
    """Decode one collision on ``graph``; see :func:`decode_batch` for options."""
    evidence = np.asarray(evidence, dtype=float)
    if evidence.shape != (graph.n_samples, 3):
        raise ConfigError(
            f"evidence shape {evidence.shape} does not match graph ({graph.n_samples}, 3)")
    res = decode_batch(evidence[None], graph.cfgA.pi[None], graph.cfgB.pi[None],
                       graph.q, max_iters, **kwargs)
    return res.row(0)
