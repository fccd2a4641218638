"""Probability-vector message primitives shared by every BP decoder.

A binary message is an array whose last axis has length 2, ``(p0, p1)``.
A ternary add-node message has last axis 3, ``(p0, p1, p2)`` where index
``i`` means "i of the two overlapped bits are 1".  Leading axes are batch
axes and broadcast freely.
"""

import numpy as np

EPS = 1e-12

UNIFORM = np.array([0.5, 0.5])


def _pair_from_p0(p0):
    out = np.empty(p0.shape + (2,))
    np.minimum(np.maximum(p0, EPS), 1.0 - EPS, out=out[..., 0])
    np.subtract(1.0, out[..., 0], out=out[..., 1])
    return out


def clamp(m):
    """Clamp a normalized pair to [EPS, 1 - EPS], keeping p0 + p1 == 1."""
    return _pair_from_p0(m[..., 0])


def normalize(m):
    """Normalize a non-negative pair and clamp it.

    Rows whose entries sum to zero (conflicting certainties) become uniform.
    """
    m = np.asarray(m, dtype=float)
    m0 = m[..., 0]
    with np.errstate(invalid="ignore", divide="ignore"):
        p0 = np.asarray(m0 / (m0 + m[..., 1]))
    bad = np.isnan(p0)
    if bad.any():
        p0 = np.where(bad, 0.5, p0)
    return _pair_from_p0(p0)


def normalize_triple(p):
    p = np.asarray(p, dtype=float)
    s = p.sum(axis=-1, keepdims=True)
    return p / s


def add_update(P, m_in):
    """Message out of an add node towards one of its two code nodes.

    ``P`` is the triple on the evidence edge and ``m_in`` the message
    arriving from the *other* code node.  Compatibility requires
    ``x + x' = y``.
    """
    P = np.asarray(P, dtype=float)
    m_in = np.asarray(m_in, dtype=float)
    shape = np.broadcast_shapes(P.shape[:-1], m_in.shape[:-1])
    out = np.empty(shape + (2,))
    out[..., 0] = P[..., 0] * m_in[..., 0] + P[..., 1] * m_in[..., 1]
    out[..., 1] = P[..., 1] * m_in[..., 0] + P[..., 2] * m_in[..., 1]
    return normalize(out)


def chk_update(m1, m2):
    """XOR convolution of two binary messages (parity check of degree 3)."""
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    shape = np.broadcast_shapes(m1.shape[:-1], m2.shape[:-1])
    out = np.empty(shape + (2,))
    out[..., 0] = m1[..., 0] * m2[..., 0] + m1[..., 1] * m2[..., 1]
    out[..., 1] = m1[..., 0] * m2[..., 1] + m1[..., 1] * m2[..., 0]
    return clamp(out)


def var_update(*inputs):
    """Normalized componentwise product of the incoming binary messages.

    Used for code nodes, source nodes and the code-to-add direction alike.
    A single input passes through (after clamping).
    """
    if len(inputs) == 1 and isinstance(inputs[0], (list, tuple)):
        inputs = tuple(inputs[0])
    if not inputs:
        raise ValueError("var_update needs at least one input message")
    prod = np.asarray(inputs[0], dtype=float)
    for m in inputs[1:]:
        prod = prod * np.asarray(m, dtype=float)
    return normalize(prod)


def contradictory(*inputs):
    """True where the raw product of ``inputs`` is all-zero.

    ``var_update`` maps such rows to (0.5, 0.5); this reports which ones.
    """
    prod = np.asarray(inputs[0], dtype=float)
    for m in inputs[1:]:
        prod = prod * np.asarray(m, dtype=float)
    return ~(prod[..., 0] + prod[..., 1] > 0)


def is_normalized(m, tol=1e-9):
    m = np.asarray(m)
    return bool(np.all(m >= 0) and np.all(np.abs(m.sum(axis=-1) - 1.0) <= tol))


def hard_decision(m):
    """argmax of a pair with ties going to bit 0."""
    return (m[..., 1] > m[..., 0]).astype(np.uint8)


def llr_to_pair(llr):
    """BeliefPair from an LLR ln(p0/p1)."""
    llr = np.asarray(llr, dtype=float)
    p0 = 0.5 * (1.0 + np.tanh(0.5 * llr))
    out = np.empty(llr.shape + (2,))
    out[..., 0] = p0
    out[..., 1] = 1.0 - p0
    return clamp(out)


def leave_one_out_product(m, axis):
    """Product over ``axis`` of all entries except the one at each position."""
    m = np.moveaxis(m, axis, 0)
    k = m.shape[0]
    ones = np.ones_like(m[:1])
    prefix = np.concatenate([ones, np.cumprod(m[:-1], axis=0)], axis=0)
    suffix = np.concatenate([np.cumprod(m[::-1][:-1], axis=0)[::-1], ones], axis=0) if k > 1 else ones
    return np.moveaxis(prefix * suffix, 0, axis)
