"""Batched flooding-schedule driver with per-row early stopping.

Decoders hand the driver a state object holding one row per packet.  Rows
that meet the stopping rule are frozen, their outputs collected, and the
state is compacted so the remaining rows keep iterating.  Because every
update is elementwise per row, a row's result does not depend on which
other rows share its batch.
"""

import numpy as np


def run_flooding(state, max_iters, tol=1e-6, decision_stop=False):
    """Iterate ``state.step()`` until every row stops.

    ``state`` must provide ``batch`` (int), ``step() -> (change, decisions)``
    where ``change`` is the per-row max absolute message change (decisions
    may be None unless ``state.want_decisions`` is set), ``outputs(mask)``
    returning a dict of arrays for the masked rows, and ``take(mask)``.

    A row stops when its change drops below ``tol`` or, with
    ``decision_stop``, when its hard decisions have been identical over
    three successive iterations.  Returns ``(outputs, iterations, converged)``.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    B = state.batch
    rows = np.arange(B)
    iterations = np.full(B, max_iters, dtype=np.int64)
    converged = np.zeros(B, dtype=bool)
    chunks = []
    prev = None
    stable = np.zeros(B, dtype=np.int64)
    state.want_decisions = decision_stop

    for it in range(1, max_iters + 1):
        change, decisions = state.step()
        done = change < tol
        if decision_stop and prev is not None:
            same = np.all((decisions == prev).reshape(len(rows), -1), axis=1)
            stable = np.where(same, stable + 1, 0)
            done = done | (stable >= 2)
        prev = decisions
        finished = done | (it == max_iters)
        if not finished.any():
            continue
        iterations[rows[finished]] = it
        converged[rows[finished]] = done[finished]
        chunks.append((rows[finished], state.outputs(finished)))
        keep = ~finished
        if not keep.any():
            break
        state.take(keep)
        rows = rows[keep]
        if prev is not None:
            prev = prev[keep]
        stable = stable[keep]

    outputs = {}
    for key in chunks[0][1]:
        first = chunks[0][1][key]
        full = np.empty((B,) + first.shape[1:], dtype=first.dtype)
        for idx, out in chunks:
            full[idx] = out[key]
        outputs[key] = full
    return outputs, iterations, converged


def max_change(new, old):
    """Per-row max absolute change between two batched ``(B, n, 2)`` pair arrays.

    Pairs sum to one, so the change in p0 is the change in p1.
    """
    if new.shape[1] == 0:
        return np.zeros(new.shape[0])
    return np.abs(new[..., 0] - old[..., 0]).max(axis=1)
