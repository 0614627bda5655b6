"""Pure-numpy accumulation kernel; same contract as the compiled _core module."""
from __future__ import annotations

import numpy as np


def rhs_accumulate(
    times: np.ndarray,
    states: np.ndarray,
    x_t: np.ndarray,
    out: np.ndarray,
    nodes: np.ndarray,
    node_w: np.ndarray,
    inv_nh: float,
    family_id: int,
    family_param: float,
    normalized: bool,
):
    """Accumulate the delayed interaction sum over the quadrature nodes.

    times/states hold S >= 2 ascending history stamps; out receives the N x d
    velocity. node_w already carries the memory-weight values times the
    trapezoid weights, so each node contributes
        node_w[m] * inv_nh * sum_{j != i} a_ij * (x_j(s_m) - x_i(t)).
    Returns (a_min, a_max, rowsum_max) over all evaluated matrix entries,
    rowsum_max being max_i (1/N) sum_j a_ij including the diagonal.
    """
    n_stamps = times.shape[0]
    if n_stamps < 2:
        raise ValueError("rhs_accumulate: need at least two history stamps")
    n = x_t.shape[0]
    out[:] = 0.0
    a_min = np.inf
    a_max = -np.inf
    rs_max = -np.inf
    for m in range(nodes.shape[0]):
        s = nodes[m]
        k = int(np.searchsorted(times, s, side="right")) - 1
        k = min(max(k, 0), n_stamps - 2)
        th = (s - times[k]) / (times[k + 1] - times[k])
        th = min(max(th, 0.0), 1.0)
        xs = (1.0 - th) * states[k] + th * states[k + 1]
        diff = xs[None, :, :] - x_t[:, None, :]
        r = np.sqrt((diff * diff).sum(axis=2))
        if family_id == 0:
            w = np.ones_like(r)
        elif family_id == 1:
            w = (1.0 + r * r) ** (-family_param)
        else:
            w = np.exp(-family_param * r)
        if normalized:
            w = n * w / w.sum(axis=1)[:, None]
        a_min = min(a_min, float(w.min()))
        a_max = max(a_max, float(w.max()))
        rs_max = max(rs_max, float(w.sum(axis=1).max()) / n)
        np.fill_diagonal(w, 0.0)
        out += (node_w[m] * inv_nh) * np.einsum("ij,ijc->ic", w, diff)
    return a_min, a_max, rs_max
