"""Pure numpy versions of the Gram-matrix scans in ``_kernels.pyx``.

Both implementations take a real, C-contiguous ``float64`` matrix ``G`` of
column correlations (0-indexed) and must return identical values; the
summation order is fixed (descending values, left to right) so the two
backends agree bit for bit.
"""
import numpy as np


def cumulative_topk(G, d, k):
    """Per-row sum of the ``k`` largest ``G[i, j]`` with ``|i - j| > d``.

    Rows with fewer than ``k`` admissible entries get ``-inf``.
    """
    n = G.shape[0]
    out = np.full(n, -np.inf)
    if k == 0:
        out[:] = 0.0
        return out
    idx = np.arange(n)
    admissible = np.abs(idx[:, None] - idx[None, :]) > d
    counts = admissible.sum(axis=1)
    feasible = counts >= k
    if not feasible.any():
        return out
    masked = np.where(admissible, G, -np.inf)[feasible]
    if k < n:
        part = -np.partition(-masked, k - 1, axis=1)[:, :k]
    else:
        part = masked
    top = -np.sort(-part, axis=1)
    out[feasible] = np.cumsum(top, axis=1)[:, -1]
    return out


def separation_maxima(G):
    """Maximum of ``G[i, j]`` per wrapped separation ``min(|i-j|, n-|i-j|)``.

    Entry ``w`` covers all pairs at wrapped separation exactly ``w``; entry 0
    is the diagonal maximum.
    """
    n = G.shape[0]
    best = np.full(n // 2 + 1, -np.inf)
    idx = np.arange(n)
    for f in range(n):
        w = min(f, n - f)
        v = G[idx, (idx + f) % n].max()
        if v > best[w]:
            best[w] = v
    return best


def diagonal_spread(G):
    """Largest ``max - min`` along any off-diagonal of ``G`` (unwrapped)."""
    n = G.shape[0]
    worst = 0.0
    for f in range(1, n):
        for diag in (np.diagonal(G, f), np.diagonal(G, -f)):
            worst = max(worst, float(diag.max() - diag.min()))
    return worst
