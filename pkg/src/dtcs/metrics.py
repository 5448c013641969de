"""Index-set machinery and d-tolerant recovery measures.

All indices are 1-indexed, closures are clamped to ``[1, N]`` and never wrap.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass(frozen=True)
class SupportSet:
    """Sorted, duplicate-free set of 1-indexed positions inside ``[1, ambient_n]``."""

    indices: tuple
    ambient_n: int

    def __post_init__(self):
        idx = tuple(sorted({int(i) for i in self.indices}))
        if idx and (idx[0] < 1 or idx[-1] > self.ambient_n):
            raise ValueError(f"indices must lie in [1, {self.ambient_n}], got {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_mask(cls, mask) -> "SupportSet":
        mask = np.asarray(mask, dtype=bool)
        return cls(tuple((np.flatnonzero(mask) + 1).tolist()), mask.size)

    @classmethod
    def from_zero_based(cls, positions: Iterable[int], n: int) -> "SupportSet":
        return cls(tuple(int(p) + 1 for p in positions), n)

    def zero_based(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp) - 1

    def mask(self) -> np.ndarray:
        out = np.zeros(self.ambient_n, dtype=bool)
        out[self.zero_based()] = True
        return out

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i):
        return i in set(self.indices)

    def issubset(self, other: "SupportSet") -> bool:
        return set(self.indices) <= set(other.indices)


def _as_support(indices, n=None) -> SupportSet:
    if isinstance(indices, SupportSet):
        return indices
    indices = tuple(indices)
    if n is None:
        n = max(indices, default=0)
    return SupportSet(indices, n)


def closure_mask(positions0, n: int, d: int) -> np.ndarray:
    """Boolean mask of the d-closure of 0-indexed ``positions0`` in a length-``n`` axis."""
    mask = np.zeros(n, dtype=bool)
    for p in positions0:
        mask[max(p - d, 0):min(p + d, n - 1) + 1] = True
    return mask


def d_closure(indices: SupportSet, d: int) -> SupportSet:
    if d < 0:
        raise ValueError("d must be nonnegative")
    support = _as_support(indices)
    return SupportSet.from_mask(closure_mask(support.zero_based(), support.ambient_n, d))


def rho_d(true_support: SupportSet, recovered_support: SupportSet, d: int) -> float:
    """Fraction of true positions within ``d`` of some recovered position."""
    truth = _as_support(true_support)
    if len(truth) == 0:
        raise ValueError("rho_d is undefined for an empty true support")
    rec = _as_support(recovered_support, truth.ambient_n)
    n = max(truth.ambient_n, rec.ambient_n)
    covered = closure_mask(rec.zero_based(), n, d)
    return float(covered[truth.zero_based()].sum()) / len(truth)


def s_max(n: int, d: int) -> int:
    """Maximal number of nonzeros resolvable d-tolerantly in length ``n``."""
    if n < 1 or d < 0:
        raise ValueError("need n >= 1 and d >= 0")
    return (n - 1) // (2 * d + 1) + 1


def is_d_spread(indices, d: int) -> bool:
    idx = sorted(_as_support(indices).indices)
    return all(b - a > d for a, b in zip(idx, idx[1:]))


def is_d_approximate_pair(a, b, d: int, s: int) -> bool:
    """True iff each set lies in the other's d-closure and one has cardinality >= s."""
    sa, sb = _as_support(a), _as_support(b)
    n = max(sa.ambient_n, sb.ambient_n)
    sa, sb = SupportSet(sa.indices, n), SupportSet(sb.indices, n)
    if max(len(sa), len(sb)) < s:
        return False
    return sa.issubset(d_closure(sb, d)) and sb.issubset(d_closure(sa, d))


def proxy_signals(true_values, recovered, d: int):
    """Proxy vectors of the tolerant l2 measure.

    Both proxies live on ``supp(true_values)``; entry ``i`` sums the magnitudes
    of the respective signal over the d-closure of ``i``.
    """
    x = np.asarray(true_values)
    xr = np.asarray(recovered)
    if x.shape != xr.shape or x.ndim != 1:
        raise ValueError("true and recovered signals must be 1-D with equal length")
    n = x.size
    ax, ar = np.abs(x), np.abs(xr)
    xp = np.zeros(n)
    xrp = np.zeros(n)
    for i in np.flatnonzero(x):
        lo, hi = max(i - d, 0), min(i + d, n - 1) + 1
        xp[i] = ax[lo:hi].sum()
        xrp[i] = ar[lo:hi].sum()
    return xp, xrp


def rho_2(true_signal, recovered, d: int) -> float:
    """Tolerant l2 recovery measure, ``1 - |xr_p - x_p| / (|xr_p| |x_p|)``."""
    values = getattr(true_signal, "values", true_signal)
    xp, xrp = proxy_signals(values, recovered, d)
    nx = np.linalg.norm(xp)
    nr = np.linalg.norm(xrp)
    if nx == 0:
        raise ValueError("rho_2 is undefined for a zero true signal")
    if nr == 0:
        raise ValueError("rho_2 is undefined: recovered proxy vanishes on the true support")
    return float(1.0 - np.linalg.norm(xrp - xp) / (nr * nx))
