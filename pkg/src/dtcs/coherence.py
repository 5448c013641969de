"""Coherence measures and d-tolerant recovery-guarantee checks.

Two separation conventions coexist here on purpose:

* ``d_coherence`` uses *wrapped* separation, ``min(|i-j|, N-|i-j|) > d``.
* ``cumulative_d_coherence`` (and everything built on d-closures) uses the
  *unwrapped* separation ``|i-j| > d``.

For circulant Gram matrices (row-subsampled DFTs) the two differ near the
matrix edges, so ``mu^C_d(k) <= k * mu_d`` does not hold in general.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EnumerationBudgetError, InadmissibleError
from .metrics import closure_mask


def _entries(matrix) -> np.ndarray:
    return np.asarray(getattr(matrix, "entries", matrix))


def correlation_matrix(matrix) -> np.ndarray:
    """|<phi_i, phi_j>| / (|phi_i| |phi_j|) for all column pairs, 0-indexed."""
    A = _entries(matrix)
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise ValueError("column correlation is undefined for zero columns")
    An = A / norms
    G = np.abs(An.conj().T @ An)
    return np.minimum(G, 1.0)


def _check_column(j, n):
    if not 1 <= j <= n:
        raise IndexError(f"column index {j} outside [1, {n}]")


def column_correlation(matrix, i: int, j: int) -> float:
    A = _entries(matrix)
    n = A.shape[1]
    _check_column(i, n)
    _check_column(j, n)
    a, b = A[:, i - 1], A[:, j - 1]
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("column correlation is undefined for zero columns")
    return float(min(abs(np.vdot(a, b)) / (na * nb), 1.0))


def coherence(matrix) -> float:
    G = correlation_matrix(matrix)
    if G.shape[0] < 2:
        raise ValueError("coherence needs at least two columns")
    off = G.copy()
    np.fill_diagonal(off, -np.inf)
    return float(off.max())


def _d_coherence_from_maxima(best, d):
    tail = best[d + 1:]
    if tail.size == 0:
        raise InadmissibleError(f"no column pair has wrapped separation > {d}")
    return float(tail.max())


def d_coherence(matrix, d: int) -> float:
    """Largest correlation over pairs with wrapped separation greater than ``d``."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    best = kernels.separation_maxima(correlation_matrix(matrix))
    return _d_coherence_from_maxima(best, d)


def d_coherence_profile(matrix) -> np.ndarray:
    """``mu_d`` for ``d = 0 .. N-1``; NaN where no pair is admissible."""
    G = correlation_matrix(matrix)
    n = G.shape[0]
    best = kernels.separation_maxima(G)
    out = np.full(n, np.nan)
    # suffix maximum over separations > d
    suffix = np.maximum.accumulate(best[::-1])[::-1]
    defined = min(n, best.size - 1)
    out[:defined] = suffix[1:defined + 1]
    return out


def welch_bound(m: int, n: int) -> float:
    if not 1 <= m < n:
        raise ValueError(f"Welch bound needs 1 <= m < n, got m={m}, n={n}")
    return math.sqrt((n - m) / (m * (n - 1)))


def coherence_function(matrix, j: int) -> np.ndarray:
    """Correlations of column ``j`` with columns 1..N."""
    A = _entries(matrix)
    _check_column(j, A.shape[1])
    return correlation_matrix(A)[j - 1].copy()


class CoherenceClass(str, enum.Enum):
    Dynamic = "Dynamic"
    Static = "Static"


def classify_coherence_functions(matrix, tolerance: float = 1e-9) -> CoherenceClass:
    """Dynamic iff mu(i, i+f) is independent of i (within ``tolerance``) for every f."""
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    G = correlation_matrix(matrix)
    if G.shape[0] < 2:
        return CoherenceClass.Dynamic
    spread = kernels.diagonal_spread(G)
    return CoherenceClass.Dynamic if spread <= tolerance else CoherenceClass.Static


def _cumulative_from_gram(G, d, k):
    n = G.shape[0]
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in [0, {n}]")
    if k == 0:
        return 0.0
    rows = kernels.cumulative_topk(G, d, k)
    best = rows.max()
    if not np.isfinite(best):
        raise InadmissibleError(f"no column has {k} others farther than {d} (N={n})")
    return float(best)


def cumulative_d_coherence(matrix, d: int, k: int) -> float:
    """Cumulative d-coherence with test-set cardinality ``k``.

    For a fixed reference column ``i`` the constraint ``i not in clos_d(T)``
    splits into independent constraints ``|i - j| > d``, so the worst test set
    is simply the ``k`` most correlated admissible columns.
    """
    if d < 0:
        raise ValueError("d must be nonnegative")
    return _cumulative_from_gram(correlation_matrix(matrix), d, k)


def cumulative_lower_bound(m: int, n: int, d: int, k: int, spacing: str = "printed"):
    """Welch-type lower bound on ``mu^C_d(k)``.

    ``spacing="printed"`` uses ``N_hat = max(M, ceil(N / d))`` (``N_hat = N``
    for ``d = 0``). That count overstates how many columns can be pairwise
    more than ``d`` apart, and the bound fails e.g. for inflated DFT matrices
    once ``d`` exceeds the block width. ``spacing="separated"`` uses
    ``ceil(N / (d + 1))``, the size of an index set with all gaps > d, for
    which the bound follows from the Welch inequality on that column subset.

    Returns None when ``k > sqrt(N_hat - 1)``, where no bound is claimed.
    """
    if spacing == "printed":
        n_hat = n if d == 0 else max(m, -(-n // d))
    elif spacing == "separated":
        n_hat = max(m, -(-n // (d + 1)))
    else:
        raise ValueError("spacing must be 'printed' or 'separated'")
    if n_hat <= 1 or k > math.sqrt(n_hat - 1):
        return None
    return k * math.sqrt((n_hat - m) / (m * (n_hat - 1)))


@dataclass(frozen=True)
class CoherenceReport:
    mu: float
    mu_d_profile: np.ndarray
    welch: float
    correlation_profile: np.ndarray


def coherence_report(matrix) -> CoherenceReport:
    A = _entries(matrix)
    m, n = A.shape
    G = correlation_matrix(A)
    return CoherenceReport(
        mu=coherence(A) if n >= 2 else float("nan"),
        mu_d_profile=d_coherence_profile(A),
        welch=welch_bound(m, n) if m < n else float("nan"),
        correlation_profile=G[0].copy(),
    )


@dataclass(frozen=True)
class GuaranteeReport:
    d: int
    s: int
    mu_d: float
    mu_c_d_2s: float
    mu_c_d_2s_minus_1: float
    thm2_holds: bool
    corollary_mu_d_holds: bool
    corollary_cumulative_holds: bool

    @property
    def any_corollary(self) -> bool:
        return self.corollary_mu_d_holds or self.corollary_cumulative_holds


def _mu_d_condition(s, mu_d):
    if mu_d == 0:
        return True
    return s < 0.25 * (1.0 / mu_d + 1.0)


def _report_from(G, best, d, s):
    mu_d = _d_coherence_from_maxima(best, d)
    c2 = _cumulative_from_gram(G, d, 2 * s)
    c1 = _cumulative_from_gram(G, d, 2 * s - 1)
    return GuaranteeReport(
        d=d,
        s=s,
        mu_d=mu_d,
        mu_c_d_2s=c2,
        mu_c_d_2s_minus_1=c1,
        thm2_holds=c1 + c2 < 1.0,
        corollary_mu_d_holds=_mu_d_condition(s, mu_d),
        corollary_cumulative_holds=c2 < 0.5,
    )


def check_theorem2(matrix, d: int, s: int) -> GuaranteeReport:
    """Evaluate the cumulative-coherence recovery condition and its two corollaries."""
    if s < 1:
        raise ValueError("sparsity s must be >= 1")
    if d < 0:
        raise ValueError("d must be nonnegative")
    G = correlation_matrix(matrix)
    return _report_from(G, kernels.separation_maxima(G), d, s)


def guarantee_sweep(matrix, s: int, d_min: int = 0, d_max=None):
    """Per-d guarantee rows over ``[d_min, d_max]``.

    Yields ``(d, mu_d or None, c2 or None, c1 or None, cor_mu_d, cor_cum,
    thm2)``; quantities whose admissible set is empty are None and their
    conditions count as not holding.
    """
    if s < 1:
        raise ValueError("sparsity s must be >= 1")
    G = correlation_matrix(matrix)
    n = G.shape[0]
    best = kernels.separation_maxima(G)
    if d_max is None:
        d_max = n - 1
    for d in range(max(d_min, 0), min(d_max, n - 1) + 1):
        try:
            mu_d = _d_coherence_from_maxima(best, d)
        except InadmissibleError:
            mu_d = None
        try:
            c2 = _cumulative_from_gram(G, d, 2 * s) if 2 * s <= n else None
            c1 = _cumulative_from_gram(G, d, 2 * s - 1) if c2 is not None else None
        except InadmissibleError:
            c2 = c1 = None
        # neither corollary applies where the theorem's quantities are undefined
        cor_mu = mu_d is not None and c2 is not None and _mu_d_condition(s, mu_d)
        cor_cum = c2 is not None and c2 < 0.5
        thm2 = c2 is not None and c1 + c2 < 1.0
        yield d, mu_d, c2, c1, cor_mu, cor_cum, thm2


def admissible_d_range(matrix, s: int, d_min: int = 0, d_max=None) -> set:
    """All d for which at least one corollary condition holds."""
    return {row[0] for row in guarantee_sweep(matrix, s, d_min, d_max) if row[4] or row[5]}


def _nonempty_subsets(items):
    items = list(items)
    for r in range(1, len(items) + 1):
        yield from itertools.combinations(items, r)


def _spread_sets(n, size, gap):
    for combo in itertools.combinations(range(n), size):
        if all(b - a > gap for a, b in zip(combo, combo[1:])):
            yield combo


def check_trc_bruteforce(matrix, d: int, s: int, max_enumeration: int = 10**6) -> bool:
    """Exhaustively verify the tolerant recovery condition on a small instance.

    Enumerates every d-approximate pair ``{A, B}`` with ``A`` (4d+1)-spread and
    at least one of ``|A|, |B|`` equal to ``s``; for each, checks
    ``max_{j not in clos_2d(A)} |pinv(Phi_{A u B}) phi_j|_1 < 1``.
    """
    if d < 0 or s < 0:
        raise ValueError("d and s must be nonnegative")
    if s == 0:
        return True
    A_mat = _entries(matrix)
    n = A_mat.shape[1]
    gap = 4 * d + 1

    # Every b in B lies in exactly one window clos_d(a) since the windows of a
    # (4d+1)-spread A are disjoint; B is a choice of nonempty subsets per window.
    candidates = []
    budget = 0
    for size in range(1, s + 1):
        for a_set in _spread_sets(n, size, gap):
            windows = [range(max(a - d, 0), min(a + d, n - 1) + 1) for a in a_set]
            count = math.prod(2 ** len(w) - 1 for w in windows)
            budget += count
            if budget > max_enumeration:
                raise EnumerationBudgetError(
                    f"more than {max_enumeration} candidate pairs for N={n}, d={d}, S={s}; "
                    "use a smaller instance or raise max_enumeration"
                )
            candidates.append((a_set, windows))

    for a_set, windows in candidates:
        excluded = closure_mask(a_set, n, 2 * d)
        outside = np.flatnonzero(~excluded)
        if outside.size == 0:
            continue
        for parts in itertools.product(*(list(_nonempty_subsets(w)) for w in windows)):
            b_set = set(itertools.chain.from_iterable(parts))
            if len(a_set) != s and len(b_set) != s:
                continue
            union = sorted(b_set.union(a_set))
            coeffs, *_ = np.linalg.lstsq(A_mat[:, union], A_mat[:, outside], rcond=1e-10)
            if np.abs(coeffs).sum(axis=0).max() >= 1.0:
                return False
    return True
