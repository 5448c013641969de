"""Greedy d-tolerant recovery (DtOMP, OMP) and the naive subsampling baselines."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import RankDeficientError
from .matrices import MatrixKind, MatrixSpec, SensingMatrix, build, dft_matrix
from .metrics import SupportSet
from .signals import NoiseSpec, noise_vector

RANK_CUTOFF = 1e-10


@dataclass(frozen=True, eq=False)
class RecoveryResult:
    estimate: np.ndarray
    support: SupportSet
    residual_norms: list = field(default_factory=list)
    iterations: int = 0
    stopped_early: bool = False


def _entries(matrix):
    return np.asarray(getattr(matrix, "entries", matrix))


def _lstsq_qr(sub, y):
    q, r = np.linalg.qr(sub, mode="reduced")
    sv = np.linalg.svd(r, compute_uv=False)
    if sv.size == 0 or sv[-1] < RANK_CUTOFF * sv[0]:
        raise RankDeficientError(
            f"restricted matrix is rank deficient (singular values {sv.min() if sv.size else 0:.3e}"
            f" / {sv.max() if sv.size else 0:.3e})"
        )
    return solve_triangular(r, q.conj().T @ y)


def restricted_least_squares(matrix, columns, y) -> np.ndarray:
    """Least-squares coefficients of ``y`` on the given 1-indexed columns (QR based)."""
    A = _entries(matrix)
    idx = np.asarray(list(columns), dtype=np.intp) - 1
    if idx.size > A.shape[0]:
        raise RankDeficientError(f"{idx.size} columns exceed {A.shape[0]} rows")
    if idx.size == 0:
        return np.zeros(0, dtype=complex)
    return _lstsq_qr(A[:, idx], np.asarray(y))


def dtomp(matrix, y, s: int, d: int) -> RecoveryResult:
    """d-tolerant OMP.

    Like OMP, but each new index is chosen outside the 2d-closure of the
    indices already selected. Ties in the correlation go to the lowest index.
    If every index is excluded before ``s`` picks, the result is returned with
    ``stopped_early`` set.
    """
    if s < 1:
        raise ValueError("sparsity budget s must be >= 1")
    if d < 0:
        raise ValueError("d must be nonnegative")
    A = _entries(matrix)
    y = np.asarray(y)
    m, n = A.shape
    if y.shape != (m,):
        raise ValueError(f"measurement length {y.shape} does not match {m} rows")
    AH = A.conj().T
    excluded = np.zeros(n, dtype=bool)
    chosen = []
    coeffs = np.zeros(0, dtype=complex)
    residual = y.astype(complex)
    norms = []
    k = 0
    stopped = False
    while k <= s and len(chosen) < s:
        k += 1
        b = np.abs(AH @ residual)
        b[excluded] = -np.inf
        pick = int(np.argmax(b))
        if excluded[pick]:
            stopped = True
            break
        chosen.append(pick)
        excluded[max(pick - 2 * d, 0):pick + 2 * d + 1] = True
        coeffs = _lstsq_qr(A[:, chosen], y)
        residual = y - A[:, chosen] @ coeffs
        norms.append(float(np.linalg.norm(residual)))
    estimate = np.zeros(n, dtype=complex)
    estimate[chosen] = coeffs
    return RecoveryResult(
        estimate=estimate,
        support=SupportSet.from_zero_based(chosen, n),
        residual_norms=norms,
        iterations=len(chosen),
        stopped_early=stopped,
    )


def omp(matrix, y, s: int) -> RecoveryResult:
    """Plain OMP; identical to ``dtomp`` with ``d = 0``."""
    return dtomp(matrix, y, s, 0)


def block_partition(n: int, m: int):
    """Split ``[0, n)`` into ``m`` contiguous blocks, earlier blocks one longer when m does not divide n."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got m={m}, n={n}")
    q, r = divmod(n, m)
    lengths = [q + 1] * r + [q] * (m - r)
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1])).astype(int)
    return starts, lengths


def downsample(x, m: int) -> np.ndarray:
    x = np.asarray(x)
    starts, lengths = block_partition(x.size, m)
    return np.array([x[s:s + l].sum() for s, l in zip(starts, lengths)])


def block_centers(n: int, m: int) -> np.ndarray:
    """0-indexed center of each block, ``start + (len - 1) // 2``."""
    starts, lengths = block_partition(n, m)
    return starts + (np.asarray(lengths) - 1) // 2


def upsample(v, n: int) -> np.ndarray:
    v = np.asarray(v)
    out = np.zeros(n, dtype=np.result_type(v, float))
    out[block_centers(n, v.size)] = v
    return out


def coarse_grid_size(n: int, d: int) -> int:
    return -(-n // d)


def coarse_grid_matrix(m: int, n: int, d: int, rows: str = "begin", seed: int = 0) -> SensingMatrix:
    """M rows of the ceil(N/d)-order DFT: the first M (``rows='begin'``) or a seeded random subset."""
    if d < 1:
        raise ValueError("coarse grid needs d >= 1")
    order = coarse_grid_size(n, d)
    if m > order:
        raise ValueError(f"M={m} exceeds the coarse grid size ceil(N/d)={order}")
    kinds = {"begin": MatrixKind.FConsecBegin, "random": MatrixKind.FRand}
    if rows not in kinds:
        raise ValueError("rows must be 'begin' or 'random'")
    return build(MatrixSpec(kinds[rows], m, order, seed=seed))


def coarse_grid_measure(x, m: int, d: int, rows: str = "begin", seed: int = 0,
                        noise: NoiseSpec = NoiseSpec()) -> np.ndarray:
    """Measure a fine-grid signal through its ceil(N/d) block sums."""
    x = np.asarray(getattr(x, "values", x))
    A = coarse_grid_matrix(m, x.size, d, rows, seed).entries
    clean = A @ downsample(x, A.shape[1])
    ref = np.linalg.norm(clean) if noise.reference == "measurement" else np.linalg.norm(x)
    return clean + noise_vector(m, noise, ref)


def coarse_grid_recover(y, m: int, n: int, d: int, s: int, rows: str = "begin",
                        seed: int = 0) -> RecoveryResult:
    """OMP on the coarse grid; the result has length ceil(N/d)."""
    A = coarse_grid_matrix(m, n, d, rows, seed)
    return omp(A, y, min(s, A.n_cols))


def coarse_to_fine(result: RecoveryResult, n: int) -> np.ndarray:
    """Place each coarse coefficient at the center of its fine-grid block."""
    return upsample(result.estimate, n)


def ds_measure(x, m: int, noise: NoiseSpec = NoiseSpec()) -> np.ndarray:
    """Downsample then sense: y = F_M D(x) + e."""
    x = np.asarray(getattr(x, "values", x))
    clean = dft_matrix(m) @ downsample(x, m)
    ref = np.linalg.norm(clean) if noise.reference == "measurement" else np.linalg.norm(x)
    return clean + noise_vector(m, noise, ref)


def ds_reconstruct(y, n: int) -> np.ndarray:
    """x_hat = U(F_M^{-1} y)."""
    y = np.asarray(y)
    m = y.size
    return upsample(dft_matrix(m).conj().T @ y / m, n)


def ds_recover(x, m: int, noise: NoiseSpec = NoiseSpec()) -> np.ndarray:
    x = np.asarray(getattr(x, "values", x))
    return ds_reconstruct(ds_measure(x, m, noise), x.size)


def sd_measure(x, m: int, noise: NoiseSpec = NoiseSpec()) -> np.ndarray:
    """Sense then downsample: y = D(F_N x) + e."""
    x = np.asarray(getattr(x, "values", x))
    clean = downsample(dft_matrix(x.size) @ x, m)
    ref = np.linalg.norm(clean) if noise.reference == "measurement" else np.linalg.norm(x)
    return clean + noise_vector(m, noise, ref)


def sd_reconstruct(y, n: int) -> np.ndarray:
    """x_hat = F_N^{-1}(U y)."""
    return dft_matrix(n).conj().T @ upsample(np.asarray(y), n) / n


def sd_recover(x, m: int, noise: NoiseSpec = NoiseSpec()) -> np.ndarray:
    x = np.asarray(getattr(x, "values", x))
    return sd_reconstruct(sd_measure(x, m, noise), x.size)


def top_support(estimate, s: int) -> SupportSet:
    """Indices of the ``s`` largest magnitudes (ties to the lower index)."""
    est = np.asarray(estimate)
    order = np.argsort(-np.abs(est), kind="stable")[:s]
    keep = [int(i) for i in order if est[i] != 0]
    return SupportSet.from_zero_based(keep, est.size)
