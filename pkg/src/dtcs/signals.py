"""Sparse test signals, measurements and SNR-scaled noise.

Random streams: ``numpy.random.Generator(PCG64(seed))``. A signal draws its
support first, then the real parts, then the imaginary parts of the
nonzeros. Noise draws the real parts, then the imaginary parts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrics import SupportSet

AMPLITUDE = 50.0


@dataclass(frozen=True, eq=False)
class SparseSignal:
    values: np.ndarray
    support: SupportSet

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def sparsity(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class NoiseSpec:
    """Additive complex Gaussian noise at a given SNR in dB.

    ``reference`` selects the norm the SNR is measured against: the noiseless
    measurement ``Phi x`` (default) or the signal ``x`` itself.
    """

    snr_db: float = math.inf
    seed: int = 0
    reference: str = "measurement"

    def __post_init__(self):
        if self.reference not in ("measurement", "signal"):
            raise ValueError("reference must be 'measurement' or 'signal'")
        if math.isnan(self.snr_db) or self.snr_db == -math.inf:
            raise ValueError("snr_db must be finite or +inf")


def _rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def max_spread_sparsity(n: int, gap: int) -> int:
    """Largest s admitting an s-element gap-spread subset of [1, n]."""
    return (n - 1) // (gap + 1) + 1


def generate_signal(n: int, s: int, seed: int, spread=None) -> SparseSignal:
    """Draw an s-sparse complex signal of length n.

    The support is uniform over all s-subsets, or over all ``spread``-spread
    s-subsets when ``spread`` is given. Spread supports are sampled exactly by
    compressing the gaps: choosing s sorted positions ``q`` in
    ``[0, n - (s-1)*spread)`` and mapping ``q_k -> q_k + k*spread`` is a
    bijection onto the spread subsets.
    """
    if not 0 <= s <= n:
        raise ValueError(f"need 0 <= s <= n, got s={s}, n={n}")
    rng = _rng(seed)
    if spread is None:
        pos = np.sort(rng.choice(n, size=s, replace=False))
    else:
        if spread < 0:
            raise ValueError("spread must be nonnegative")
        if s > 0 and s > max_spread_sparsity(n, spread):
            raise ValueError(f"no {spread}-spread support of size {s} exists in length {n}")
        room = n - max(s - 1, 0) * spread
        pos = np.sort(rng.choice(room, size=s, replace=False)) + spread * np.arange(s)
    re = rng.uniform(-AMPLITUDE, AMPLITUDE, size=s)
    im = rng.uniform(-AMPLITUDE, AMPLITUDE, size=s)
    values = np.zeros(n, dtype=complex)
    values[pos] = re + 1j * im
    return SparseSignal(values=values, support=SupportSet.from_zero_based(pos, n))


def noise_vector(size: int, noise: NoiseSpec, reference_norm: float) -> np.ndarray:
    """Complex Gaussian noise rescaled to ``20 log10(reference_norm / |e|) = snr_db``."""
    if math.isinf(noise.snr_db):
        return np.zeros(size, dtype=complex)
    if reference_norm == 0:
        raise ValueError("SNR is undefined for a zero noiseless reference")
    rng = _rng(noise.seed)
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    e = re + 1j * im
    target = reference_norm / 10.0 ** (noise.snr_db / 20.0)
    return e * (target / np.linalg.norm(e))


def measure(matrix, x, noise: NoiseSpec = NoiseSpec()) -> np.ndarray:
    """y = Phi x + e."""
    A = np.asarray(getattr(matrix, "entries", matrix))
    values = np.asarray(getattr(x, "values", x))
    if A.shape[1] != values.size:
        raise ValueError(f"matrix has {A.shape[1]} columns but signal has length {values.size}")
    clean = A @ values
    ref = np.linalg.norm(clean) if noise.reference == "measurement" else np.linalg.norm(values)
    return clean + noise_vector(A.shape[0], noise, ref)
