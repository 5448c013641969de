"""Sensing matrix construction.

All constructions are deterministic given a :class:`MatrixSpec`. Random draws
come from ``numpy.random.Generator(PCG64(seed))`` (platform independent) and
are consumed in this fixed order:

* ``FConsecutive``: one integer, the row shift.
* ``FRand``: one ``choice`` of ``M`` distinct rows (then sorted).
* ``FnXStatBlocks``: the row shift, then one ``choice`` of block offsets.
* ``RGauss``: one ``(2, M, N)`` standard normal array (real, imaginary).

Index conventions: everything visible to callers (row shifts, column
indices) is 1-indexed; arrays are stored 0-indexed.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMatrixError


class MatrixKind(str, enum.Enum):
    FConsecBegin = "FConsecBegin"
    FConsecutive = "FConsecutive"
    FRand = "FRand"
    FnXStatBlocks = "FnXStatBlocks"
    RGauss = "RGauss"
    XiInflated = "XiInflated"


_TEXT_KEYS = ("kind", "m", "n", "seed", "inflation_d")


@dataclass(frozen=True)
class MatrixSpec:
    kind: MatrixKind
    n_rows: int
    n_cols: int
    seed: int = 0
    inflation_d: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", MatrixKind(self.kind))
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError(f"matrix dimensions must be positive, got {self.n_rows}x{self.n_cols}")
        if self.n_rows > self.n_cols:
            raise ValueError(f"need M <= N, got M={self.n_rows}, N={self.n_cols}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.inflation_d < 0:
            raise ValueError("inflation_d must be nonnegative")
        if self.kind is MatrixKind.FConsecutive and self.n_cols - self.n_rows < 1:
            raise ValueError("FConsecutive needs N - M >= 1 to draw a row shift")

    def to_text(self) -> str:
        """Flat ``key = value`` block, the format of a ``[matrix]`` config section."""
        values = (self.kind.value, self.n_rows, self.n_cols, self.seed, self.inflation_d)
        return "".join(f"{k} = {v}\n" for k, v in zip(_TEXT_KEYS, values))

    @classmethod
    def from_mapping(cls, mapping) -> "MatrixSpec":
        unknown = set(mapping) - set(_TEXT_KEYS)
        if unknown:
            raise ValueError(f"unknown matrix keys: {sorted(unknown)}")
        missing = {"kind", "m", "n"} - set(mapping)
        if missing:
            raise ValueError(f"missing matrix keys: {sorted(missing)}")
        return cls(
            kind=MatrixKind(str(mapping["kind"]).strip()),
            n_rows=int(mapping["m"]),
            n_cols=int(mapping["n"]),
            seed=int(mapping.get("seed", 0)),
            inflation_d=int(mapping.get("inflation_d", 0)),
        )

    @classmethod
    def from_text(cls, text: str) -> "MatrixSpec":
        mapping = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"expected 'key = value', got {line!r}")
            mapping[key.strip()] = value.strip()
        return cls.from_mapping(mapping)


@dataclass(frozen=True, eq=False)
class SensingMatrix:
    """An M x N complex matrix with unit-norm columns and the spec that built it."""

    entries: np.ndarray
    spec: MatrixSpec

    @property
    def shape(self):
        return self.entries.shape

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_cols(self) -> int:
        return self.entries.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def dft_matrix(order: int) -> np.ndarray:
    """Unnormalized DFT matrix, entry (m, n) = exp(-2 pi i (m-1)(n-1) / order)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    k = np.arange(order)
    # reduce the exponent mod order so large orders keep full phase accuracy
    phase = np.outer(k, k) % order
    return np.exp(-2j * np.pi * phase / order)


def column_normalize(matrix) -> np.ndarray:
    A = np.asarray(matrix)
    norms = np.linalg.norm(A, axis=0)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise DegenerateMatrixError(f"zero column(s) at 1-indexed position(s) {(zero + 1).tolist()}")
    return A / norms


def fnx_block_count(n: int) -> int:
    """Number of column blocks, 5 * floor(ln n), clamped to [1, n]."""
    return min(max(5 * int(math.floor(math.log(n))), 1), n)


def fnx_block_layout(n: int, rng: np.random.Generator):
    """Non-overlapping block starts (0-indexed) and widths inside ``[0, 3n)``.

    Widths are ``n // B`` with the last block absorbing the remainder. Offsets
    are uniform over all ordered non-overlapping placements (stars and bars).
    """
    b = fnx_block_count(n)
    width = n // b
    widths = [width] * (b - 1) + [n - width * (b - 1)]
    free = 3 * n - n
    bars = np.sort(rng.choice(free + b, size=b, replace=False))
    gaps = bars - np.arange(b)
    starts = gaps + np.concatenate(([0], np.cumsum(widths)[:-1]))
    return starts.astype(int), widths


def _xi_columns(m: int, n: int, inflation_d: int) -> np.ndarray:
    width = 2 * inflation_d + 1
    source = (np.arange(n) // width) % m
    return dft_matrix(m)[:, source]


def build(spec: MatrixSpec) -> SensingMatrix:
    m, n = spec.n_rows, spec.n_cols
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    kind = spec.kind
    if kind is MatrixKind.FConsecBegin:
        raw = dft_matrix(n)[:m]
    elif kind is MatrixKind.FConsecutive:
        shift = int(rng.integers(1, n - m, endpoint=True))
        raw = dft_matrix(n)[shift - 1:shift - 1 + m]
    elif kind is MatrixKind.FRand:
        rows = np.sort(rng.choice(n, size=m, replace=False))
        raw = dft_matrix(n)[rows]
    elif kind is MatrixKind.FnXStatBlocks:
        big = 3 * n
        shift = int(rng.integers(1, big - m, endpoint=True))
        starts, widths = fnx_block_layout(n, rng)
        cols = np.concatenate([np.arange(s, s + w) for s, w in zip(starts, widths)])
        rows = np.arange(shift - 1, shift - 1 + m)
        raw = np.exp(-2j * np.pi * (np.outer(rows, cols) % big) / big)
    elif kind is MatrixKind.RGauss:
        parts = rng.standard_normal((2, m, n))
        raw = (parts[0] + 1j * parts[1]) * np.sqrt(0.5)
    elif kind is MatrixKind.XiInflated:
        raw = _xi_columns(m, n, spec.inflation_d)
    else:  # pragma: no cover
        raise ValueError(f"unknown matrix kind {kind!r}")
    entries = column_normalize(raw)
    entries.flags.writeable = False
    return SensingMatrix(entries=entries, spec=spec)
