import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dtcs.errors import RankDeficientError
from dtcs.coherence import coherence
from dtcs.matrices import MatrixKind, MatrixSpec, build, dft_matrix
from dtcs.metrics import SupportSet, is_d_spread
from dtcs.recovery import (
    block_centers,
    block_partition,
    coarse_grid_matrix,
    coarse_grid_measure,
    coarse_grid_recover,
    coarse_to_fine,
    downsample,
    ds_measure,
    ds_reconstruct,
    ds_recover,
    dtomp,
    omp,
    restricted_least_squares,
    sd_measure,
    sd_reconstruct,
    sd_recover,
    top_support,
    upsample,
)
from dtcs.signals import NoiseSpec, generate_signal, measure


def cmat(m, n, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))


class TestLeastSquares:
    def test_orthonormal_adjoint(self):
        F = dft_matrix(8) / np.sqrt(8)
        y = cmat(8, 1, 0)[:, 0]
        z = restricted_least_squares(F, [2, 5], y)
        np.testing.assert_allclose(z, F[:, [1, 4]].conj().T @ y, atol=1e-12)

    def test_square_exact(self):
        A = cmat(3, 3, 1)
        z_true = np.array([1, -2j, 0.5])
        z = restricted_least_squares(A, [1, 2, 3], A @ z_true)
        np.testing.assert_allclose(z, z_true, atol=1e-10)

    def test_normal_equations(self):
        A = cmat(8, 3, 2)
        y = cmat(8, 1, 3)[:, 0]
        oracle = np.linalg.solve(A.conj().T @ A, A.conj().T @ y)
        np.testing.assert_allclose(restricted_least_squares(A, [1, 2, 3], y), oracle, atol=1e-8)

    def test_rank_deficient(self):
        A = cmat(5, 2, 4)
        A = np.column_stack([A, A[:, 0] * 2])
        with pytest.raises(RankDeficientError):
            restricted_least_squares(A, [1, 2, 3], np.ones(5))

    def test_too_many_columns(self):
        with pytest.raises(RankDeficientError):
            restricted_least_squares(cmat(2, 5, 0), [1, 2, 3], np.ones(2))


def best_support(A, y, s):
    best, arg = np.inf, None
    for T in itertools.combinations(range(A.shape[1]), s):
        z, *_ = np.linalg.lstsq(A[:, T], y, rcond=None)
        r = np.linalg.norm(y - A[:, T] @ z)
        if r < best - 1e-12:
            best, arg = r, T
    return set(arg)


class TestOmp:
    def test_orthonormal_exact(self):
        F = dft_matrix(16) / 4
        sig = generate_signal(16, 5, 2)
        res = omp(F, F @ sig.values, 5)
        assert res.support == sig.support
        np.testing.assert_allclose(res.estimate, sig.values, atol=1e-9)

    @pytest.mark.parametrize("seed", range(6))
    def test_coherence_regime_matches_exhaustive(self, seed):
        A = build(MatrixSpec(MatrixKind.FRand, 11, 12, seed))
        s = 3
        assert s < (1 + 1 / coherence(A)) / 2
        sig = generate_signal(12, s, seed)
        y = A.entries @ sig.values
        res = omp(A, y, s)
        assert res.support == sig.support
        assert set(res.support.zero_based()) == best_support(A.entries, y, s)

    def test_equals_dtomp_zero(self):
        A = build(MatrixSpec(MatrixKind.FConsecBegin, 20, 80))
        y = measure(A, generate_signal(80, 6, 1), NoiseSpec(5, seed=1))
        a, b = omp(A, y, 6), dtomp(A, y, 6, 0)
        assert np.array_equal(a.estimate, b.estimate)
        assert a.residual_norms == b.residual_norms

    def test_tie_breaks_low(self):
        A = np.eye(4)
        res = omp(A, np.array([1.0, 1.0, 1.0, 1.0]), 1)
        assert res.support.indices == (1,)


class TestDtomp:
    def test_invalid(self):
        with pytest.raises(ValueError):
            dtomp(np.eye(3), np.ones(3), 0, 0)
        with pytest.raises(ValueError):
            dtomp(np.eye(3), np.ones(4), 1, 0)

    def test_early_stop(self):
        A = build(MatrixSpec(MatrixKind.FRand, 8, 10, 0))
        res = dtomp(A, A.entries @ np.ones(10), 5, 2)
        assert res.stopped_early
        assert len(res.support) < 5

    def test_single_spike_corollary_regime(self):
        A = build(MatrixSpec(MatrixKind.FConsecBegin, 64, 1024))
        for seed in range(5):
            sig = generate_signal(1024, 1, seed)
            res = dtomp(A, A.entries @ sig.values, 1, 13)
            assert abs(res.support.indices[0] - sig.support.indices[0]) <= 13

    @settings(max_examples=40, deadline=None)
    @given(st.sampled_from(list(MatrixKind)), st.integers(0, 3), st.integers(1, 6),
           st.integers(0, 2**32), st.sampled_from([float("inf"), 0.0, 10.0]))
    def test_invariants(self, kind, d, s, seed, snr):
        A = build(MatrixSpec(kind, 24, 60, seed, 1))
        sig = generate_signal(60, s, seed)
        y = measure(A, sig, NoiseSpec(snr, seed=seed))
        try:
            res = dtomp(A, y, s, d)
        except RankDeficientError:
            return
        assert len(res.support) <= s
        assert is_d_spread(res.support, 2 * d)
        assert all(b <= a + 1e-9 for a, b in zip(res.residual_norms, res.residual_norms[1:]))
        r = y - A.entries @ res.estimate
        cols = A.entries[:, res.support.zero_based()]
        assert np.abs(cols.conj().T @ r).max() <= 1e-8 * max(1, np.linalg.norm(y))
        if d == 0:
            assert np.array_equal(res.estimate, omp(A, y, s).estimate)

    def test_noiseless_refit_exact(self):
        A = build(MatrixSpec(MatrixKind.FRand, 32, 64, 5))
        sig = generate_signal(64, 4, 8)
        res = dtomp(A, A.entries @ sig.values, 4, 0)
        assert res.support == sig.support
        np.testing.assert_allclose(res.estimate, sig.values, atol=1e-8)


class TestBlocks:
    def test_sums(self):
        np.testing.assert_array_equal(downsample([1, 2, 3, 4], 2), [3, 7])

    def test_identity(self):
        x = np.arange(7.0)
        np.testing.assert_array_equal(downsample(x, 7), x)
        np.testing.assert_array_equal(upsample(x, 7), x)

    def test_uneven_partition(self):
        starts, lengths = block_partition(5, 2)
        assert list(starts) == [0, 3] and lengths == [3, 2]

    def test_upsample_centers(self):
        np.testing.assert_array_equal(upsample([3, 7], 4), [3, 0, 7, 0])
        assert list(block_centers(5, 2)) == [1, 3]

    @settings(max_examples=80)
    @given(st.integers(1, 60), st.data())
    def test_round_trip(self, n, data):
        m = data.draw(st.integers(1, n))
        v = np.asarray(data.draw(st.lists(st.floats(-1e6, 1e6), min_size=m, max_size=m)))
        np.testing.assert_array_equal(downsample(upsample(v, n), m), v)

    def test_invalid(self):
        with pytest.raises(ValueError):
            block_partition(3, 4)


class TestDsSd:
    def test_ds_square_center_signal(self):
        x = np.array([1 + 1j, -2, 0.5j, 3])
        np.testing.assert_allclose(ds_recover(x, 4), x, atol=1e-12)

    def test_ds_equals_block_map(self):
        x = generate_signal(30, 5, 3).values
        np.testing.assert_allclose(ds_recover(x, 7), upsample(downsample(x, 7), 30), atol=1e-9)

    def test_ds_single_spike(self):
        x = np.zeros(12, dtype=complex)
        x[5] = 4 - 1j
        out = ds_recover(x, 4)
        expected = np.zeros(12, dtype=complex)
        expected[4] = 4 - 1j  # block {3,4,5} has center 4
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_ds_matches_fft(self):
        x = generate_signal(20, 4, 0).values
        np.testing.assert_allclose(ds_measure(x, 5), np.fft.fft(downsample(x, 5)), atol=1e-9)

    def test_sd_square(self):
        x = generate_signal(16, 4, 1).values
        np.testing.assert_allclose(sd_recover(x, 16), x, atol=1e-9)

    def test_sd_dense_oracle(self):
        n, m = 16, 8
        x = np.zeros(n, dtype=complex)
        x[6] = 2 + 3j
        F = np.exp(-2j * np.pi * np.outer(np.arange(n), np.arange(n)) / n)
        D = np.zeros((m, n))
        U = np.zeros((n, m))
        for k in range(m):
            D[k, 2 * k:2 * k + 2] = 1
            U[2 * k, k] = 1
        expected = np.linalg.inv(F) @ U @ D @ F @ x
        np.testing.assert_allclose(sd_recover(x, m), expected, atol=1e-10)

    def test_sd_zero_signal_noise(self):
        x = np.zeros(16)
        x[0] = 1.0
        y = sd_measure(x, 4, NoiseSpec(0, seed=2))
        e = y - downsample(np.fft.fft(x), 4)
        np.testing.assert_allclose(sd_reconstruct(e, 16), np.fft.ifft(upsample(e, 16)), atol=1e-12)

    def test_ds_reconstruct_ifft(self):
        y = cmat(6, 1, 0)[:, 0]
        np.testing.assert_allclose(ds_reconstruct(y, 18), upsample(np.fft.ifft(y), 18), atol=1e-12)


class TestCoarseGrid:
    def test_matrix_shape(self):
        A = coarse_grid_matrix(8, 100, 3, rows="random", seed=2)
        assert A.shape == (8, 34)

    def test_too_many_rows(self):
        with pytest.raises(ValueError):
            coarse_grid_matrix(40, 100, 3)

    def test_needs_positive_d(self):
        with pytest.raises(ValueError):
            coarse_grid_matrix(4, 100, 0)

    def test_d_one_is_fine_grid(self):
        A = coarse_grid_matrix(10, 40, 1, rows="random", seed=4)
        B = build(MatrixSpec(MatrixKind.FRand, 10, 40, seed=4))
        np.testing.assert_array_equal(A.entries, B.entries)

    @pytest.mark.parametrize("pos", [0, 17, 63, 99])
    def test_single_spike_bin(self, pos):
        x = np.zeros(100, dtype=complex)
        x[pos] = 3 + 2j
        y = coarse_grid_measure(x, 12, 4, rows="random", seed=1)
        res = coarse_grid_recover(y, 12, 100, 4, 1, rows="random", seed=1)
        assert res.estimate.size == 25
        starts, lengths = block_partition(100, 25)
        k = res.support.zero_based()[0]
        assert starts[k] <= pos < starts[k] + lengths[k]
        fine = coarse_to_fine(res, 100)
        assert np.flatnonzero(fine).tolist() == [block_centers(100, 25)[k]]

    def test_incoherent_exact(self):
        sig = np.zeros(64, dtype=complex)
        sig[[3, 20, 50]] = [1, 2j, -1.5]
        y = coarse_grid_measure(sig, 16, 2, rows="random", seed=3)
        res = coarse_grid_recover(y, 16, 64, 2, 3, rows="random", seed=3)
        assert res.support.indices == (2, 11, 26)


def test_top_support():
    est = np.array([0, 3, -5, 1j, 3])
    assert top_support(est, 2).indices == (2, 3)
    assert top_support(est, 3).indices == (2, 3, 5)
    assert top_support(np.zeros(4), 2).indices == ()
