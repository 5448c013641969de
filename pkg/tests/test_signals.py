import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from dtcs.matrices import MatrixKind, MatrixSpec, build
from dtcs.metrics import is_d_spread
from dtcs.signals import NoiseSpec, generate_signal, max_spread_sparsity, measure, noise_vector

phi = build(MatrixSpec(MatrixKind.FRand, 16, 64, seed=1))


class TestGenerate:
    def test_full_support(self):
        sig = generate_signal(12, 12, seed=0)
        assert sig.support.indices == tuple(range(1, 13))
        assert np.all(sig.values != 0)

    def test_empty(self):
        sig = generate_signal(5, 0, seed=0)
        assert len(sig.support) == 0 and not sig.values.any()

    def test_amplitude_law(self):
        sig = generate_signal(4000, 4000, seed=3)
        for part in (sig.values.real, sig.values.imag):
            assert part.min() >= -50 and part.max() <= 50
            assert stats.kstest(part, stats.uniform(-50, 100).cdf).pvalue > 1e-3

    def test_deterministic(self):
        a, b = generate_signal(100, 7, 42), generate_signal(100, 7, 42)
        assert np.array_equal(a.values, b.values) and a.support == b.support
        assert not np.array_equal(a.values, generate_signal(100, 7, 43).values)

    @settings(max_examples=100)
    @given(st.integers(1, 200), st.integers(0, 2**64 - 1), st.data())
    def test_support_matches_values(self, n, seed, data):
        s = data.draw(st.integers(0, n))
        sig = generate_signal(n, s, seed)
        assert sig.sparsity == s and sig.n == n
        assert np.array_equal(sig.values != 0, sig.support.mask())

    @settings(max_examples=100)
    @given(st.integers(1, 300), st.integers(0, 10), st.integers(0, 2**64 - 1), st.data())
    def test_spread_support(self, n, d, seed, data):
        gap = 4 * d + 1
        s = data.draw(st.integers(1, max_spread_sparsity(n, gap)))
        sig = generate_signal(n, s, seed, spread=gap)
        assert sig.sparsity == s
        assert is_d_spread(sig.support, gap)

    def test_spread_infeasible(self):
        with pytest.raises(ValueError):
            generate_signal(10, 3, 0, spread=5)

    def test_too_sparse(self):
        with pytest.raises(ValueError):
            generate_signal(3, 4, 0)

    def test_uniform_support(self):
        n, s, trials = 1024, 16, 4000
        counts = np.zeros(n)
        for seed in range(trials):
            counts[generate_signal(n, s, seed).support.zero_based()] += 1
        assert stats.chisquare(counts).pvalue > 1e-3

    def test_uniform_spread_support(self):
        # every 2-spread 2-subset of [1, 7] is equally likely
        from itertools import combinations
        pairs = [c for c in combinations(range(1, 8), 2) if c[1] - c[0] > 2]
        index = {p: i for i, p in enumerate(pairs)}
        counts = np.zeros(len(pairs))
        for seed in range(5000):
            counts[index[generate_signal(7, 2, seed, spread=2).support.indices]] += 1
        assert stats.chisquare(counts).pvalue > 1e-3


class TestNoise:
    def test_infinite_snr(self):
        sig = generate_signal(64, 4, 1)
        y = measure(phi, sig, NoiseSpec())
        assert np.array_equal(y, phi.entries @ sig.values)

    @pytest.mark.parametrize("snr,ratio", [(0, 1.0), (20, 10.0), (10, math.sqrt(10)), (-6, 10 ** (-0.3))])
    def test_snr_scaling(self, snr, ratio):
        sig = generate_signal(64, 4, 1)
        clean = phi.entries @ sig.values
        e = measure(phi, sig, NoiseSpec(snr, seed=9)) - clean
        assert np.linalg.norm(clean) / np.linalg.norm(e) == pytest.approx(ratio, rel=1e-9)

    def test_signal_reference(self):
        sig = generate_signal(64, 4, 1)
        e = measure(phi, sig, NoiseSpec(20, seed=2, reference="signal")) - phi.entries @ sig.values
        assert np.linalg.norm(e) == pytest.approx(np.linalg.norm(sig.values) / 10, rel=1e-9)

    def test_direction_independent_of_scale(self):
        a = noise_vector(30, NoiseSpec(3, seed=5), 1.0)
        b = noise_vector(30, NoiseSpec(17, seed=5), 2.0)
        np.testing.assert_allclose(a / np.linalg.norm(a), b / np.linalg.norm(b), atol=1e-14)

    def test_complex_and_seeded(self):
        a = noise_vector(50, NoiseSpec(0, seed=5), 1.0)
        assert np.abs(a.imag).sum() > 0
        assert np.array_equal(a, noise_vector(50, NoiseSpec(0, seed=5), 1.0))

    def test_zero_measurement(self):
        with pytest.raises(ValueError):
            measure(phi, np.zeros(64), NoiseSpec(10))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            measure(phi, np.ones(10))

    @pytest.mark.parametrize("bad", [dict(snr_db=float("nan")), dict(snr_db=-math.inf), dict(reference="x")])
    def test_invalid_spec(self, bad):
        with pytest.raises(ValueError):
            NoiseSpec(**bad)
