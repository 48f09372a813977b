import itertools
import math

import numpy as np
import pytest

from mimosel.numerics import (
    BasisConstructionError,
    OpLedger,
    correlation,
    gram_schmidt_extend,
    hermitian_inner,
    orthonormality_defect,
    subset_count,
)
from mimosel.seeding import derive_seed, splitmix64, stream


class TestHermitianInner:
    def test_orthogonal(self):
        assert hermitian_inner([1, 0], [0, 1], OpLedger()) == 0

    def test_identity(self):
        assert hermitian_inner([1, 0], [1, 0], OpLedger()) == 1

    def test_conjugates_first_argument(self):
        # conj(1+i) * 1 = 1 - i
        assert hermitian_inner([1 + 1j, 0], [1, 0], OpLedger()) == 1 - 1j

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            hermitian_inner([1, 0], [1, 0, 0], OpLedger())

    def test_ledger_counts_length(self):
        led = OpLedger()
        hermitian_inner(np.ones(7), np.ones(7), led)
        assert led.complex_macs == 7

    def test_self_inner_is_norm_squared(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a = rng.standard_normal(6) + 1j * rng.standard_normal(6)
            val = hermitian_inner(a, a, OpLedger())
            assert abs(val.imag) <= 1e-12
            assert val.real >= 0
            assert abs(val.real - np.linalg.norm(a) ** 2) <= 1e-12 * val.real


class TestCorrelation:
    def test_orthogonal(self):
        assert correlation([1, 0], [0, 1], OpLedger()) == 0.0

    def test_parallel_scale_invariant(self):
        assert correlation([3, 0], [1, 0], OpLedger()) == pytest.approx(1.0, abs=1e-12)

    def test_45_degrees(self):
        assert correlation([1, 1], [1, 0], OpLedger()) == pytest.approx(
            1 / math.sqrt(2), abs=1e-12
        )

    def test_zero_norm_rejected(self):
        with pytest.raises(ValueError, match="zero-norm"):
            correlation([0, 0], [1, 0], OpLedger())

    def test_scale_invariance_complex(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            h = rng.standard_normal(5) + 1j * rng.standard_normal(5)
            v = rng.standard_normal(5) + 1j * rng.standard_normal(5)
            c = (rng.standard_normal() + 1j * rng.standard_normal()) or 1.0
            base = correlation(h, v, OpLedger())
            assert correlation(c * h, v, OpLedger()) == pytest.approx(base, abs=1e-12)
            assert correlation(h, c * v, OpLedger()) == pytest.approx(base, abs=1e-12)

    def test_range(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            assert 0.0 <= correlation(h, v, OpLedger()) <= 1.0


class TestGramSchmidt:
    def test_2d_complement_unique_up_to_phase(self):
        basis = gram_schmidt_extend([1, 0], stream(11), OpLedger())
        second = basis.matrix[:, 1]
        assert abs(second[0]) <= 1e-12
        assert abs(abs(second[1]) - 1.0) <= 1e-12

    def test_orthonormality_dim4(self):
        seed = np.zeros(4, dtype=complex)
        seed[0] = 1.0
        basis = gram_schmidt_extend(seed, stream(5), OpLedger())
        gram = basis.matrix.conj().T @ basis.matrix
        assert np.max(np.abs(gram - np.eye(4))) <= 1e-10

    def test_deterministic_given_stream(self):
        seed = np.zeros(3, dtype=complex)
        seed[1] = 1.0
        a = gram_schmidt_extend(seed, stream(99, 0), OpLedger())
        b = gram_schmidt_extend(seed, stream(99, 0), OpLedger())
        assert np.array_equal(a.matrix, b.matrix)

    @pytest.mark.parametrize("m", [2, 4, 8, 16])
    def test_orthonormality_random_seeds(self, m):
        rng = np.random.default_rng(m)
        for trial in range(50):
            v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
            v /= np.linalg.norm(v)
            basis = gram_schmidt_extend(v, stream(m, trial), OpLedger())
            cross, norm_err = orthonormality_defect(basis.matrix)
            assert cross <= 1e-10
            assert norm_err <= 1e-10

    def test_non_unit_seed_rejected(self):
        with pytest.raises(ValueError, match="unit norm"):
            gram_schmidt_extend([1.0, 1.0], stream(1), OpLedger())

    def test_ledger_counts(self):
        # With no redraws the construction costs exactly m^3 MACs and
        # m*(m-1) divisions (normalization of the m-1 appended columns).
        for m in (2, 4, 8):
            seed = np.zeros(m, dtype=complex)
            seed[0] = 1.0
            led = OpLedger()
            gram_schmidt_extend(seed, stream(m), led)
            assert led.complex_macs == m**3
            assert led.divisions == m * (m - 1)

    def test_broken_rng_detected(self):
        class ZeroRng:
            def standard_normal(self, n):
                return np.zeros(n)

        with pytest.raises(BasisConstructionError):
            gram_schmidt_extend([1.0, 0.0], ZeroRng(), OpLedger())


class TestSubsetCount:
    def test_large_pool_anchors(self):
        assert subset_count(50, 4) - subset_count(50, 3) == 230300
        assert subset_count(100, 8) - subset_count(100, 7) == 186087894300

    def test_small_example(self):
        assert subset_count(4, 2) == 10

    @pytest.mark.parametrize("u,k", [(5, 3), (8, 8), (12, 4), (15, 6)])
    def test_matches_enumeration(self, u, k):
        enumerated = sum(
            1
            for size in range(1, k + 1)
            for _ in itertools.combinations(range(u), size)
        )
        assert subset_count(u, k) == enumerated

    def test_rejects_bad_k(self):
        with pytest.raises(ValueError):
            subset_count(4, 0)
        with pytest.raises(ValueError):
            subset_count(4, 5)


class TestOpLedger:
    def test_additive_across_calls(self):
        led = OpLedger()
        hermitian_inner(np.ones(4), np.ones(4), led)
        hermitian_inner(np.ones(6), np.ones(6), led)
        assert led.complex_macs == 10

    def test_merge_equals_combined(self):
        a, b, combined = OpLedger(), OpLedger(), OpLedger()
        correlation([1, 1j], [1, 0], a)
        hermitian_inner([1, 0, 0], [0, 1, 0], b)
        correlation([1, 1j], [1, 0], combined)
        hermitian_inner([1, 0, 0], [0, 1, 0], combined)
        a.merge(b)
        assert (a.complex_macs, a.divisions, a.comparisons) == (
            combined.complex_macs,
            combined.divisions,
            combined.comparisons,
        )


class TestSeeding:
    def test_splitmix_is_64_bit(self):
        for x in (0, 1, 2**63, 2**64 - 1):
            assert 0 <= splitmix64(x) < 2**64

    def test_derive_distinguishes_parts(self):
        assert derive_seed(1, 2, 3) != derive_seed(1, 2, 4)
        assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
        assert derive_seed(1) != derive_seed(1, 0)

    def test_stream_reproducible(self):
        a = stream(42, 7).standard_normal(5)
        b = stream(42, 7).standard_normal(5)
        assert np.array_equal(a, b)
