import itertools
import math

import numpy as np
import pytest

from mimosel.channel import generate_iid_rayleigh
from mimosel.metrics import SingularSetError, sum_spectral_efficiency
from mimosel.numerics import OpLedger, gram_schmidt_extend
from mimosel.seeding import stream
from mimosel.selectors import (
    Algorithm,
    SelectionConfig,
    basis_stream,
    exhaustive_oracle,
    gzf,
    mcore_plus,
    random_select,
    run_selection,
    single_stream_rate,
    ss_us,
    sus,
)


def ssus_cfg(**kw):
    kw.setdefault("algorithm", Algorithm.SSUS)
    kw.setdefault("k_max", 4)
    return SelectionConfig(**kw)


def brute_force_best(h, n0, k_max):
    """Reference maximizer over every subset, independent of the oracle's
    bookkeeping: straight enumeration with lexicographic tie-break."""
    m, u = h.shape
    best_rate, best = -np.inf, None
    for size in range(1, min(k_max, m, u) + 1):
        for combo in itertools.combinations(range(u), size):
            try:
                rate = sum_spectral_efficiency(h[:, list(combo)], n0, OpLedger())
            except SingularSetError:
                continue
            if rate > best_rate:
                best_rate, best = rate, combo
    return best, best_rate


class TestSingleStreamRate:
    def test_values(self):
        assert single_stream_rate([1.0, 0.0], 1.0) == pytest.approx(1.0)
        assert single_stream_rate([math.sqrt(3), 0.0], 1.0) == pytest.approx(2.0)
        assert single_stream_rate([0.0, 0.0], 1.0) == 0.0

    def test_rejects_bad_noise(self):
        with pytest.raises(ValueError):
            single_stream_rate([1.0], 0.0)


class TestSpaceSplitSelection:
    def test_single_candidate(self):
        h = np.array([[1.0 + 1j]], dtype=complex)
        res = ss_us(h, ssus_cfg(num_bases=3, alpha=0.9), 1.0, OpLedger())
        assert res.selected == (0,)
        assert res.k_b == 1

    def test_hand_example_accepting(self):
        # Users (2,0), (0,1), (1,1): the seed is user 0; in the (unique up
        # to phase) second direction user 2 wins the weighted metric and
        # clears alpha = 0.5.
        h = np.array([[2.0, 0.0, 1.0], [0.0, 1.0, 1.0]], dtype=complex)
        res = ss_us(h, ssus_cfg(k_max=2, num_bases=1, alpha=0.5, rng_seed=3), 1.0, OpLedger())
        assert res.selected == (0, 2)
        assert res.matched_direction == (0, 1)
        assert res.weights[1] == pytest.approx(math.log2(3.0) / math.sqrt(2), rel=1e-12)

    def test_hand_example_threshold_skips_direction(self):
        # Same instance with alpha = 0.8: user 2 is still the argmax but
        # fails the cone test, so the direction stays unfilled.
        h = np.array([[2.0, 0.0, 1.0], [0.0, 1.0, 1.0]], dtype=complex)
        res = ss_us(h, ssus_cfg(k_max=2, num_bases=1, alpha=0.8, rng_seed=3), 1.0, OpLedger())
        assert res.selected == (0,)
        assert res.k_b == 1

    def test_orthogonal_equal_norm_pair(self):
        h = np.eye(2, dtype=complex) * 1.7
        res = ss_us(h, ssus_cfg(k_max=2, num_bases=8, alpha=0.001, rng_seed=1), 1.0, OpLedger())
        assert res.selected == (0, 1)
        # every basis scores identically, so the tie goes to basis 0
        assert res.winning_basis == 0

    def test_seed_is_max_norm_lowest_index_on_tie(self):
        h = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]], dtype=complex)
        res = ss_us(h, ssus_cfg(k_max=2, num_bases=1, alpha=0.1, rng_seed=0), 1.0, OpLedger())
        assert res.selected[0] == 0

    def test_k_max_one_returns_seed_only(self):
        h = generate_iid_rayleigh(4, 10, stream(8))
        res = ss_us(h, ssus_cfg(k_max=1, num_bases=5, alpha=0.3), 1.0, OpLedger())
        norms = np.linalg.norm(h, axis=0)
        assert res.selected == (int(np.argmax(norms)),)

    def test_single_antenna_returns_seed_only(self):
        h = generate_iid_rayleigh(1, 6, stream(9))
        res = ss_us(h, ssus_cfg(k_max=4, num_bases=2, alpha=0.3), 1.0, OpLedger())
        assert res.k_b == 1

    def test_deterministic(self):
        h = generate_iid_rayleigh(4, 20, stream(10))
        cfg = ssus_cfg(num_bases=6, alpha=0.4, rng_seed=77)
        a = ss_us(h, cfg, 0.5, OpLedger())
        b = ss_us(h, cfg, 0.5, OpLedger())
        assert a == b

    def test_cone_guarantee_and_reconstruction(self):
        # Every non-seed selected user clears alpha against its recorded
        # direction in the winning basis, which we rebuild from its stream.
        n0 = 0.25
        for trial in range(20):
            h = generate_iid_rayleigh(8, 40, stream(100, trial))
            cfg = ssus_cfg(k_max=8, num_bases=4, alpha=0.45, rng_seed=trial)
            res = ss_us(h, cfg, n0, OpLedger())
            norms = np.linalg.norm(h, axis=0)
            seed_user = int(np.argmax(norms))
            assert res.selected[0] == seed_user
            basis = gram_schmidt_extend(
                h[:, seed_user] / norms[seed_user],
                basis_stream(cfg.rng_seed, res.winning_basis),
                OpLedger(),
                basis_index=res.winning_basis,
            )
            for user, direction in zip(res.selected[1:], res.matched_direction[1:]):
                corr = abs(np.vdot(h[:, user], basis.matrix[:, direction])) / norms[user]
                assert corr >= cfg.alpha - 1e-12

    def test_mean_metric_is_mean_of_weights(self):
        h = generate_iid_rayleigh(4, 15, stream(11))
        res = ss_us(h, ssus_cfg(num_bases=3, alpha=0.4, rng_seed=5), 1.0, OpLedger())
        assert res.mean_metric == pytest.approx(sum(res.weights) / len(res.weights), rel=1e-12)

    def test_winning_metric_nondecreasing_in_num_bases(self):
        h = generate_iid_rayleigh(8, 30, stream(12))
        metrics = []
        for l in (1, 2, 4, 8, 16):
            res = ss_us(h, ssus_cfg(k_max=8, num_bases=l, alpha=0.45, rng_seed=9), 0.5, OpLedger())
            metrics.append(res.mean_metric)
        assert all(b >= a for a, b in zip(metrics, metrics[1:]))

    def test_scale_covariance(self):
        h = generate_iid_rayleigh(4, 12, stream(13))
        cfg = ssus_cfg(num_bases=3, alpha=0.45, rng_seed=21)
        base = ss_us(h, cfg, 0.8, OpLedger())
        c = 3.7
        scaled = ss_us(c * h, cfg, c**2 * 0.8, OpLedger())
        assert scaled.selected == base.selected
        assert scaled.matched_direction == base.matched_direction

    def test_rejects_zero_column(self):
        h = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
        with pytest.raises(ValueError, match="all-zero column"):
            ss_us(h, ssus_cfg(), 1.0, OpLedger())


class TestSemiOrthogonalSelection:
    def cfg(self, eps, k_max=4):
        return SelectionConfig(algorithm=Algorithm.SUS, k_max=k_max, sus_epsilon=eps)

    def test_single_candidate(self):
        h = np.array([[2.0]], dtype=complex)
        assert sus(h, self.cfg(0.3), 1.0, OpLedger()).selected == (0,)

    def test_orthogonal_pair_both_selected(self):
        h = np.array([[2.0, 0.0], [0.0, 1.0]], dtype=complex)
        for eps in (0.05, 0.3, 0.9):
            assert sus(h, self.cfg(eps), 1.0, OpLedger()).selected == (0, 1)

    def test_parallel_pair_keeps_stronger(self):
        h = np.array([[2.0, 1.0], [0.0, 0.0]], dtype=complex)
        assert sus(h, self.cfg(0.3), 1.0, OpLedger()).selected == (0,)

    def test_k_max_respected(self):
        h = np.eye(6, dtype=complex)
        res = sus(h, self.cfg(0.5, k_max=3), 1.0, OpLedger())
        assert res.k_b == 3

    def test_selected_survivors_are_semiorthogonal(self):
        for trial in range(10):
            h = generate_iid_rayleigh(8, 40, stream(200, trial))
            res = sus(h, self.cfg(0.45, k_max=8), 1.0, OpLedger())
            cols = [h[:, i] for i in res.selected]
            # each later pick had span-correlation <= eps at selection time;
            # check the pairwise correlations stay clearly below 1
            for a, b in itertools.combinations(cols, 2):
                corr = abs(np.vdot(a, b)) / (np.linalg.norm(a) * np.linalg.norm(b))
                assert corr < 0.999


class TestGreedyZeroForcing:
    def test_single_candidate(self):
        h = np.array([[1.0], [1.0]], dtype=complex)
        assert gzf(h, 1.0, 2, OpLedger()).selected == (0,)

    def test_identity_selects_all(self):
        m = 4
        res = gzf(np.eye(m, dtype=complex), 1.0, m, OpLedger())
        assert set(res.selected) == set(range(m))

    def test_parallel_equal_norm_pair_selects_one(self):
        h = np.array([[1.0, 1.0], [0.0, 0.0]], dtype=complex)
        res = gzf(h, 1.0, 2, OpLedger())
        assert res.selected == (0,)

    def test_rate_nondecreasing_over_iterations(self):
        for trial in range(10):
            h = generate_iid_rayleigh(6, 25, stream(300, trial))
            res = gzf(h, 0.5, 6, OpLedger())
            rates = [
                sum_spectral_efficiency(h[:, list(res.selected[: i + 1])], 0.5, OpLedger())
                for i in range(res.k_b)
            ]
            assert all(b > a for a, b in zip(rates, rates[1:]))


class TestMcorePlus:
    def test_single_candidate(self):
        h = np.array([[1.0 + 0.5j]], dtype=complex)
        assert mcore_plus(h, 1.0, OpLedger()).selected == (0,)

    def test_identity_selects_all(self):
        m = 3
        res = mcore_plus(np.eye(m, dtype=complex), 1.0, OpLedger())
        assert res.selected == tuple(range(m))

    def test_hand_example(self):
        h = np.array([[2.0, 0.0, 1.0], [0.0, 1.0, 1.0]], dtype=complex)
        res = mcore_plus(h, 1.0, OpLedger())
        assert res.selected == (0, 1)

    def test_pool_restricted_to_strongest(self):
        # Eight strong, nearly parallel users crowd out a weak orthogonal
        # one: with M=2 the pool keeps only the 4 strongest.
        rng = np.random.default_rng(31)
        base = np.array([1.0, 0.02], dtype=complex)
        strong = np.column_stack(
            [10.0 * (base + 0.01 * rng.standard_normal(2)) for _ in range(8)]
        )
        weak = np.array([[0.0], [0.1]], dtype=complex)
        h = np.hstack([strong, weak])
        res = mcore_plus(h, 1.0, OpLedger())
        assert 8 not in res.selected

    def test_rejects_large_arrays(self):
        h = generate_iid_rayleigh(13, 30, stream(1))
        with pytest.raises(ValueError, match="M <= 12"):
            mcore_plus(h, 1.0, OpLedger())


class TestRandomSelect:
    def test_all_users_when_k_equals_u(self):
        h = generate_iid_rayleigh(6, 4, stream(2))
        assert random_select(h, 4, stream(0)).selected == (0, 1, 2, 3)

    def test_deterministic(self):
        h = generate_iid_rayleigh(4, 5, stream(3))
        assert random_select(h, 1, stream(42)) == random_select(h, 1, stream(42))

    def test_uniform_frequencies(self):
        h = generate_iid_rayleigh(4, 5, stream(4))
        counts = np.zeros(5)
        draws = 10_000
        for i in range(draws):
            counts[random_select(h, 1, stream(5, i)).selected[0]] += 1
        assert np.all(np.abs(counts / draws - 0.2) <= 0.02)

    def test_rejects_out_of_range_k(self):
        h = generate_iid_rayleigh(2, 5, stream(5))
        with pytest.raises(ValueError):
            random_select(h, 3, stream(0))  # k > M
        with pytest.raises(ValueError):
            random_select(h, 0, stream(0))


class TestExhaustiveOracle:
    def test_single_candidate(self):
        h = np.array([[1.0], [2.0]], dtype=complex)
        assert exhaustive_oracle(h, 1.0, 2, OpLedger()).selected == (0,)

    def test_identity_selects_all(self):
        m = 4
        assert exhaustive_oracle(np.eye(m, dtype=complex), 1.0, m, OpLedger()).selected == tuple(
            range(m)
        )

    def test_matches_independent_enumeration(self):
        for trial in range(10):
            h = generate_iid_rayleigh(3, 7, stream(400, trial))
            res = exhaustive_oracle(h, 0.5, 3, OpLedger())
            want, want_rate = brute_force_best(h, 0.5, 3)
            assert res.selected == want
            got_rate = sum_spectral_efficiency(h[:, list(res.selected)], 0.5, OpLedger())
            assert got_rate == want_rate

    def test_three_user_hand_instance(self):
        h = np.array([[2.0, 0.0, 1.0], [0.0, 1.0, 1.0]], dtype=complex)
        res = exhaustive_oracle(h, 1.0, 2, OpLedger())
        assert res.selected == (0, 1)

    def test_rejects_oversized_search_space(self):
        h = generate_iid_rayleigh(8, 100, stream(6))
        with pytest.raises(ValueError, match="exceeds cap"):
            exhaustive_oracle(h, 1.0, 8, OpLedger())


class TestCrossAlgorithmProperties:
    def all_results(self, h, n0, k_max, seed):
        cfgs = {
            "ssus": SelectionConfig(Algorithm.SSUS, k_max=k_max, num_bases=10,
                                    alpha=0.45, rng_seed=seed),
            "sus": SelectionConfig(Algorithm.SUS, k_max=k_max, sus_epsilon=0.3),
            "gzf": SelectionConfig(Algorithm.GZF, k_max=k_max),
            "mcore_plus": SelectionConfig(Algorithm.MCORE_PLUS, k_max=k_max),
            "random": SelectionConfig(Algorithm.RANDOM, k_max=k_max, rng_seed=seed),
        }
        return {
            name: run_selection(h, cfg, n0, OpLedger()) for name, cfg in cfgs.items()
        }

    def test_indices_valid_and_bounded(self):
        for trial in range(10):
            m, u = 4, 12
            h = generate_iid_rayleigh(m, u, stream(500, trial))
            for name, res in self.all_results(h, 0.5, m, trial).items():
                assert len(set(res.selected)) == res.k_b
                assert all(0 <= i < u for i in res.selected)
                assert 1 <= res.k_b <= min(m, u)

    def test_no_heuristic_beats_oracle(self):
        n0 = 0.25178508235883346  # 6 dB point
        for trial in range(15):
            m, u = 4, 8
            h = generate_iid_rayleigh(m, u, stream(600, trial))
            oracle = exhaustive_oracle(h, n0, m, OpLedger())
            oracle_se = sum_spectral_efficiency(h[:, sorted(oracle.selected)], n0, OpLedger())
            for name, res in self.all_results(h, n0, m, trial).items():
                se = sum_spectral_efficiency(h[:, sorted(res.selected)], n0, OpLedger())
                assert se <= oracle_se, f"{name} beat the oracle on trial {trial}"

    def test_dispatch_rejects_unknown(self):
        h = generate_iid_rayleigh(2, 3, stream(7))
        cfg = SelectionConfig(Algorithm.SSUS, k_max=2)
        object.__setattr__(cfg, "algorithm", "bogus")
        with pytest.raises(ValueError, match="unknown algorithm"):
            run_selection(h, cfg, 1.0, OpLedger())


class TestSelectionConfigValidation:
    def test_alpha_bounds(self):
        with pytest.raises(ValueError):
            SelectionConfig(Algorithm.SSUS, k_max=4, alpha=0.0)
        with pytest.raises(ValueError):
            SelectionConfig(Algorithm.SSUS, k_max=4, alpha=1.0)

    def test_num_bases_and_k_max(self):
        with pytest.raises(ValueError):
            SelectionConfig(Algorithm.SSUS, k_max=0)
        with pytest.raises(ValueError):
            SelectionConfig(Algorithm.SSUS, k_max=4, num_bases=0)

    def test_sus_epsilon(self):
        with pytest.raises(ValueError):
            SelectionConfig(Algorithm.SUS, k_max=4, sus_epsilon=1.0)
