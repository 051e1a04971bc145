import math
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from msetcond import (CountingSequence, Domain, MultisetObject, SizeProfile, UniformSampler,
                      boltzmann_params, builtin_class, constant_A, evaluate_C, exact_table,
                      largest_component, remainder, sample_boltzmann_Ggtm, sample_gamma_C,
                      sample_lambda_G, sample_uniform_gnN)
from msetcond.exceptions import DomainError, EmptyStratumError, TruncationRangeError
from msetcond.rng import RandomStream
from msetcond.sampling import batch, lambda_G_size_kappa, remainder_stats, shifted_params


def finite(coeffs, name="f"):
    return CountingSequence(name, Domain.EXACT, tuple(coeffs), finite=True)


def within_3sigma(count, M, p):
    return abs(count / M - p) <= 3 * math.sqrt(p * (1 - p) / M) + 1e-12


@pytest.fixture(scope="module")
def free_params(free_trees, rho_free):
    return boltzmann_params(free_trees, rho_free)


class TestObjects:
    def test_merge_and_derived(self):
        obj = MultisetObject(((3, 1, 1), (1, 2, 2), (3, 1, 2)))
        assert obj.components == ((1, 2, 2), (3, 1, 3))
        assert obj.total_size == 11 and obj.kappa == 5

    def test_rejects_bad_components(self):
        with pytest.raises(ValueError):
            MultisetObject(((0, 1, 1),))

    def test_check_against_class(self):
        seq = builtin_class("free_trees", 10)
        MultisetObject(((4, 2, 1),)).check(seq)
        with pytest.raises(ValueError):
            MultisetObject(((4, 3, 1),)).check(seq)

    def test_round_trip(self):
        obj = MultisetObject(((2, 1, 3), (5, 2, 1)))
        assert MultisetObject.from_dict(obj.to_dict()) == obj

    def test_size_profile(self):
        p = SizeProfile(((2, 1), (2, 2), (5, 1)))
        assert p.total_size == 11 and p.kappa == 4


class TestRemainder:
    def test_only_size_m(self):
        obj = MultisetObject(((1, 1, 4),))
        assert largest_component(obj) == 1
        assert not remainder(obj, 1)

    def test_largest_removed(self):
        m = 2
        obj = MultisetObject(((m, 1, 3), (7, 2, 1)))
        assert not remainder(obj, m)

    def test_rule(self):
        m = 2
        obj = MultisetObject(((m, 1, 1), (5, 1, 2), (9, 3, 1)))
        R = remainder(obj, m)
        assert R.components == ((5, 1, 2),)
        assert remainder_stats(obj, m).size_gtm == 10 - 2 * m

    def test_canonical_smallest_type(self):
        obj = MultisetObject(((1, 1, 1), (6, 3, 1), (6, 2, 2)))
        assert remainder(obj, 1).components == ((6, 2, 1), (6, 3, 1))

    def test_empty_has_no_largest(self):
        with pytest.raises(ValueError):
            largest_component(MultisetObject(()))

    def test_size_profile_remainder(self):
        R = remainder(SizeProfile(((1, 3), (4, 1), (6, 2))), 1)
        assert R.counts == ((4, 1), (6, 1))


class TestGammaC:
    def test_single_point_law(self):
        seq = finite([0, 0, 3])
        params = boltzmann_params(seq, 0.5)
        rng = RandomStream(1)
        draws = [sample_gamma_C(seq, params, 1, rng) for _ in range(300)]
        assert {k for k, _ in draws} == {3}
        assert {t for _, t in draws} == {1, 2, 3}

    def test_free_trees_size_one(self, free_trees, rho_free, free_params):
        rng = RandomStream(7)
        M = 100_000
        hits = sum(sample_gamma_C(free_trees, free_params, 1, rng)[0] == 1 for _ in range(M))
        p = rho_free / evaluate_C(free_trees, rho_free, rho_free, tol=1e-8).value
        assert within_3sigma(hits, M, p)

    def test_large_j_concentrates_at_m(self, free_trees, rho_free, free_params):
        C_rho = evaluate_C(free_trees, rho_free, rho_free, tol=1e-8).value
        A_prime = C_rho * rho_free ** (-2 * free_trees.m) / free_trees.c_m
        for j in range(5, free_params.j_cutoff + 1):
            p_m = free_params.size_law(j)[free_trees.m - 1]
            assert p_m >= 1 - A_prime * rho_free**j

    def test_j_out_of_range(self, free_trees, free_params):
        with pytest.raises(TruncationRangeError):
            sample_gamma_C(free_trees, free_params, free_params.j_cutoff + 1, 0)

    def test_params_certificate(self, free_params):
        assert free_params.index_tail < free_params.epsilon
        # at z = rho the j = 1 law keeps the truncation tail of the sequence
        # itself (about 7e-6 at K = 2000); it is carried in epsilon_effective
        assert all(t < free_params.epsilon for t in free_params.tail_masses[1:])
        assert free_params.tail_masses[0] < 1e-5
        assert free_params.epsilon_effective >= free_params.lambdas[0] * free_params.tail_masses[0]
        assert free_params.to_dict()["j_cutoff"] == free_params.j_cutoff

    def test_real_class_returns_size(self, synthetic_real):
        params = boltzmann_params(synthetic_real, 0.3)
        assert isinstance(sample_gamma_C(synthetic_real, params, 1, 3), int)


class TestLambdaG:
    def test_empty_probability(self, free_trees, free_params):
        n, _ = lambda_G_size_kappa(free_params, 200_000, RandomStream(2))
        G = math.exp(sum(free_params.lambdas))
        assert within_3sigma(int((n == 0).sum()), n.size, 1 / G)

    def test_mean_kappa(self, free_params):
        _, kappa = lambda_G_size_kappa(free_params, 200_000, RandomStream(3))
        mean = sum(free_params.c_values)
        var = sum(j * c for j, c in enumerate(free_params.c_values, start=1))
        assert abs(kappa.mean() - mean) <= 3 * math.sqrt(var / kappa.size)

    def test_objects_consistent(self, free_trees, free_params):
        for i, obj in enumerate(batch(lambda r: sample_lambda_G(free_trees, free_params, r), 300)):
            obj.check(free_trees)

    def test_vectorized_matches_scalar_law(self, free_trees, free_params):
        M = 20_000
        scalar = Counter()
        for obj in batch(lambda r: sample_lambda_G(free_trees, free_params, r), M, seed=5):
            scalar[min(obj.kappa, 4)] += 1
        _, kappa = lambda_G_size_kappa(free_params, M, RandomStream(6))
        vec = Counter(np.minimum(kappa, 4).tolist())
        table = np.array([[scalar[k] for k in range(5)], [vec[k] for k in range(5)]])
        assert stats.chi2_contingency(table).pvalue > 0.001

    def test_real_class_gives_profiles(self, synthetic_real):
        params = boltzmann_params(synthetic_real, 0.3)
        assert isinstance(sample_lambda_G(synthetic_real, params, 4), SizeProfile)

    def test_deterministic(self, free_trees, free_params):
        a = [sample_lambda_G(free_trees, free_params, RandomStream(9, i)) for i in range(50)]
        b = [sample_lambda_G(free_trees, free_params, RandomStream(9, i)) for i in range(50)]
        assert a == b


class TestUniform:
    def _split_frequencies(self, seq, n, N, M, seed=0):
        table = exact_table(seq, n, N)
        sampler = UniformSampler(table, seq)
        counts = Counter()
        rng = RandomStream(seed)
        for _ in range(M):
            obj = sampler.sample(n, N, rng)
            assert obj.total_size == n and obj.kappa == N
            counts[tuple(sorted((k for k, _, d in obj.components for _ in range(d)), reverse=True))] += 1
        return counts

    def test_partitions_5_2(self):
        M = 100_000
        counts = self._split_frequencies(builtin_class("partitions", 5), 5, 2, M)
        assert set(counts) == {(4, 1), (3, 2)}
        assert within_3sigma(counts[(4, 1)], M, 0.5)

    def test_free_trees_6_2(self):
        M = 100_000
        counts = self._split_frequencies(builtin_class("free_trees", 6), 6, 2, M, seed=1)
        expected = {(5, 1): 1 / 2, (4, 2): 1 / 3, (3, 3): 1 / 6}
        for split, p in expected.items():
            assert within_3sigma(counts[split], M, p)
        obs = [counts[s] for s in expected]
        assert stats.chisquare(obs, [M * p for p in expected.values()]).pvalue > 0.001

    def test_forced_profile(self):
        seq = finite([2, 1, 1])
        table = exact_table(seq, 3, 3)
        rng = RandomStream(4)
        M = 40_000
        seen = Counter(sample_uniform_gnN(table, seq, 3, 3, rng).components for _ in range(M))
        assert len(seen) == math.comb(2 + 3 - 1, 3)
        assert stats.chisquare(list(seen.values())).pvalue > 0.001

    def test_all_members_reachable(self):
        seq = builtin_class("plane_partitions", 7)
        table = exact_table(seq, 7, 3)
        rng = RandomStream(8)
        seen = {UniformSampler(table, seq).sample(7, 3, rng) for _ in range(5000)}
        assert len(seen) == table[7, 3]

    def test_empty_stratum(self):
        seq = finite([0, 1])
        table = exact_table(seq, 5, 2)
        with pytest.raises(EmptyStratumError):
            sample_uniform_gnN(table, seq, 5, 2)

    def test_real_rejected(self, synthetic_real):
        table = exact_table(synthetic_real, 20, 5)
        with pytest.raises(DomainError):
            UniformSampler(table, synthetic_real)

    def test_large_stratum(self, free_trees, free_table_400):
        sampler = UniformSampler(free_table_400, free_trees)
        obj = sampler.sample(400, 120, RandomStream(3))
        obj.check(free_trees)
        assert obj.total_size == 400 and obj.kappa == 120


class TestGgtm:
    def test_empty_mass(self, free_trees, rho_free):
        G_gtm = constant_A(free_trees, rho_free).A * math.gamma(free_trees.c_m)
        _, params = shifted_params(free_trees, rho_free)
        draws = list(batch(lambda r: sample_boltzmann_Ggtm(free_trees, rho_free, r, params), 20_000,
                           seed=3))
        assert all(all(k > free_trees.m for k, _, _ in d.components) for d in draws)
        empty = sum(not d for d in draws)
        assert within_3sigma(empty, len(draws), 1 / G_gtm)

    def test_one_extra_type_geometric(self):
        rho = 0.4
        seq = finite([1, 1])
        _, params = shifted_params(seq, rho)
        M = 50_000
        kap = Counter(sample_boltzmann_Ggtm(seq, rho, RandomStream(11, i), params).kappa
                      for i in range(M))
        for d in range(5):
            assert within_3sigma(kap[d], M, rho**d * (1 - rho))

    def test_supported_only_at_m(self):
        with pytest.raises(DomainError):
            sample_boltzmann_Ggtm(finite([0, 2]), 0.5)
