import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chi2

from crystalzeta import (
    FiniteEulerSpec,
    FiniteWeights,
    LatticeDistribution,
    ShintaniZetaSpec,
    characteristic_function,
    characteristic_function_grid,
    compound_poisson_law,
    falsify_cf,
    finite_support_to_shintani,
    geometric_check,
    riemann_zeta_distribution,
    sample_compound_poisson,
    sample_compound_poisson_batch,
    sample_jump,
    shintani_distribution,
    stream,
)
from crystalzeta import presets
from tests.test_zeta import random_valid_euler


def as_mass_map(dist: LatticeDistribution) -> dict:
    return {tuple(np.round(p, 9)): m for p, m in zip(dist.points, dist.masses)}


class TestShintaniDistribution:
    def test_two_point_line(self):
        spec = finite_support_to_shintani([(1.0,), (-1.0,)], [0.3, 0.7], (2.0,))
        dist = shintani_distribution(spec, (2.0,))
        masses = as_mass_map(dist)
        assert masses[(1.0,)] == pytest.approx(0.3, abs=1e-13)
        assert masses[(-1.0,)] == pytest.approx(0.7, abs=1e-13)
        assert dist.total == pytest.approx(1.0, abs=1e-12)

    def test_poisson_line(self):
        spec, sigma = presets.line_poisson_spec(rate=1.0, sigma=2.0)
        dist = shintani_distribution(spec, sigma)
        masses = as_mass_map(dist)
        for k in range(8):
            expected = math.exp(-1.0) / math.factorial(k)
            assert masses[(float(k),)] == pytest.approx(expected, abs=1e-12)
        assert dist.deficit < 1e-12

    def test_hexagonal_vertex_law(self):
        vecs = presets.hexagonal_step_vectors("x")
        dist = shintani_distribution(
            finite_support_to_shintani(vecs, [0.2, 0.3, 0.5], (1.0, -0.5)), (1.0, -0.5)
        )
        masses = as_mass_map(dist)
        assert masses[tuple(np.round(vecs[0], 9))] == pytest.approx(0.2, abs=1e-12)
        assert masses[tuple(np.round(vecs[1], 9))] == pytest.approx(0.3, abs=1e-12)
        assert masses[tuple(np.round(vecs[2], 9))] == pytest.approx(0.5, abs=1e-12)

    def test_mixed_sign_weights_rejected(self):
        spec = ShintaniZetaSpec(
            dim=1,
            form_matrix=((1.0, 0.0), (0.0, 1.0)),
            shifts=(1.0, 1.0),
            directions=((-1.0,), (1.0,)),
            weights=FiniteWeights.from_dict({(1, 0): 0.5, (0, 1): -0.5}),
        )
        with pytest.raises(ValueError, match="sign"):
            shintani_distribution(spec, (1.0,))

    def test_nonpositive_weights_normalize(self):
        pts = [(1.0,), (-1.0,)]
        spec = finite_support_to_shintani(pts, [0.4, 0.6], (1.0,))
        negated = ShintaniZetaSpec(
            spec.dim,
            spec.form_matrix,
            spec.shifts,
            spec.directions,
            FiniteWeights(tuple((k, -w) for k, w in spec.weights.items())),
        )
        dist = shintani_distribution(negated, (1.0,))
        masses = as_mass_map(dist)
        assert masses[(1.0,)] == pytest.approx(0.4, abs=1e-13)
        assert masses[(-1.0,)] == pytest.approx(0.6, abs=1e-13)

    def test_vanishing_normalizer_rejected(self):
        spec = ShintaniZetaSpec(
            dim=1,
            form_matrix=((1.0,),),
            shifts=(1.0,),
            directions=((1.0,),),
            weights=FiniteWeights(()),
        )
        with pytest.raises(ValueError, match="normalize"):
            shintani_distribution(spec, (2.0,))

    def test_coincident_points_merge(self):
        # two equal support points: masses add up
        spec = finite_support_to_shintani([(1.0,), (1.0,)], [0.25, 0.75], (1.0,))
        dist = shintani_distribution(spec, (1.0,))
        assert len(dist) == 1
        assert dist.masses[0] == pytest.approx(1.0, abs=1e-12)


class TestFiniteSupportRoundTrip:
    def test_square_nn_kernel(self):
        pts = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
        w = [0.1, 0.2, 0.3, 0.4]
        sigma = (0.8, -1.1)
        dist = shintani_distribution(finite_support_to_shintani(pts, w, sigma), sigma)
        masses = as_mass_map(dist)
        for p, x in zip(pts, w):
            assert masses[p] == pytest.approx(x, abs=1e-12)

    def test_delta_law(self):
        dist = shintani_distribution(
            finite_support_to_shintani([(1.0, 0.0)], [1.0], (1.0, 0.0)), (1.0, 0.0)
        )
        assert len(dist) == 1
        assert dist.points[0] == pytest.approx([1.0, 0.0])
        assert dist.masses[0] == pytest.approx(1.0)

    def test_triangular_reach_one(self):
        steps = presets.triangular_range_weights(1)
        assert len(steps) == 7
        pts = [v for v, _ in steps]
        w = [x for _, x in steps]
        dist = shintani_distribution(
            finite_support_to_shintani(pts, w, (1.0, 1.0)), (1.0, 1.0)
        )
        assert len(dist) == 7

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            finite_support_to_shintani([(1.0,)], [-1.0], (1.0,))

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sum"):
            finite_support_to_shintani([(1.0,)], [0.9], (1.0,))

    def test_zero_sigma_rejected(self):
        with pytest.raises(ValueError, match="nonzero"):
            finite_support_to_shintani([(1.0,)], [1.0], (0.0,))

    def test_many_random_round_trips(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            d = int(rng.integers(1, 4))
            m = int(rng.integers(1, 7))
            pts = []
            seen = set()
            while len(pts) < m:
                p = tuple(np.round(rng.uniform(-3, 3, d), 3))
                if p not in seen:
                    seen.add(p)
                    pts.append(p)
            w = rng.uniform(0.05, 1.0, m)
            w = w / w.sum()
            sigma = rng.uniform(-2, 2, d)
            if not np.any(sigma):
                sigma[0] = 1.0
            dist = shintani_distribution(finite_support_to_shintani(pts, w, sigma), sigma)
            masses = as_mass_map(dist)
            for p, x in zip(pts, w):
                assert masses[tuple(np.round(p, 9))] == pytest.approx(x, abs=1e-12)


class TestCharacteristicFunction:
    def test_normalized_at_zero(self):
        spec = finite_support_to_shintani([(1.0,), (-1.0,)], [0.5, 0.5], (2.0,))
        assert characteristic_function(spec, (2.0,), (0.0,)) == pytest.approx(1.0)
        law = presets.euler_product_law("square")
        assert characteristic_function(law, None, (0.0, 0.0)) == pytest.approx(1.0)

    def test_symmetric_two_point_is_cosine(self):
        spec = finite_support_to_shintani([(1.0,), (-1.0,)], [0.5, 0.5], (2.0,))
        for t in np.linspace(-3, 3, 7):
            assert characteristic_function(spec, (2.0,), (t,)) == pytest.approx(
                math.cos(t), abs=1e-12
            )

    def test_poisson_transform(self):
        spec, sigma = presets.line_poisson_spec(rate=1.0, sigma=2.0)
        for t in (0.3, -1.2, 2.5):
            got = characteristic_function(spec, sigma, (t,))
            want = np.exp(np.exp(1j * t) - 1.0)
            assert got == pytest.approx(want, abs=1e-10)

    def test_spec_ratio_matches_distribution_sum(self):
        pts = [(1.0, 0.0), (0.0, 1.0), (-1.0, -1.0)]
        w = [0.5, 0.3, 0.2]
        sigma = (0.6, 0.9)
        spec = finite_support_to_shintani(pts, w, sigma)
        dist = shintani_distribution(spec, sigma)
        rng = np.random.default_rng(2)
        for _ in range(10):
            t = rng.uniform(-4, 4, 2)
            assert characteristic_function(spec, sigma, t) == pytest.approx(
                characteristic_function(dist, None, t), abs=1e-12
            )

    def test_modulus_bounded_for_valid_laws(self):
        law = presets.euler_product_law("square")
        ts = np.random.default_rng(0).uniform(-20, 20, size=(100, 2))
        assert np.all(np.abs(characteristic_function_grid(law, None, ts)) <= 1 + 1e-12)


class TestCompoundPoissonLaw:
    def test_square_total_mass(self):
        law = presets.euler_product_law("square", 2 / 3)
        assert law.total_mass == pytest.approx(2 * math.log(3), abs=1e-12)

    def test_single_factor_mass(self):
        law = compound_poisson_law(FiniteEulerSpec(1, (1.0,), ((1.0,),)), (math.log(2),))
        assert law.total_mass == pytest.approx(math.log(2), abs=1e-14)

    def test_zero_coefficient_gives_flat_transform(self):
        law = compound_poisson_law(FiniteEulerSpec(1, (0.0,), ((1.0,),)), (1.0,))
        assert len(law.levy) == 0
        assert law.total_mass == 0.0
        for t in (0.0, 0.7, -2.0):
            assert characteristic_function(law, None, (t,)) == 1.0

    def test_negative_coefficient_rejected(self):
        with pytest.raises(ValueError, match="not a characteristic function"):
            compound_poisson_law(FiniteEulerSpec(1, (-0.5,), ((1.0,),)), (1.0,))

    def test_ratio_at_least_one_rejected(self):
        with pytest.raises(ValueError, match="ratio"):
            compound_poisson_law(FiniteEulerSpec(1, (1.0,), ((1.0,),)), (-0.1,))

    def test_dependent_directions_warn(self):
        spec = FiniteEulerSpec(2, (0.5, 0.5), ((1.0, 0.0), (2.0, 0.0)))
        with pytest.warns(UserWarning, match="dependent"):
            compound_poisson_law(spec, (1.0, 0.0))

    def test_levy_weights_are_geometric(self):
        law = compound_poisson_law(FiniteEulerSpec(1, (1.0,), ((1.0,),)), (math.log(2),))
        # atoms at -r with weight (1/2)^r / r
        for loc, w in zip(law.levy.locations, law.levy.weights):
            r = -int(loc[0])
            assert w == pytest.approx(0.5**r / r, abs=1e-15)
        assert law.levy.total_mass == pytest.approx(law.total_mass, abs=1e-12)

    @pytest.mark.filterwarnings("ignore:active directions are linearly dependent")
    def test_levy_exponent_matches_product_ratio(self):
        # the exponent identity holds factor by factor, so dependent
        # directions (possible when m > d) do not disturb it
        rng = np.random.default_rng(23)
        for _ in range(20):
            spec, sigma, _ = random_valid_euler(rng)
            law = compound_poisson_law(spec, sigma)
            ts = rng.uniform(-5, 5, size=(25, spec.dim))
            lhs = characteristic_function_grid(law, None, ts)
            rhs = characteristic_function_grid(spec, sigma, ts)
            assert np.max(np.abs(lhs - rhs)) <= 1e-9


class TestSampling:
    def test_tiny_ratio_always_single_jump(self):
        law = compound_poisson_law(FiniteEulerSpec(1, (1e-6,), ((1.0,),)), (0.0,))
        rng = stream(0, 0)
        for _ in range(50):
            assert sample_jump(law, rng) == pytest.approx([-1.0])

    def test_logarithmic_head_probability(self):
        law = compound_poisson_law(FiniteEulerSpec(1, (1.0,), ((1.0,),)), (math.log(2),))
        assert law.jump_pmf()[(1, 0)] == pytest.approx(0.5 / math.log(2), abs=1e-12)

    def test_square_axes_symmetric(self):
        law = presets.euler_product_law("square", 2 / 3)
        pmf = law.jump_pmf()
        axis0 = sum(w for (r, l), w in pmf.items() if l == 0)
        axis1 = sum(w for (r, l), w in pmf.items() if l == 1)
        assert axis0 == pytest.approx(0.5, abs=1e-9)
        assert axis1 == pytest.approx(0.5, abs=1e-9)

    def test_jump_sampler_chi_square(self):
        law = presets.euler_product_law("square", 2 / 3)
        rng = stream(123, 0)
        n = 100_000
        draws = [tuple(sample_jump(law, rng)) for _ in range(n)]
        counts: dict = {}
        for d in draws:
            counts[d] = counts.get(d, 0) + 1
        expected: dict = {}
        for (r, l), p in law.jump_pmf().items():
            loc = (-float(r), 0.0) if l == 0 else (0.0, -float(r))
            expected[loc] = p * n
        stat, bins, other_exp, other_obs = 0.0, 0, 0.0, 0
        for loc, exp in expected.items():
            obs = counts.pop(loc, 0)
            if exp < 5.0:
                other_exp += exp
                other_obs += obs
                continue
            stat += (obs - exp) ** 2 / exp
            bins += 1
        other_obs += sum(counts.values())
        if other_exp > 0:
            stat += (other_obs - other_exp) ** 2 / other_exp
            bins += 1
        p_value = float(chi2.sf(stat, bins - 1))
        assert p_value > 1e-3

    def test_zero_mass_draws_are_zero(self):
        law = compound_poisson_law(FiniteEulerSpec(1, (0.0,), ((1.0,),)), (1.0,))
        rng = stream(5, 0)
        assert sample_compound_poisson(law, rng) == pytest.approx([0.0])
        batch = sample_compound_poisson_batch(law, 100, rng)
        assert np.all(batch == 0.0)

    def test_single_factor_mean(self):
        # mean of the law is the first moment of its jump measure:
        # sum over r >= 1 of (1/2)**r * (-1) = -1
        law = compound_poisson_law(FiniteEulerSpec(1, (1.0,), ((1.0,),)), (math.log(2),))
        n = 1_000_000
        draws = sample_compound_poisson_batch(law, n, stream(7, 0))
        se = draws.std() / math.sqrt(n)
        assert abs(draws.mean() + 1.0) <= 3 * se

    def test_square_mass_at_origin(self):
        law = presets.euler_product_law("square", 2 / 3)
        n = 200_000
        draws = sample_compound_poisson_batch(law, n, stream(11, 0))
        p0 = float(np.mean(np.all(draws == 0.0, axis=1)))
        se = math.sqrt((1 / 9) * (8 / 9) / n)
        assert abs(p0 - 1 / 9) <= 3 * se

    def test_batch_matches_scalar_protocol(self):
        law = presets.euler_product_law("square", 2 / 3)
        a = sample_compound_poisson(law, stream(3, 1))
        b = sample_compound_poisson_batch(law, 1, stream(3, 1))[0]
        assert a == pytest.approx(b)

    def test_streams_are_reproducible_and_distinct(self):
        assert stream(0, 1).random(4) == pytest.approx(stream(0, 1).random(4))
        assert not np.allclose(stream(0, 1).random(4), stream(0, 2).random(4))


class TestFalsify:
    def test_single_negative_coefficient_witness(self):
        spec = FiniteEulerSpec(1, (-0.5,), ((1.0,),))
        result = falsify_cf(spec, (1.0,))
        assert result is not None
        ref = (1 + math.exp(-1) / 2) / (1 - math.exp(-1) / 2)
        assert result.magnitude >= 1.45
        assert result.magnitude == pytest.approx(ref, abs=1e-3)

    def test_nonnegative_coefficients_have_no_witness(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            spec, sigma, _ = random_valid_euler(rng)
            assert falsify_cf(spec, sigma) is None

    def test_mixed_signs_found_in_two_dim(self):
        spec = FiniteEulerSpec(2, (0.5, -0.5), ((1.0, 0.0), (0.0, 1.0)))
        result = falsify_cf(spec, (0.7, 0.7))
        assert result is not None
        assert result.magnitude > 1.0 + 1e-9


class TestGeometricCheck:
    @staticmethod
    def geometric_table(ratios, r_max=200):
        lam = -sum(math.log1p(-A) for A in ratios)
        return {
            (r, l): ratios[l] ** r / (r * lam)
            for l in range(len(ratios))
            for r in range(1, r_max + 1)
        }

    def test_recovers_single_ratio(self):
        beta = self.geometric_table([0.5])
        result = geometric_check(beta, [(1.0,)])
        assert result is not None
        assert result.ratios[0] == pytest.approx(0.5, abs=1e-12)
        # the factorization must reproduce the ratio
        alpha, sigma = result.coeffs[0], np.array(result.sigma)
        assert alpha * math.exp(-float(np.array([1.0]) @ sigma)) == pytest.approx(0.5, rel=1e-12)
        assert 0 < alpha <= 1

    def test_single_entry_is_degenerate(self):
        assert geometric_check({(1, 0): 1.0}, [(1.0,)]) is None

    def test_noise_breaks_the_pattern(self):
        beta = self.geometric_table([0.5])
        noisy = dict(beta)
        noisy[(3, 0)] *= 1.001
        total = sum(noisy.values())
        noisy = {k: v / total for k, v in noisy.items()}
        assert geometric_check(noisy, [(1.0,)]) is None

    def test_rank_deficient_directions_rejected(self):
        beta = self.geometric_table([0.5, 0.25])
        with pytest.raises(ValueError, match="dependent"):
            geometric_check(beta, [(1.0, 0.0), (2.0, 0.0)])

    def test_round_trip_through_law(self):
        law = presets.euler_product_law("square", 2 / 3)
        result = geometric_check(law.jump_pmf(), law.spec.directions)
        assert result is not None
        assert np.max(np.abs(np.array(result.ratios) - 2 / 3)) <= 1e-9
        rebuilt = compound_poisson_law(
            FiniteEulerSpec(2, result.coeffs, law.spec.directions), result.sigma
        )
        pmf_a, pmf_b = law.jump_pmf(), rebuilt.jump_pmf()
        for key in set(pmf_a) | set(pmf_b):
            assert pmf_a.get(key, 0.0) == pytest.approx(pmf_b.get(key, 0.0), abs=1e-12)


class TestRiemannLaw:
    def test_masses_against_direct_summation(self):
        N = 200_000
        ns = np.arange(1, N + 1, dtype=float)
        zeta2 = float(np.sum(ns**-2.0)) + 1.0 / N - 1.0 / (2.0 * N**2)
        dist = riemann_zeta_distribution(2.0, 1000)
        assert dist.masses[0] == pytest.approx(1.0 / zeta2, abs=1e-9)
        assert dist.masses[1] == pytest.approx(0.25 / zeta2, abs=1e-9)
        assert dist.points[1, 0] == pytest.approx(-math.log(2.0))

    def test_masses_nonincreasing(self):
        dist = riemann_zeta_distribution(3.0, 500)
        assert np.all(np.diff(dist.masses) <= 0)

    def test_deficit_matches_tail(self):
        dist = riemann_zeta_distribution(2.0, 100)
        tail = sum(1.0 / n**2 for n in range(101, 200_000))
        zeta2 = math.pi**2 / 6
        assert dist.deficit == pytest.approx(tail / zeta2, abs=1e-5)

    def test_region_enforced(self):
        with pytest.raises(ValueError, match="exceed 1"):
            riemann_zeta_distribution(1.0, 10)


class TestLatticeDistributionInvariants:
    def test_duplicate_points_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            LatticeDistribution(np.array([[1.0], [1.0]]), np.array([0.5, 0.5]))

    def test_mass_exceeding_one_rejected(self):
        with pytest.raises(ValueError, match="exceeds 1"):
            LatticeDistribution(np.array([[0.0], [1.0]]), np.array([0.7, 0.7]))

    def test_negative_mass_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            LatticeDistribution(np.array([[0.0]]), np.array([-0.1]))

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=9999))
    def test_sampling_stays_on_support(self, seed):
        rng = np.random.default_rng(seed)
        pts = np.array([[0.0], [1.5], [-2.0]])
        dist = LatticeDistribution(pts, np.array([0.2, 0.5, 0.3]))
        draws = dist.sample(rng, 64)
        assert set(np.asarray(draws).ravel()) <= {0.0, 1.5, -2.0}
