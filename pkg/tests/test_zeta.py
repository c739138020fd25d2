import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crystalzeta import (
    ConvergenceError,
    FiniteEulerSpec,
    FiniteWeights,
    PoissonWeights,
    PoleError,
    PolynomialEulerSpec,
    ShintaniZetaSpec,
    TruncationPolicy,
    finite_euler_eval,
    finite_euler_series,
    finite_support_to_shintani,
    p_reduction,
    polynomial_euler_eval,
    primes_up_to,
    shintani_eval,
)
from crystalzeta import presets


def square_euler():
    return presets.euler_product_spec("square", 2 / 3)


def random_valid_euler(rng, max_m=4, max_d=3, ratio_cap=0.9, ratio_floor=0.05):
    """Spec plus sigma with prescribed per-factor geometric ratios."""
    d = int(rng.integers(1, max_d + 1))
    m = int(rng.integers(1, max_m + 1))
    sigma = rng.uniform(-0.5, 0.5, d)
    ratios = rng.uniform(ratio_floor, ratio_cap, m)
    directions = []
    coeffs = []
    for l in range(m):
        while True:
            a = rng.integers(-2, 3, size=d).astype(float)
            coeff = ratios[l] * math.exp(float(a @ sigma))
            if np.any(a != 0) and 0 < coeff <= 1:
                directions.append(tuple(a))
                coeffs.append(coeff)
                break
    spec = FiniteEulerSpec(d, tuple(coeffs), tuple(directions))
    return spec, sigma, ratios


class TestSpecValidation:
    def test_row_needs_positive_entry(self):
        with pytest.raises(ValueError, match="positive entry"):
            ShintaniZetaSpec(
                dim=1,
                form_matrix=((0.0, 0.0),),
                shifts=(1.0, 1.0),
                directions=((1.0,),),
                weights=FiniteWeights.from_dict({(0, 0): 1.0}),
            )

    def test_shifts_positive(self):
        with pytest.raises(ValueError, match="shifts"):
            ShintaniZetaSpec(
                dim=1,
                form_matrix=((1.0,),),
                shifts=(0.0,),
                directions=((1.0,),),
                weights=FiniteWeights.from_dict({(0,): 1.0}),
            )

    def test_euler_coeff_bound(self):
        with pytest.raises(ValueError, match=r"\[-1, 1\]"):
            FiniteEulerSpec(1, (1.5,), ((1.0,),))

    def test_negative_multi_index_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            FiniteWeights.from_dict({(-1,): 1.0})


class TestShintaniEval:
    def test_two_point_line_normalizer(self):
        spec = finite_support_to_shintani([(1.0,), (-1.0,)], [0.5, 0.5], (2.0,))
        value, tail = shintani_eval(spec, np.array([2.0 + 0j]))
        assert tail == 0.0
        assert value == pytest.approx(1.0, abs=1e-14)

    def test_poisson_line_value(self):
        spec, _ = presets.line_poisson_spec(rate=1.0, sigma=2.0)
        value, tail = shintani_eval(spec, np.array([2.0 + 0j]))
        assert value == pytest.approx(math.e, abs=1e-12)
        assert 0 <= tail < 1e-12

    def test_empty_table_sums_to_zero(self):
        spec = ShintaniZetaSpec(
            dim=1,
            form_matrix=((1.0,),),
            shifts=(1.0,),
            directions=((1.0,),),
            weights=FiniteWeights(()),
        )
        value, tail = shintani_eval(spec, np.array([3.0 + 0j]))
        assert value == 0 and tail == 0.0

    def test_finite_table_ignores_truncation_policy(self):
        spec = finite_support_to_shintani([(1.0,), (-2.0,)], [0.25, 0.75], (1.5,))
        s = np.array([0.4 + 1.3j])
        a, _ = shintani_eval(spec, s, TruncationPolicy(1))
        b, _ = shintani_eval(spec, s, TruncationPolicy(500))
        assert a == b

    def test_fully_coupled_ladder_needs_region(self):
        spec = ShintaniZetaSpec(
            dim=1,
            form_matrix=((1.0,),),
            shifts=(1.0,),
            directions=((1.0,),),
            weights=PoissonWeights(rate=1.0, base=2, sigma=(2.0,)),
        )
        # r/m = 1: argument 0.5 is outside, 3.0 inside
        with pytest.raises(ConvergenceError, match=r"c\[0\]"):
            shintani_eval(spec, np.array([0.5 + 0j]))
        value, tail = shintani_eval(spec, np.array([3.0 + 0j]))
        assert np.isfinite(value) and tail < 1e-6

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_conjugate_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        pts = [tuple(rng.uniform(-2, 2, 2)) for _ in range(3)]
        w = rng.uniform(0.1, 1.0, 3)
        spec = finite_support_to_shintani(pts, w / w.sum(), (0.7, -0.4))
        s = rng.uniform(0.2, 2.0, 2) + 1j * rng.uniform(-3, 3, 2)
        za, _ = shintani_eval(spec, s)
        zb, _ = shintani_eval(spec, np.conj(s))
        assert zb == pytest.approx(np.conj(za), rel=1e-12, abs=1e-12)


class TestFiniteEuler:
    def test_square_value_at_sigma(self):
        spec, sigma = square_euler()
        assert finite_euler_eval(spec, sigma.astype(complex)) == pytest.approx(9.0, abs=1e-12)

    def test_empty_product(self):
        assert finite_euler_eval(FiniteEulerSpec(1, (), ()), np.array([2.0 + 0j])) == 1.0

    def test_zero_coefficient(self):
        spec = FiniteEulerSpec(1, (0.0,), ((1.0,),))
        for s in [0.3, -1.0, 2.5]:
            assert finite_euler_eval(spec, np.array([s + 0j])) == 1.0

    def test_pole_detected(self):
        spec = FiniteEulerSpec(1, (1.0,), ((1.0,),))
        with pytest.raises(PoleError):
            finite_euler_eval(spec, np.array([0.0 + 0j]))

    def test_no_zeros_in_positive_region(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            spec, sigma, _ = random_valid_euler(rng)
            t = rng.uniform(-6, 6, spec.dim)
            value = finite_euler_eval(spec, sigma + 1j * t)
            assert abs(value) > 0

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=10_000))
    def test_conjugate_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        spec, sigma, _ = random_valid_euler(rng)
        s = sigma + 1j * rng.uniform(-4, 4, spec.dim)
        assert finite_euler_eval(spec, np.conj(s)) == pytest.approx(
            np.conj(finite_euler_eval(spec, s)), rel=1e-12
        )


class TestFiniteEulerSeries:
    def test_matches_closed_form(self):
        spec = FiniteEulerSpec(1, (0.5,), ((1.0,),))
        value, tail = finite_euler_series(spec, np.array([1.0 + 0j]), 40)
        ref = 1.0 / (1.0 - 0.5 * math.exp(-1.0))
        assert value == pytest.approx(ref, abs=1e-12)
        assert tail < 1e-12

    def test_cutoff_zero_keeps_constant_term(self):
        spec, sigma = square_euler()
        value, _ = finite_euler_series(spec, sigma.astype(complex), 0)
        assert value == 1.0

    def test_square_truncation_error_tracks_tail_bound(self):
        # the remaining geometric tail at cutoff 60 is about 3.3e-10 and the
        # reported bound must cover it; cutoff 80 pushes it below 1e-12
        spec, sigma = square_euler()
        v60, t60 = finite_euler_series(spec, sigma.astype(complex), 60)
        assert abs(v60 - 9.0) <= t60 + 1e-12
        assert 1e-11 < abs(v60 - 9.0) < 1e-9
        v80, t80 = finite_euler_series(spec, sigma.astype(complex), 80)
        assert abs(v80 - 9.0) <= 1e-12
        assert t80 <= t60

    def test_divergent_ratio_rejected(self):
        spec = FiniteEulerSpec(1, (1.0,), ((1.0,),))
        with pytest.raises(ConvergenceError, match="ratio"):
            finite_euler_series(spec, np.array([-0.5 + 0j]), 10)

    def test_product_series_identity_random(self):
        # ratios capped at 0.7: the cutoff-80 geometric tail then sits below
        # the 1e-10 agreement target (at 0.9 the tail alone is ~1e-4)
        rng = np.random.default_rng(42)
        for _ in range(50):
            spec, sigma, _ = random_valid_euler(rng, ratio_cap=0.7)
            s = sigma + 1j * rng.uniform(-5, 5, spec.dim)
            series, _ = finite_euler_series(spec, s, 80)
            product = finite_euler_eval(spec, s)
            assert abs(series - product) <= 1e-10

    def test_large_ratio_error_stays_within_reported_bound(self):
        rng = np.random.default_rng(43)
        for _ in range(20):
            spec, sigma, _ = random_valid_euler(rng, ratio_floor=0.8, ratio_cap=0.9)
            s = sigma + 1j * rng.uniform(-5, 5, spec.dim)
            series, tail = finite_euler_series(spec, s, 80)
            product = finite_euler_eval(spec, s)
            assert abs(series - product) <= tail * (1 + 1e-9) + 1e-12

    def test_tail_bound_monotone_in_cutoff(self):
        spec, sigma = square_euler()
        s = sigma + 1j * np.array([0.3, -0.8])
        tails = [finite_euler_series(spec, s, K)[1] for K in (5, 10, 20, 40, 80)]
        assert all(a >= b for a, b in zip(tails, tails[1:]))


class TestPolynomialEuler:
    def test_all_zero_coefficients(self):
        spec = PolynomialEulerSpec.from_dict(1, [(1.0,)], {}, prime_cutoff=100)
        value, tail = polynomial_euler_eval(spec, np.array([2.0 + 0j]))
        assert value == 1.0

    def test_region_enforced(self):
        spec = PolynomialEulerSpec.from_dict(1, [(1.0,)], {(0, 2): 1.0}, prime_cutoff=100)
        with pytest.raises(ConvergenceError, match="exceed 1"):
            polynomial_euler_eval(spec, np.array([0.9 + 0j]))

    def test_zeta_two_against_direct_sum(self):
        # independent reference: direct Dirichlet summation with an
        # Euler-Maclaurin tail for sum over n > N of n**-2
        N = 1_000_000
        ns = np.arange(1, N + 1, dtype=float)
        ref = float(np.sum(ns**-2.0)) + 1.0 / N - 1.0 / (2.0 * N**2) + 1.0 / (6.0 * N**3)
        cutoff = 100_000
        table = {(0, int(p)): 1.0 for p in primes_up_to(cutoff)}
        spec = PolynomialEulerSpec.from_dict(1, [(1.0,)], table, prime_cutoff=cutoff)
        value, tail = polynomial_euler_eval(spec, np.array([2.0 + 0j]))
        assert abs(value - ref) <= tail
        assert tail < 1e-4

    def test_tail_bound_monotone_in_cutoff(self):
        tails = []
        for cutoff in (100, 1_000, 10_000):
            table = {(0, int(p)): 1.0 for p in primes_up_to(cutoff)}
            spec = PolynomialEulerSpec.from_dict(1, [(1.0,)], table, prime_cutoff=cutoff)
            tails.append(polynomial_euler_eval(spec, np.array([2.0 + 0j]))[1])
        assert tails[0] > tails[1] > tails[2]

    def test_conjugate_symmetry(self):
        table = {(0, int(p)): 0.7 for p in primes_up_to(500)}
        spec = PolynomialEulerSpec.from_dict(1, [(1.0,)], table, prime_cutoff=500)
        s = np.array([1.7 + 0.9j])
        va, _ = polynomial_euler_eval(spec, s)
        vb, _ = polynomial_euler_eval(spec, np.conj(s))
        assert vb == pytest.approx(np.conj(va), rel=1e-12)


class TestPReduction:
    def test_single_factor_layout(self):
        spec = FiniteEulerSpec(1, (0.5,), ((1.0,),))
        reduced = p_reduction(spec, [2])
        assert reduced.directions[0][0] == pytest.approx(1.0 / math.log(2))
        assert dict(reduced.coeff_of_prime) == {(0, 2): 0.5}

    def test_empty_spec(self):
        reduced = p_reduction(FiniteEulerSpec(1, (), ()), [])
        value, _ = polynomial_euler_eval(reduced, np.array([2.0 + 0j]))
        assert value == 1.0

    def test_square_agreement_on_random_arguments(self):
        spec, _ = square_euler()
        reduced = p_reduction(spec, [2, 3])
        rng = np.random.default_rng(9)
        for _ in range(20):
            # common region: Re<a_l, s> > log(p_l) per factor
            s = np.array([math.log(2), math.log(3)]) + rng.uniform(0.2, 2.0, 2)
            s = s + 1j * rng.uniform(-3, 3, 2)
            fv = finite_euler_eval(spec, s)
            pv, _ = polynomial_euler_eval(reduced, s)
            assert pv == pytest.approx(fv, rel=1e-12)

    def test_repeated_primes_rejected(self):
        spec, _ = square_euler()
        with pytest.raises(ValueError, match="distinct"):
            p_reduction(spec, [2, 2])

    def test_non_prime_rejected(self):
        spec = FiniteEulerSpec(1, (0.5,), ((1.0,),))
        with pytest.raises(ValueError, match="not prime"):
            p_reduction(spec, [4])


class TestPrimes:
    def test_against_trial_division(self):
        def is_prime(n):
            return n > 1 and all(n % k for k in range(2, int(n**0.5) + 1))

        sieved = list(primes_up_to(200))
        assert sieved == [n for n in range(201) if is_prime(n)]

    def test_empty_below_two(self):
        assert len(primes_up_to(1)) == 0
