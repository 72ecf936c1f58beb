"""Closed-form oracle tests: formulas, series, sieves, and tail bounds."""

import math
from fractions import Fraction

import numpy as np
import pytest

from adelic_walks.oracles import (
    SeriesTolerance,
    SigmaSpec,
    adelic_sup_lower_bound,
    adelic_survival_bound,
    diffusion_constant,
    limit_ball_prob,
    limit_radial_moment,
    prime_count_oracle,
    prime_tail_sum,
    primes_up_to,
    scaled_step_count,
    sup_survival_limit,
    sup_survival_prob,
    walk_sup_ball_prob,
)


class TestDiffusionConstant:
    def test_reference_values(self):
        assert diffusion_constant(2, 1.0, 1.0) == pytest.approx(2 / 3, rel=1e-15)
        assert diffusion_constant(3, 2.0, 1.0) == pytest.approx(9 / 13, rel=1e-15)
        assert diffusion_constant(5, 0.5, 0.0) == 0.0

    def test_prime_factor_below_one(self):
        for p in primes_up_to(100):
            for b in (0.25, 0.5, 1.0, 2.0, 3.0):
                assert 0 < diffusion_constant(int(p), b, 1.0) < 1


class TestStepCount:
    def test_reference_counts(self):
        assert scaled_step_count(2, 1.0, 1.0, 3, 1.0) == 5
        assert scaled_step_count(2, 1.0, 1.0, 1, 1.0) == 1
        assert scaled_step_count(2, 1.0, 1.0, 2, 1.0) == 2

    def test_zero_time_or_sigma(self):
        assert scaled_step_count(2, 1.0, 1.0, 3, 0.0) == 0
        assert scaled_step_count(2, 1.0, 0.0, 3, 10.0) == 0

    def test_float_near_integer_is_decided_exactly(self):
        # D(2, 1, 1.75) * 6 evaluates to 6.999999999999999 in floats while
        # the exact product is 7; the floor must be re-decided exactly
        assert diffusion_constant(2, 1.0, 1.75) * 6.0 < 7.0
        assert scaled_step_count(2, 1.0, 1.75, 0, 6.0) == 7
        assert scaled_step_count(2, 1.0, 2.5, 0, 9.0) == 15

    def test_monotone_in_time(self):
        grid = np.linspace(0.0, 3.0, 200)
        counts = [scaled_step_count(3, 1.0, 0.7, 2, float(t)) for t in grid]
        assert all(a <= b for a, b in zip(counts, counts[1:]))

    def test_right_continuous_in_time(self):
        # approaching any T from above does not change the count
        for T in (0.0, 0.25, 1.0, 3.0 / 7.0, 1.5):
            n = scaled_step_count(2, 1.0, 1.0, 3, T)
            assert scaled_step_count(2, 1.0, 1.0, 3, T + 1e-13) == n


class TestSupBallProb:
    def test_no_steps(self):
        assert walk_sup_ball_prob(2, 1.0, 3, 0) == 1.0

    def test_reference_value(self):
        assert walk_sup_ball_prob(2, 1.0, 3, 4) == pytest.approx(2401 / 4096, rel=1e-15)

    def test_large_radius_captures_everything(self):
        assert walk_sup_ball_prob(2, 1.0, 500, 10) == 1.0

    def test_radius_below_one_rejected(self):
        with pytest.raises(ValueError):
            walk_sup_ball_prob(2, 1.0, 0, 5)


class TestSupSurvival:
    def test_zero_horizon(self):
        assert sup_survival_prob(2, 1.0, 1.0, 3, 0.0, 1) == 1.0

    def test_unit_threshold_closed_form(self):
        for p, b, m in [(2, 1.0, 1), (2, 1.0, 3), (3, 2.0, 2)]:
            n = scaled_step_count(p, b, 1.0, m, 1.0)
            want = (1.0 - float(p) ** (-m * b)) ** n
            assert sup_survival_prob(p, b, 1.0, m, 1.0, 1) == pytest.approx(want, rel=1e-15)

    def test_reference_half(self):
        assert sup_survival_prob(2, 1.0, 1.0, 1, 1.0, 1) == 0.5

    def test_hypothesis_violation_names_inequality(self):
        with pytest.raises(ValueError, match="1 <= m \\+ ceil"):
            sup_survival_prob(2, 1.0, 1.0, 0, 1.0, 1)

    def test_limit_zero_sigma(self):
        assert sup_survival_limit(2, 1.0, 0.0, 1.0, 1) == 1.0

    def test_limit_reference(self):
        assert sup_survival_limit(2, 1.0, 1.0, 1.0, 1) == pytest.approx(math.exp(-2 / 3), rel=1e-15)

    def test_limit_is_attained(self):
        assert abs(sup_survival_prob(2, 1.0, 1.0, 14, 1.0, 1) - math.exp(-2 / 3)) <= 1e-3

    def test_nonincreasing_in_time(self):
        grid = np.linspace(0.0, 4.0, 120)
        vals = [sup_survival_prob(2, 1.0, 1.0, 3, float(t), 1) for t in grid]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_convergence_rate_envelope(self):
        for p, b, sigma, lam in [(2, 1.0, 1.0, 1), (3, 1.0, 0.5, 2), (2, 2.0, 0.75, 1)]:
            limit = sup_survival_limit(p, b, sigma, 1.0, lam)
            for m in range(2, 13):
                gap = abs(sup_survival_prob(p, b, sigma, m, 1.0, lam) - limit)
                assert gap <= 3.0 * float(p) ** (-m * b)


class TestLimitBallProb:
    def test_t_zero_telescopes_to_one(self):
        for p in (2, 3, 5):
            for k in (-3, 0, 4):
                assert limit_ball_prob(p, 1.0, 1.0, 0.0, k) == pytest.approx(1.0, abs=1e-8)

    def test_small_time_concentrates(self):
        assert limit_ball_prob(2, 1.0, 1.0, 1e-9, 0) >= 1 - 1e-6

    def test_monotone_in_radius(self):
        for t in (1e-9, 0.25, 1.0, 4.0):
            vals = [limit_ball_prob(2, 1.0, 1.0, t, k) for k in range(-10, 11)]
            assert all(0.0 <= v <= 1.0 + 1e-12 for v in vals)
            assert all(b - a >= -1e-12 for a, b in zip(vals, vals[1:]))

    def test_tolerance_validation(self):
        with pytest.raises(ValueError):
            SeriesTolerance(0.0)
        with pytest.raises(ValueError):
            SeriesTolerance(1e-3)


class TestLimitRadialMoment:
    def test_exact_time_scaling(self):
        # E|Y_{p**b t}|**r = p**r E|Y_t|**r
        for p, b, r in [(2, 2.0, 1.0), (3, 1.0, 0.5)]:
            m1 = limit_radial_moment(p, b, 1.0, 0.3, r)
            m2 = limit_radial_moment(p, b, 1.0, 0.3 * float(p) ** b, r)
            assert m2 == pytest.approx(float(p) ** r * m1, rel=1e-7)

    def test_requires_r_below_b(self):
        with pytest.raises(ValueError):
            limit_radial_moment(2, 1.0, 1.0, 1.0, 1.0)

    def test_zero_cases(self):
        assert limit_radial_moment(2, 2.0, 0.0, 1.0, 1.0) == 0.0
        assert limit_radial_moment(2, 2.0, 1.0, 0.0, 1.0) == 0.0


class TestPrimes:
    def test_small(self):
        assert list(primes_up_to(10)) == [2, 3, 5, 7]
        assert list(primes_up_to(2)) == [2]

    def test_count_to_a_million(self):
        assert len(primes_up_to(10**6)) == 78498

    def test_against_trial_division_oracle(self):
        assert len(primes_up_to(10_000)) == prime_count_oracle(10_000)

    def test_below_two_rejected(self):
        with pytest.raises(ValueError):
            primes_up_to(1)


class TestPrimeTailSum:
    def test_finite_support_beyond(self):
        sigma = SigmaSpec.from_mapping({2: 1.0, 3: 0.5})
        assert prime_tail_sum(sigma, 1.0, 5) == (0.0, 0.0)

    def test_power_tail_against_direct_sum(self):
        sigma = SigmaSpec.from_mapping({}, tail=(1.0, 2.0))
        value, remainder = prime_tail_sum(sigma, 1.0, 2)
        direct = sum(
            float(p) ** 1 * (p - 1) / (float(p) ** 2 - 1) * float(p) ** -2
            for p in primes_up_to(10**6)
        )
        assert value == pytest.approx(direct, rel=1e-12)
        assert 0 < remainder <= 1e-6

    def test_monotone_in_cutoff(self):
        sigma = SigmaSpec.from_mapping({2: 0.3}, tail=(1.0, 1.5))
        vals = [prime_tail_sum(sigma, 1.0, M)[0] for M in (2, 3, 5, 11, 101)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_unsummable_tail_rejected(self):
        with pytest.raises(ValueError):
            SigmaSpec.from_mapping({}, tail=(1.0, 1.0))


class TestAdelicBounds:
    def test_empty_tail_gives_one(self):
        sigma = SigmaSpec.from_mapping({2: 1.0})
        assert adelic_survival_bound(sigma, 1.0, 3, 1.0, 2.0) == 1.0

    def test_increases_to_one_in_cutoff(self):
        sigma = SigmaSpec.from_mapping({}, tail=(1.0, 2.0))
        vals = [adelic_survival_bound(sigma, 1.0, M, 1.0, 2.0) for M in (2, 11, 101, 10_001)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert vals[-1] > 0.999

    def test_reference_value_m11(self):
        sigma = SigmaSpec.from_mapping({}, tail=(1.0, 2.0))
        value, remainder = prime_tail_sum(sigma, 1.0, 11)
        want = math.exp(-2.0 * (value + remainder))
        assert adelic_survival_bound(sigma, 1.0, 11, 1.0, 2.0) == pytest.approx(want, rel=1e-15)

    def test_c_must_exceed_one(self):
        with pytest.raises(ValueError):
            adelic_survival_bound(SigmaSpec.from_mapping({2: 1.0}), 1.0, 2, 1.0, 1.0)

    def test_nonincreasing_in_c(self):
        sigma = SigmaSpec.from_mapping({}, tail=(1.0, 2.0))
        vals = [adelic_survival_bound(sigma, 1.0, 5, 1.0, c) for c in (1.5, 2.0, 4.0, 16.0)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_sup_bound_limits(self):
        sigma = SigmaSpec.from_mapping({2: 1.0, 3: 0.5})
        assert adelic_sup_lower_bound(sigma, 1.0, 1.0, 1e12) == pytest.approx(1.0, abs=1e-9)
        assert adelic_sup_lower_bound(SigmaSpec.from_mapping({2: 0.0}), 1.0, 1.0, 1.0) == 1.0

    def test_sup_bound_below_termwise_product(self):
        # exp(-lam**-b sum coeff sigma) <= prod_p exp(-(p*bracket)**-b D_p T),
        # with equality at lam = 1
        sigma = SigmaSpec.from_mapping({2: 1.0, 3: 0.5, 5: 0.25})
        from adelic_walks.padic import ceil_log

        for lam, expect_equal in [(1.0, True), (3.0, False), (2.5, False)]:
            bound = adelic_sup_lower_bound(sigma, 1.0, 1.0, lam)
            product = 1.0
            for p, s in sigma.explicit:
                e = ceil_log(Fraction(lam), p) - 1
                product *= math.exp(-float(p) ** (-(e + 1)) * diffusion_constant(p, 1.0, s))
            assert bound <= product + 1e-12
            if expect_equal:
                assert bound == pytest.approx(product, rel=1e-12)


class TestSigmaSpec:
    def test_value_lookup(self):
        sigma = SigmaSpec.from_mapping({2: 1.0, 7: 0.25}, tail=(2.0, 3.0))
        assert sigma.value(2) == 1.0
        assert sigma.value(7) == 0.25
        assert sigma.value(5) == pytest.approx(2.0 * 5.0**-3)

    def test_support_ceiling(self):
        assert SigmaSpec.from_mapping({2: 1.0, 11: 0.5}).support_ceiling() == 12
        assert SigmaSpec.from_mapping({2: 0.0}).support_ceiling() == 2
        assert SigmaSpec.from_mapping({}, tail=(1.0, 2.0)).support_ceiling() is None

    def test_active_primes(self):
        sigma = SigmaSpec.from_mapping({2: 1.0, 3: 0.0}, tail=(1.0, 2.0))
        assert sigma.active_primes_below(12) == [2, 5, 7, 11]

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            SigmaSpec.from_mapping({2: -0.5})
