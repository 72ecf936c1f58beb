"""Walk engine tests: paths, scaling, cutoffs, and the array engines."""

import math

import numpy as np
import pytest

from adelic_walks.oracles import SigmaSpec, primes_up_to, walk_sup_ball_prob
from adelic_walks.padic import RadialValue, qp_abs, qp_shift
from adelic_walks.sampling import RngStream
from adelic_walks.walks import (
    ZERO_EXP,
    WalkParams,
    choose_prime_cutoff,
    path_value,
    simulate_adelic,
    simulate_single,
    sup_scaled_norm,
    walk_final_exponents,
    walk_sup_exponents,
)
from adelic_walks.experiments.stats import clopper_pearson, independence_pvalue


class TestWalkParams:
    def test_derived_quantities(self):
        params = WalkParams(2, 1.0, 1.0, 3)
        assert params.diffusion() == pytest.approx(2 / 3, rel=1e-15)
        assert params.step_rate() == pytest.approx(16 / 3, rel=1e-15)
        assert params.step_count(1.0) == 5

    def test_validation(self):
        with pytest.raises(ValueError):
            WalkParams(6, 1.0, 1.0, 0)
        with pytest.raises(ValueError):
            WalkParams(2, -1.0, 1.0, 0)
        with pytest.raises(ValueError):
            WalkParams(2, 1.0, -1.0, 0)
        with pytest.raises(ValueError):
            WalkParams(2, 1.0, 1.0, -1)


class TestSimulateSingle:
    def test_zero_horizon(self):
        path = simulate_single(WalkParams(2, 1.0, 1.0, 3), 0.0, RngStream(0))
        assert path.jumps == ()
        assert path_value(path, 0.0).is_zero

    def test_zero_sigma_constant_path(self):
        path = simulate_single(WalkParams(3, 1.0, 0.0, 4), 5.0, RngStream(0))
        assert path.jumps == ()
        assert path_value(path, 3.3).is_zero

    def test_jump_count_matches_step_count(self):
        params = WalkParams(2, 1.0, 1.0, 3)
        path = simulate_single(params, 1.0, RngStream(1))
        assert len(path.jumps) == 5
        assert [j for j, _ in path.jumps] == [1, 2, 3, 4, 5]

    def test_cumulative_sums_live_in_lattice(self):
        path = simulate_single(WalkParams(3, 0.5, 1.0, 2), 2.0, RngStream(5))
        for _, s in path.jumps:
            if not s.is_zero:
                assert s.max_index() < 0

    def test_reproducible(self):
        params = WalkParams(2, 1.0, 1.0, 4)
        a = simulate_single(params, 1.0, RngStream(9))
        b = simulate_single(params, 1.0, RngStream(9))
        assert a.jumps == b.jumps


class TestPathValue:
    def _path(self):
        return simulate_single(WalkParams(2, 1.0, 1.0, 3), 1.0, RngStream(12))

    def test_before_first_jump(self):
        assert path_value(self._path(), 1e-6).is_zero

    def test_right_continuity_at_jump_times(self):
        path = self._path()
        for j, s in path.jumps:
            t = path.jump_time(j)
            if t <= path.horizon:
                assert path_value(path, t) == qp_shift(s, path.params.m)

    def test_between_jumps_holds_previous(self):
        path = self._path()
        rate = path.params.step_rate()
        for j, s in path.jumps[:-1]:
            t = (j + 0.5) / rate
            assert path_value(path, t) == qp_shift(s, path.params.m)

    def test_outside_horizon_rejected(self):
        path = self._path()
        with pytest.raises(ValueError):
            path_value(path, -0.1)
        with pytest.raises(ValueError):
            path_value(path, 1.1)


class TestSupScaledNorm:
    def test_zero_path(self):
        path = simulate_single(WalkParams(2, 1.0, 0.0, 1), 1.0, RngStream(0))
        assert sup_scaled_norm(path, 1.0).is_zero

    def test_single_jump_shift_arithmetic(self):
        params = WalkParams(2, 1.0, 1.0, 1)
        path = simulate_single(params, 1.0, RngStream(3))
        assert len(path.jumps) == 1
        s1 = path.jumps[0][1]
        assert sup_scaled_norm(path, 1.0) == qp_abs(s1).scaled(-1)

    def test_matches_fine_grid_scan(self):
        for seed in range(100):
            params = WalkParams(3, 1.0, 0.8, 2)
            path = simulate_single(params, 1.0, RngStream(seed))
            best = RadialValue.zero(3)
            for t in np.linspace(0.0, 1.0, 797):
                v = qp_abs(path_value(path, float(t)))
                if best < v:
                    best = v
            assert sup_scaled_norm(path, 1.0) == best


class TestChoosePrimeCutoff:
    def test_finite_support(self):
        sigma = SigmaSpec.from_mapping({2: 1.0, 3: 0.5})
        assert choose_prime_cutoff(sigma, 1.0, 3, 1.0, 1e-3) == (4, 0.0)

    def test_near_one_eps_allows_everything(self):
        sigma = SigmaSpec.from_mapping({2: 1.0, 3: 0.5})
        cutoff, bound = choose_prime_cutoff(sigma, 1.0, 3, 1.0, 0.999)
        assert cutoff == 2
        assert bound <= 0.999

    def test_tail_cutoff_matches_direct_search(self):
        sigma = SigmaSpec.from_mapping({}, tail=(1.0, 2.0))
        eps = 1e-3
        cutoff, bound = choose_prime_cutoff(sigma, 1.0, 3, 1.0, eps)
        assert bound <= eps
        # direct check: the previous candidate (one prime earlier) must fail
        from adelic_walks.oracles import prime_tail_sum

        below = [int(q) for q in primes_up_to(cutoff) if q < cutoff]
        prev = below[-1]
        v, r = prime_tail_sum(sigma, 1.0, prev)
        assert -math.expm1(-2.0 * (v + r)) > eps

    def test_unusable_exponential_bound_fails_loudly(self):
        sigma = SigmaSpec.from_mapping({}, tail=(1.0, 2.0))
        with pytest.raises(ValueError, match="exp"):
            choose_prime_cutoff(sigma, 1.0, 0, 1.0, 1e-3)

    def test_eps_range_validated(self):
        sigma = SigmaSpec.from_mapping({2: 1.0})
        with pytest.raises(ValueError):
            choose_prime_cutoff(sigma, 1.0, 3, 1.0, 0.0)
        with pytest.raises(ValueError):
            choose_prime_cutoff(sigma, 1.0, 3, 1.0, 1.0)


class TestSimulateAdelic:
    def test_two_active_components(self):
        sigma = SigmaSpec.from_mapping({2: 1.0, 3: 0.5})
        path = simulate_adelic(sigma, 1.0, 3, 1.0, 1e-3, RngStream(4))
        assert path.primes == (2, 3)
        assert path.cutoff == 4
        assert path.truncation_bound == 0.0

    def test_zero_sigma_component_omitted(self):
        sigma = SigmaSpec.from_mapping({2: 1.0, 3: 0.0, 5: 0.5})
        path = simulate_adelic(sigma, 1.0, 2, 1.0, 1e-3, RngStream(4))
        assert path.primes == (2, 5)

    def test_degenerate_scale_zero_runs(self):
        sigma = SigmaSpec.from_mapping({2: 1.0})
        path = simulate_adelic(sigma, 1.0, 0, 1.0, 1e-3, RngStream(4))
        assert path.primes == (2,)

    def test_components_reproducible_per_prime(self):
        sigma = SigmaSpec.from_mapping({2: 1.0, 3: 0.5})
        a = simulate_adelic(sigma, 1.0, 3, 1.0, 1e-3, RngStream(11))
        b = simulate_adelic(sigma, 1.0, 3, 1.0, 1e-3, RngStream(11))
        assert a.component(2).jumps == b.component(2).jumps
        assert a.component(3).jumps == b.component(3).jumps

    def test_component_independence_chi_square(self):
        sigma = SigmaSpec.from_mapping({2: 1.0, 3: 0.5})
        m, n = 2, 20_000
        base = RngStream(0)
        sup2 = walk_sup_exponents(WalkParams(2, 1.0, 1.0, m), 1.0, base.substream(2), n)
        sup3 = walk_sup_exponents(WalkParams(3, 1.0, 0.5, m), 1.0, base.substream(3), n)
        assert independence_pvalue(sup2 > m, sup3 > m) >= 1e-4


class TestArrayEngines:
    @pytest.mark.parametrize("p,b,sigma,m", [(2, 1.0, 1.0, 3), (3, 1.0, 0.5, 3), (5, 2.0, 1.0, 1)])
    def test_engine_matches_path_builder(self, p, b, sigma, m):
        params = WalkParams(p, b, sigma, m)
        for seed in range(25):
            stream = RngStream(seed)
            path = simulate_single(params, 1.0, stream.substream(0))
            sup_eng = int(walk_sup_exponents(params, 1.0, stream, 1)[0])
            fin_eng = int(walk_final_exponents(params, 1.0, stream, 1)[0])
            exps = path.norm_exponents
            assert sup_eng == (max(exps) if exps else ZERO_EXP)
            assert fin_eng == (exps[-1] if exps else ZERO_EXP)

    def test_checkpoints_match_final_runs(self):
        params = WalkParams(2, 1.0, 1.0, 5)
        n = params.step_count(1.0)
        stream = RngStream(7)
        chk = walk_final_exponents(params, 1.0, stream, 40, checkpoints=(1, n // 2, n))
        assert chk.shape == (40, 3)
        full = walk_final_exponents(params, 1.0, stream, 40)
        assert np.array_equal(chk[:, 2], full)

    def test_duplicate_checkpoints_repeat_columns(self):
        for p in (2, 3):  # vectorized and generic branches
            params = WalkParams(p, 1.0, 1.0, 4)
            n = params.step_count(1.0)
            stream = RngStream(19)
            chk = walk_final_exponents(params, 1.0, stream, 30, checkpoints=(n, n))
            assert np.array_equal(chk[:, 0], chk[:, 1])

    def test_unsorted_checkpoints_rejected(self):
        params = WalkParams(2, 1.0, 1.0, 4)
        with pytest.raises(ValueError, match="ascending"):
            walk_final_exponents(params, 1.0, RngStream(0), 4, checkpoints=(3, 1))
        with pytest.raises(ValueError, match="1..n"):
            walk_final_exponents(params, 1.0, RngStream(0), 4, checkpoints=(0, 1))

    def test_generic_fold_equals_vectorized(self):
        # same stream, p = 2: the uint64 path and the integer fold agree
        from adelic_walks.walks import _fold_exponents_generic, _sample_jump_batch

        params = WalkParams(2, 1.0, 1.0, 6)
        n = params.step_count(1.0)
        gen = RngStream(3).substream(0).generator
        ks, payloads = _sample_jump_batch(params, 64 * n, gen)
        sup_generic = _fold_exponents_generic(2, ks, payloads, 64, n, True, None)
        gen = RngStream(3).substream(0).generator
        ks2, payloads2 = _sample_jump_batch(params, 64 * n, gen)
        from adelic_walks.walks import _exponents_vectorized_p2

        sup_vec = _exponents_vectorized_p2(ks2, payloads2, 64, n, True, None)
        assert np.array_equal(sup_generic, sup_vec)

    def test_large_scale_sup_event_near_limit(self):
        # at m = 10 the sup-event frequency sits within CI + formula gap of
        # the large-scale limit
        from adelic_walks.oracles import sup_survival_limit

        m, n_rep = 10, 20_000
        params = WalkParams(2, 1.0, 1.0, m)
        sup = walk_sup_exponents(params, 1.0, RngStream(6), n_rep)
        freq = float(np.mean(sup <= m))
        limit = sup_survival_limit(2, 1.0, 1.0, 1.0, 1)
        lo, hi = clopper_pearson(int(np.sum(sup <= m)), n_rep, 1e-3)
        slack = 3.0 * 2.0**-m
        assert lo - slack <= limit <= hi + slack
        assert abs(freq - limit) <= (hi - lo) / 2 + slack

    def test_containment_law_frequency(self):
        # P(sup_j |S_j| <= p**k) = (1 - p**(-b k))**n within a 99.9% CI
        n_steps, k, n_rep = 10, 2, 40_000
        params = WalkParams(2, 1.0, 1.5, 0)
        T = n_steps / params.step_rate() + 1e-9
        assert params.step_count(T) == n_steps
        sup = walk_sup_exponents(params, T, RngStream(2), n_rep)
        count = int(np.sum(sup <= k))
        lo, hi = clopper_pearson(count, n_rep, 1e-3)
        assert lo <= walk_sup_ball_prob(2, 1.0, k, n_steps) <= hi

    def test_chunk_span_slices_full_plan(self):
        params = WalkParams(2, 1.0, 1.0, 4)
        stream = RngStream(13)
        full = walk_sup_exponents(params, 1.0, stream, 2500)
        head = walk_sup_exponents(params, 1.0, stream, 2500, chunk_span=(0, 1))
        tail = walk_sup_exponents(params, 1.0, stream, 2500, chunk_span=(1, 3))
        assert np.array_equal(full, np.concatenate([head, tail]))
