"""Monte Carlo estimators and the four functional checkers."""

import math
import pickle

import numpy as np
import pytest
from scipy.stats import ks_2samp

import oulab.functionals as FN
from oulab.constants import DriftSpectrum, alpha, beta
from oulab.errors import DomainError
from oulab.fnlib import (
    make_b_weighted,
    make_h,
    raw_profile_b,
    resolve_b,
    resolve_h,
    window_rescaled_b,
    window_rescaled_h,
    zero_shift,
)
from oulab.functionals import (
    CONFIDENCE,
    EXP_BOUND,
    ExperimentSpec,
    McEstimate,
    check_prop21,
    check_thm23,
    concentration_tail,
    exp_moment,
    gamma_step_check,
    moment_bound,
    shift_functional,
)
from oulab.ousim import sample_hilbert, standard_normal, substream
from oulab.parallel import run_blocks


class TestMcEstimate:
    def test_upper_is_mean_plus_quantile(self):
        est = McEstimate(mean=1.0, stderr=0.1, n=100)
        assert est.upper(0.5) == pytest.approx(1.0, abs=1e-15)
        assert est.upper(0.999) == pytest.approx(1.0 + 3.090232306167813 * 0.1, rel=1e-12)
        assert est.upper(0.99) < est.upper(0.999)

    def test_validation(self):
        with pytest.raises(DomainError):
            McEstimate(mean=1.0, stderr=0.1, n=1)
        with pytest.raises(DomainError):
            McEstimate(mean=1.0, stderr=-0.1, n=10)
        est = McEstimate(mean=0.0, stderr=1.0, n=10)
        for bad in (0.0, 1.0, -0.5):
            with pytest.raises(DomainError):
                est.upper(bad)


class TestExpMoment:
    def test_zero_values_give_unit_mean(self):
        est = exp_moment(np.zeros(100), alpha=0.5)
        assert est.mean == 1.0
        assert est.stderr == 0.0
        assert est.max_summand == 1.0

    def test_gaussian_quarter_square(self):
        # E exp(G^2/4) = (1 - 2/4)^(-1/2) = sqrt(2) for standard G
        gen = substream(2718, component=0, block=0)
        g = standard_normal(gen, 40_000)
        est = exp_moment(np.abs(g), alpha=0.25)
        assert abs(est.mean - math.sqrt(2.0)) <= 4.0 * est.stderr

    def test_cap_trips_on_escape(self):
        values = np.array([0.1, 0.2, 5.0])
        with pytest.raises(RuntimeError, match="cap"):
            exp_moment(values, alpha=1.0, summand_cap=math.exp(1.0))

    def test_cap_allows_in_range(self):
        values = np.array([0.1, 0.2, 0.9])
        est = exp_moment(values, alpha=1.0, summand_cap=math.exp(1.0))
        assert est.max_summand <= math.exp(1.0)

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            exp_moment(np.zeros(10), alpha=0.0)
        with pytest.raises(DomainError):
            exp_moment(np.zeros(10), alpha=-1.0)
        with pytest.raises(DomainError):
            exp_moment(np.zeros((5, 2)), alpha=1.0)
        with pytest.raises(DomainError):
            exp_moment(np.array([1.0]), alpha=1.0)
        with pytest.raises(DomainError):
            exp_moment(np.array([1.0, np.inf]), alpha=1.0)


class TestExperimentSpec:
    def _spec(self, **kw):
        lam = (1.0, 4.0)
        base = dict(
            spectrum=DriftSpectrum(lam),
            truncation=2,
            b=make_b_weighted(lam),
            seed=7,
            m=64,
            n_paths=16,
        )
        base.update(kw)
        return ExperimentSpec(**base)

    def test_window_and_start(self):
        spec = self._spec(r=0.25, u=0.75, x0=(0.5, -1.0))
        assert spec.window == 0.5
        assert spec.start_component(0) == 0.5
        assert spec.start_component(1) == -1.0
        assert self._spec().start_component(0) == 0.0

    def test_truncated_spectrum_drops_tail(self):
        spec = self._spec(truncation=1, b=make_b_weighted((1.0, 4.0), direction=0))
        assert spec.truncated_spectrum().eigenvalues == (1.0,)

    def test_rejects_bad_windows_and_ell(self):
        for kw in (dict(r=0.5, u=0.5), dict(r=-0.1), dict(u=1.5), dict(ell=0.0), dict(ell=1.5)):
            with pytest.raises(DomainError):
                self._spec(**kw)

    def test_rejects_uncertified_b(self):
        bare = raw_profile_b(lambda t, xi: np.sin(xi), None, [1.0, 4.0], name="bare")
        with pytest.raises(DomainError):
            self._spec(b=bare)

    def test_rejects_direction_outside_truncation(self):
        b = make_b_weighted((1.0, 4.0), direction=1)
        with pytest.raises(DomainError):
            self._spec(truncation=1, b=b)

    def test_rejects_shift_from_other_spectrum(self):
        h_wrong = make_h([1.0, 5.0], {0: "sin_pi_t"})
        with pytest.raises(DomainError):
            self._spec(h1=h_wrong)
        h_short = make_h([1.0], {0: "sin_pi_t"})
        with pytest.raises(DomainError):
            self._spec(h1=h_short)

    def test_picklable(self):
        spec = self._spec(h=make_h((1.0, 4.0), {0: "sin_pi_t"}))
        spec2 = pickle.loads(pickle.dumps(spec))
        assert spec2.seed == spec.seed
        assert spec2.h.norm_inf == spec.h.norm_inf


class TestShiftFunctional:
    def test_zero_shift_gives_zero_vector(self):
        lam = (1.0, 4.0)
        path = sample_hilbert(lam, 2, 128, seed=3)
        b = make_b_weighted(lam)
        out = shift_functional(b, zero_shift(lam), path)
        np.testing.assert_array_equal(out, np.zeros(2))

    def test_norm_bounded_by_two_sup(self):
        lam = (1.0, 4.0)
        b = make_b_weighted(lam, profile="sin")
        h = make_h(lam, {0: "sin_pi_t"})
        for p in range(8):
            path = sample_hilbert(lam, 2, 128, seed=3, path=p)
            out = shift_functional(b, h, path)
            assert np.linalg.norm(out) <= 2.0 * b.norm_inf + 1e-12

    def test_rejects_mismatches(self):
        lam = (1.0, 4.0)
        path = sample_hilbert(lam, 1, 64, seed=0)
        with pytest.raises(DomainError):
            shift_functional(make_b_weighted(lam), make_h(lam, {0: "const"}), path)
        with pytest.raises(DomainError):
            shift_functional(make_b_weighted(lam, direction=1), make_h([1.0], {0: "const"}), path)


class TestCheckProp21:
    def test_constant_profile_is_exact(self):
        # b' = 0, so every summand is exp(0) = 1 with no MC noise
        res = check_prop21(1.0, resolve_b("const:0.5", [1.0]), m=32, n_paths=512, seed=5)
        assert res.estimate.mean == 1.0
        assert res.estimate.stderr == 0.0
        assert res.passed
        assert res.alpha == alpha(1.0)

    def test_smoke_run_passes(self):
        res = check_prop21(1.0, make_b_weighted([1.0], profile="sin"), m=256, n_paths=2048, seed=11)
        assert res.passed
        assert res.estimate.upper(CONFIDENCE) <= EXP_BOUND
        assert res.estimate.n == 2048
        assert res.proof_constant == pytest.approx((6.0 + math.sqrt(2.0)) / 3.0, rel=1e-15)

    def test_rejects_non_smooth(self):
        with pytest.raises(DomainError):
            check_prop21(1.0, make_b_weighted([1.0], profile="sign"), m=32, n_paths=16)

    def test_rejects_uncertified(self):
        bare = raw_profile_b(lambda t, xi: np.sin(xi), lambda t, xi: np.cos(xi), [1.0], name="bare")
        with pytest.raises(DomainError):
            check_prop21(1.0, bare, m=32, n_paths=16)


class TestCheckThm23:
    def _spec(self, **kw):
        lam = (1.0, 4.0)
        base = dict(
            spectrum=DriftSpectrum(lam),
            truncation=2,
            b=make_b_weighted(lam, profile="sin"),
            seed=13,
            m=256,
            n_paths=2048,
            h=make_h(lam, {0: "sin_pi_t"}),
        )
        base.update(kw)
        return ExperimentSpec(**base)

    def test_state_free_profile_is_exact(self):
        spec = self._spec(b=resolve_b("time:sin_pi", (1.0, 4.0)))
        res = check_thm23(spec)
        assert res.estimate.mean == 1.0
        assert res.estimate.stderr == 0.0
        assert res.passed

    def test_smoke_run_passes(self):
        spec = self._spec()
        res = check_thm23(spec)
        assert res.passed
        assert res.beta == pytest.approx(beta(DriftSpectrum((1.0, 4.0))), rel=1e-15)
        assert res.rate == pytest.approx(res.beta / spec.h.norm_inf**2, rel=1e-15)
        assert res.h_sup == 1.0

    def test_rejects_missing_or_zero_shift(self):
        with pytest.raises(DomainError):
            check_thm23(self._spec(h=None))
        with pytest.raises(DomainError):
            check_thm23(self._spec(h=zero_shift((1.0, 4.0))))


class TestConcentration:
    def _spec(self, **kw):
        lam = (1.0, 4.0)
        base = dict(
            spectrum=DriftSpectrum(lam),
            truncation=2,
            b=make_b_weighted(lam, profile="sin"),
            seed=17,
            m=256,
            n_paths=2048,
            h1=resolve_h("e1:sin_pi_t", lam),
            h2=zero_shift(lam),
            r=0.25,
            u=0.75,
        )
        base.update(kw)
        return ExperimentSpec(**base)

    def test_smoke_run_passes(self):
        res = concentration_tail(self._spec(), etas=(0.5, 1.0, 2.0, 4.0))
        assert res.passed and not res.degenerate
        assert res.ell == 0.5
        emp = [row.empirical for row in res.rows]
        assert emp == sorted(emp, reverse=True)
        for row in res.rows:
            assert row.bound == pytest.approx(3.0 * math.exp(-res.beta * row.eta**2), rel=1e-15)
            assert row.threshold == pytest.approx(row.eta * math.sqrt(res.ell) * res.diff_sup, rel=1e-15)

    def test_eta_zero_is_trivially_true(self):
        res = concentration_tail(self._spec(), etas=(0.0,))
        row = res.rows[0]
        assert row.bound == 3.0
        assert row.threshold == 0.0
        assert row.passed

    def test_identical_shifts_degenerate(self):
        h = resolve_h("e1:sin_pi_t", (1.0, 4.0))
        res = concentration_tail(self._spec(h1=h, h2=h), etas=(1.0,))
        assert res.degenerate and res.passed
        assert res.diff_sup == 0.0
        assert res.note

    def test_rejects_bad_etas_and_missing_shifts(self):
        with pytest.raises(DomainError):
            concentration_tail(self._spec(), etas=(-1.0,))
        with pytest.raises(DomainError):
            concentration_tail(self._spec(), etas=(math.inf,))
        with pytest.raises(DomainError):
            concentration_tail(self._spec(h1=None), etas=(1.0,))


class TestMoments:
    def _spec(self, **kw):
        lam = (1.0, 4.0)
        base = dict(
            spectrum=DriftSpectrum(lam),
            truncation=2,
            b=make_b_weighted(lam, profile="sin"),
            seed=19,
            m=256,
            n_paths=2048,
            x=(0.5, 0.0),
            y=(-0.5, 0.0),
        )
        base.update(kw)
        return ExperimentSpec(**base)

    def test_smoke_run_against_derived_bound(self):
        res = moment_bound(self._spec(), ps=(1, 2, 4))
        assert res.passed and not res.degenerate
        assert res.separation == 1.0
        for row in res.rows:
            assert row.upper999 == pytest.approx(
                row.moment + 3.090232306167813 * row.stderr, rel=1e-12
            )
            assert row.passed

    def test_stated_exponent_reading_fails(self):
        # beta < 1 makes beta^(p/2) the smaller scale; the measured first
        # moment already exceeds it, which is why PASS compares against
        # the beta^(-p/2) form
        res = moment_bound(self._spec(), ps=(1,))
        row = res.rows[0]
        assert row.bound_stated < row.bound_derived
        assert row.moment > row.bound_stated
        assert row.upper999 <= row.bound_derived

    def test_equal_shifts_degenerate(self):
        res = moment_bound(self._spec(y=(0.5, 0.0)), ps=(1, 2))
        assert res.degenerate and res.passed
        assert all(row.moment == 0.0 for row in res.rows)

    def test_rejects_bad_orders_and_missing_points(self):
        with pytest.raises(DomainError):
            moment_bound(self._spec(), ps=(0,))
        with pytest.raises(DomainError):
            moment_bound(self._spec(x=None), ps=(1,))
        with pytest.raises(DomainError):
            moment_bound(self._spec(x=(1.0,)), ps=(1,))


class TestGammaStep:
    def test_all_orders_hold(self):
        rows = gamma_step_check(20)
        assert len(rows) == 20
        assert all(ok for (_, _, _, ok) in rows)

    def test_exact_small_orders(self):
        rows = gamma_step_check(2)
        p1, lhs1, rhs1, _ = rows[0]
        assert lhs1 == pytest.approx(1.5 * math.sqrt(math.pi), rel=1e-15)
        assert rhs1 == 3.0
        p2, lhs2, rhs2, _ = rows[1]
        assert lhs2 == 3.0 and rhs2 == 6.0

    def test_rejects_empty_range(self):
        with pytest.raises(DomainError):
            gamma_step_check(0)


class TestWindowRescalingLaw:
    def test_window_run_matches_rescaled_unit_run_in_law(self):
        # J = int_r^u [b(s, Z_s + h1(s)) - b(s, Z_s + h2(s))] ds, with Z at
        # rate lam, has the same law as l * J~ where J~ uses the window
        # rescaled descriptors at rate l*lam on [0, 1].  Independent seeds
        # on both sides, then a two-sample KS test.
        lam, r, u = 2.0, 0.25, 0.75
        ell = u - r
        n, m = 4096, 512
        b = make_b_weighted([lam], profile="tanh")
        h1 = make_h([lam], {0: "sin_pi_t"})
        h2 = zero_shift([lam])

        spec = ExperimentSpec(
            spectrum=DriftSpectrum((lam,)),
            truncation=1,
            b=b,
            seed=101,
            m=m,
            n_paths=n,
            h1=h1,
            h2=h2,
            r=r,
            u=u,
        )
        t_abs = r + np.linspace(0.0, ell, m + 1)
        window_values = FN._window_values(
            spec, h1.component(0, t_abs), h2.component(0, t_abs)
        )

        rb = window_rescaled_b(b, r, u)
        rh1 = window_rescaled_h(h1, r, u)
        rh2 = window_rescaled_h(h2, r, u)
        t01 = np.linspace(0.0, 1.0, m + 1)
        unit_values = run_blocks(
            FN._shifted_pair_block,
            n,
            1,
            (202, ell * lam, 1.0, m, rb, rh1.component(0, t01), rh2.component(0, t01), 0.0, t01),
        )

        stat = ks_2samp(window_values, ell * unit_values)
        assert stat.pvalue > 1e-3, (stat.statistic, stat.pvalue)


class TestReducedSamplingMatchesFullPaths:
    def test_prop21_block_bitwise(self):
        # the worker samples only the active component; the values must be
        # bit-identical to recomputing from full Hilbert paths
        lam = (1.0, 4.0)
        b = make_b_weighted(lam, profile="sin", direction=0)
        got = FN._prop21_block(0, 5, 23, 1.0, 128, b)
        times = np.linspace(0.0, 1.0, 129)
        want = np.empty(5)
        for i in range(5):
            hp = sample_hilbert(lam, 2, 128, seed=23, path=i)
            xi = hp.component_values(0)
            dphi = np.asarray(b.profile_dx(times, xi), dtype=np.float64)
            want[i] = abs(np.trapezoid(dphi, dx=1.0 / 128)) * b.vector_norm
        np.testing.assert_array_equal(got, want)

    def test_shifted_pair_block_bitwise(self):
        lam = (4.0, 9.0)
        b = make_b_weighted(lam, profile="sin", direction=1)
        h = make_h(lam, {1: "sin_pi_t"})
        times = np.linspace(0.0, 1.0, 129)
        hv = h.component(1, times)
        zero = np.zeros_like(times)
        got = FN._shifted_pair_block(0, 4, 29, 9.0, 1.0, 128, b, hv, zero, 0.0, times)
        want = np.empty(4)
        for i in range(4):
            hp = sample_hilbert(lam, 2, 128, seed=29, path=i)
            xi = hp.component_values(1)
            phi1 = np.asarray(b.profile(times, xi + hv), dtype=np.float64)
            phi2 = np.asarray(b.profile(times, xi), dtype=np.float64)
            want[i] = abs(np.trapezoid(phi1 - phi2, dx=1.0 / 128)) * b.vector_norm
        np.testing.assert_array_equal(got, want)

    def test_worker_count_does_not_change_values(self):
        b = make_b_weighted([1.0], profile="sin")
        args = (31, 1.0, 64, b)
        one = run_blocks(FN._prop21_block, 600, 1, args)
        three = run_blocks(FN._prop21_block, 600, 3, args)
        np.testing.assert_array_equal(one, three)
