import numpy as np
import pytest

from offo.bench import (
    TheoryConstants,
    constants_from_run,
    quadratic_testbed,
    series_bound_margins,
    series_corollary_margins,
    series_suite,
    theory_check,
)
from offo.driver import RunConfig, astr1
from offo.errors import InvalidParameter, MissingConstants
from offo.scaling import ScalingStrategy


class TestSeriesLemma:
    def test_exact_margins_on_simple_sequence(self):
        # single term: a0/(xi+a0) vs log((xi+a0)/xi)
        m = series_bound_margins(np.array([1.0]), 1.0, 1.0)
        assert m[0] == pytest.approx(np.log(2.0) - 0.5)

    @pytest.mark.parametrize("alpha", [0.3, 1.0, 1.7])
    def test_margins_nonnegative_random(self, alpha):
        rng = np.random.default_rng(1)
        for _ in range(50):
            a = rng.exponential(size=rng.integers(1, 100))
            m = series_bound_margins(a, 0.01, alpha)
            assert np.all(m >= -1e-12 * np.maximum(np.abs(m), 1.0))

    def test_corollaries(self):
        rng = np.random.default_rng(2)
        a = rng.exponential(size=60)
        assert np.all(series_corollary_margins(a, 1.0, 0.3) >= 0)
        assert np.all(series_corollary_margins(a, 1.0, 1.7) >= 0)
        with pytest.raises(InvalidParameter):
            series_corollary_margins(a, 1.0, 1.0)

    def test_negative_sequence_rejected(self):
        with pytest.raises(InvalidParameter):
            series_bound_margins(np.array([-1.0]), 1.0, 0.5)

    def test_suite_runs_clean(self):
        out = series_suite(n_sequences=100, seed=5)
        assert out["violations"] == 0
        assert out["worst_margin"] >= -1e-12


def _testbed_run(mu=0.5, kind="adagrad-comp", nu=0.1, varsigma=0.01, tau=0.1,
                 n=3, iters=1500):
    problem = quadratic_testbed(n)
    if kind == "adagrad-comp":
        strat = ScalingStrategy(kind=kind, mu=mu, varsigma=varsigma)
    else:
        strat = ScalingStrategy(kind=kind, mu=mu, nu=nu, varsigma=varsigma)
    config = RunConfig(scaling=strat, model="none", norm="inf", tau=tau,
                       eps=1e-30, max_iter=iters, keep_trace=True)
    record = astr1(problem, config)
    gamma0 = problem.value(problem.x0)
    return record, constants_from_run(record, L=1.0, Gamma0=gamma0)


class TestConstants:
    def test_all_finite_positive(self):
        record, c = _testbed_run(mu=0.25)
        for name in ("kappa1", "kappa2", "kappa3", "kappa4", "kappa5"):
            val = getattr(c, name)
            assert np.isfinite(val) and val > 0
        record, c = _testbed_run(mu=0.5)
        for name in ("kappa1", "kappa2", "kappa4", "kappa6"):
            val = getattr(c, name)
            assert np.isfinite(val) and val > 0
        record, c = _testbed_run(mu=0.75)
        for name in ("kappa7", "kappa8"):
            val = getattr(c, name)
            assert np.isfinite(val) and val > 0

    def test_regime_gating(self):
        _, c = _testbed_run(mu=0.5)
        with pytest.raises(MissingConstants):
            c.kappa3
        with pytest.raises(MissingConstants):
            c.kappa7
        with pytest.raises(MissingConstants):
            c.j_theta  # not an iteration-power run

    def test_ming_constants(self):
        _, c = _testbed_run(kind="maxg-comp", mu=0.1, nu=0.1)
        assert c.varsigma_min == 0.01
        assert np.isfinite(c.kappa_diamond) and c.kappa_diamond > 0
        assert c.j_theta > 1e40  # enormous for the default parameters

    def test_kappa_g_honours_start_floor(self):
        record, c = _testbed_run(mu=0.5)
        g0 = record.trace["g"][0]
        assert c.kappa_g**2 >= np.max(g0**2) + c.varsigma


class TestTheoryCheck:
    @pytest.mark.parametrize("mu,regime", [(0.25, "mu_lt_half"),
                                           (0.5, "mu_eq_half"),
                                           (0.75, "mu_gt_half")])
    def test_adagrad_regimes_pass(self, mu, regime):
        record, constants = _testbed_run(mu=mu)
        report = theory_check(record, constants, regime)
        assert report["violations"] == 0
        assert report["checks"]["k_order"]["min_margin"] >= 0

    def test_ming_regime_vacuous_window_passes(self):
        record, constants = _testbed_run(kind="maxg-comp", mu=0.1, nu=0.1)
        report = theory_check(record, constants, "ming")
        assert report["violations"] == 0
        assert report["checks"]["ming_window"].get("vacuous") is True

    def test_ming_regime_nonvacuous_window(self):
        # varsigma = 1, tau = 1 and a large power make j_theta small, so the
        # windowed bound is actually exercised
        record, constants = _testbed_run(kind="maxg-comp", mu=0.9, nu=0.9,
                                         varsigma=1.0, tau=1.0, iters=800)
        assert constants.j_theta < 10
        report = theory_check(record, constants, "ming")
        assert report["checks"]["ming_window"].get("vacuous") is None
        assert report["violations"] == 0

    def test_unknown_regime(self):
        record, constants = _testbed_run()
        with pytest.raises(InvalidParameter):
            theory_check(record, constants, "nope")

    def test_needs_trace(self):
        problem = quadratic_testbed(2)
        record = astr1(problem, RunConfig(max_iter=5))
        record2 = astr1(problem, RunConfig(max_iter=5, keep_trace=True))
        constants = constants_from_run(record2, L=1.0, Gamma0=1.0)
        record.trace = None
        with pytest.raises(MissingConstants):
            theory_check(record, constants, "mu_eq_half")


def test_constants_require_trace():
    problem = quadratic_testbed(2)
    record = astr1(problem, RunConfig(max_iter=5))
    with pytest.raises(MissingConstants):
        constants_from_run(record, L=1.0, Gamma0=1.0)


def test_theory_constants_validation():
    with pytest.raises(MissingConstants):
        TheoryConstants(n=1, mu=0.5, varsigma=0.01, vartheta=1.0, tau=0.1,
                        kappaB=np.nan, L=1.0, kappa_g=1.0, Gamma0=1.0)
