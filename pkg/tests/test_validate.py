import math

import numpy as np
import pytest

from crossbound import (
    Brownian,
    DomainViolation,
    ExpSupermartingale,
    Gaussian,
    IidSum,
    InvalidParameter,
    LazyWalk,
    Uniform24,
    UniformIncrements,
    clopper_pearson,
    estimate_crossing,
    halving_allowance,
    make_phi,
    optimized_line_bound,
    sweep,
)
from crossbound.presets import walk_region_pair
from crossbound.validate import EventSpec, _verdict


class TestClopperPearson:
    def test_zero_successes_closed_form(self):
        lo, hi = clopper_pearson(0, 100, 0.10)
        assert lo == 0.0
        assert hi == pytest.approx(1.0 - 0.05 ** 0.01, rel=1e-12)
        assert hi == pytest.approx(0.02951304960703993, rel=1e-10)

    def test_all_successes(self):
        lo, hi = clopper_pearson(100, 100, 0.10)
        assert hi == 1.0
        assert lo == pytest.approx(0.05 ** 0.01, rel=1e-12)

    def test_half_successes_oracle(self):
        # Beta-quantile oracle computed independently before the build
        lo, hi = clopper_pearson(50, 100, 0.05)
        assert lo == pytest.approx(0.39832112950330106, rel=1e-10)
        assert hi == pytest.approx(0.6016788704966989, rel=1e-10)

    def test_interval_brackets_p_hat(self):
        for k, n in ((1, 40), (17, 60), (59, 60)):
            lo, hi = clopper_pearson(k, n, 0.01)
            assert lo <= k / n <= hi

    def test_validation(self):
        with pytest.raises(DomainViolation):
            clopper_pearson(-1, 10, 0.05)
        with pytest.raises(DomainViolation):
            clopper_pearson(11, 10, 0.05)
        with pytest.raises(DomainViolation):
            clopper_pearson(1, 10, 1.5)


class TestVerdictRule:
    def test_violated_iff_ci_lo_above_bound(self):
        assert _verdict(0.31, 0.33, 0.30) == "violated"
        assert _verdict(0.29, 0.33, 0.30) != "violated"

    def test_inconclusive_when_interval_dwarfs_bound(self):
        assert _verdict(0.0, 0.2, 0.05) == "inconclusive"
        assert _verdict(0.0, 0.02, 0.05) == "holds"

    def test_nan_bound_passes_through(self):
        assert _verdict(0.1, 0.2, math.nan) == "holds"


class TestEventSpec:
    def test_kind_validated(self):
        with pytest.raises(InvalidParameter):
            EventSpec(kind="wiggle")
        with pytest.raises(InvalidParameter):
            EventSpec(kind="vee", side="two_sided")
        with pytest.raises(InvalidParameter):
            EventSpec(kind="stopping")


class TestEstimateCrossing:
    def test_doob_brownian_near_half(self):
        phi = make_phi(Gaussian(1.0))
        spec = ExpSupermartingale(Brownian(dt=2e-3, horizon=15.0), 1.0, phi)
        ev = EventSpec(kind="sup_level", gamma=2.0, bound=0.5, label="doob")
        rep = estimate_crossing(spec, ev, n_paths=20_000, seed=40)
        assert 0.45 <= rep.p_hat <= 0.51
        assert rep.verdict == "holds"
        assert rep.ci_lo <= rep.p_hat <= rep.ci_hi

    def test_rare_event_zero_crossings(self):
        # optimized vee bound e^{-60}: expect literally no crossings
        phi = make_phi(Uniform24())
        bound = optimized_line_bound(phi, 1.0, 10.0).bound
        assert bound == pytest.approx(math.exp(-60.0), rel=1e-9)
        ev = EventSpec(kind="vee", gamma=1.0, v_tau=10.0, bound=bound,
                       label="rare")
        rep = estimate_crossing(IidSum(UniformIncrements(), 100), ev,
                                n_paths=2000, seed=41)
        assert rep.n_crossed == 0
        assert rep.verdict != "violated"

    def test_stopping_event_delegates(self):
        ev = EventSpec(kind="stopping", pair=walk_region_pair(),
                       stopping_kind="martingale", label="os")
        rep = estimate_crossing(LazyWalk(1.0, 500), ev, n_paths=4000,
                                horizon=500, seed=42)
        assert rep.verdict == "holds"
        assert "mean_inner" in rep.extra


class TestSweep:
    def test_empty_events(self):
        assert sweep(Brownian(0.01, 1.0), [], 100, seed=1) == []

    def test_monotone_in_gamma_on_shared_paths(self):
        phi = make_phi(Gaussian(1.0))
        spec = ExpSupermartingale(Brownian(dt=5e-3, horizon=10.0), 1.0, phi)
        events = [EventSpec(kind="sup_level", gamma=g, bound=1.0 / g,
                            label=f"g{g}") for g in (0.5, 1.0, 2.0, 4.0)]
        reps = sweep(spec, events, n_paths=5000, seed=43)
        phats = [r.p_hat for r in reps]
        assert phats == sorted(phats, reverse=True)
        assert phats[0] == 1.0  # gamma = 0.5 < Y_0

    def test_cache_matches_fresh_runs(self):
        spec = IidSum(UniformIncrements(), 80)
        events = [EventSpec(kind="line", side="upper", gamma=0.3, v_tau=10.0,
                            slope=0.15, bound=0.5, label="a"),
                  EventSpec(kind="eta_ray", side="upper", gamma=0.2, eta=1.0,
                            bound=0.5, label="b")]
        batch = sweep(spec, events, 3000, seed=44)
        singles = [estimate_crossing(spec, ev, 3000, seed=44) for ev in events]
        for b, s in zip(batch, singles):
            assert b.p_hat == s.p_hat
            assert b.n_crossed == s.n_crossed

    def test_thread_count_does_not_change_counts(self):
        spec = Brownian(dt=5e-3, horizon=5.0)
        ev = EventSpec(kind="line", side="upper", gamma=1.0, v_tau=1.0,
                       slope=0.5, bound=0.61, label="t")
        a = sweep(spec, [ev], 2000, seed=45, threads=1)[0]
        b = sweep(spec, [ev], 2000, seed=45, threads=2, chunk_size=64)[0]
        assert a.n_crossed == b.n_crossed

    def test_report_roundtrip_fields(self):
        spec = IidSum(UniformIncrements(), 50)
        ev = EventSpec(kind="vee", gamma=0.5, v_tau=5.0, bound=0.2, label="v")
        rep = sweep(spec, [ev], 500, seed=46)[0]
        rec = rep.to_dict()
        assert rec["schema_version"] == "1"
        assert rec["label"] == "v"
        assert 0.0 <= rec["p_hat"] <= 1.0
        row = rep.csv_row()
        assert row.split(",")[1] == "v"


class TestHalvingAllowance:
    def test_richardson_factor(self):
        assert halving_allowance(0.5, 0.5) == 0.0
        est = halving_allowance(0.50, 0.49)
        assert est == pytest.approx(0.01 / (math.sqrt(2.0) - 1.0), rel=1e-12)

    def test_never_negative(self):
        assert halving_allowance(0.4, 0.5) == 0.0
