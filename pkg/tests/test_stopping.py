import math

import numpy as np
import pytest

from crossbound import (
    Brownian,
    ContinuityRegion,
    EmptyPath,
    ExpSupermartingale,
    Gaussian,
    InvalidParameter,
    LazyWalk,
    Path,
    RegionPair,
    crossing_indicator,
    first_exit,
    generate,
    make_phi,
    verify_optional_stopping,
)

PAIR_3_5 = RegionPair(inner=ContinuityRegion.constant(-3.0, 3.0, envelope=5.0),
                      outer=ContinuityRegion.constant(-5.0, 5.0, envelope=5.0))


def _path(values, times=None):
    values = np.asarray(values, dtype=float)
    t = np.arange(values.size, dtype=float) if times is None else np.asarray(times)
    return Path(times=t, values=values, vproxy=t.copy())


class TestRegions:
    def test_envelope_enforced(self):
        with pytest.raises(InvalidParameter):
            ContinuityRegion.constant(-3.0, 3.0, envelope=2.0)
        with pytest.raises(InvalidParameter):
            ContinuityRegion.constant(2.0, -2.0, envelope=5.0)

    def test_nesting_enforced(self):
        with pytest.raises(InvalidParameter):
            RegionPair(inner=ContinuityRegion.constant(-5.0, 5.0, envelope=5.0),
                       outer=ContinuityRegion.constant(-3.0, 3.0, envelope=5.0))

    def test_piecewise_lookup(self):
        reg = ContinuityRegion(breakpoints=np.array([0.0, 2.0]),
                               lower=np.array([-1.0, -2.0]),
                               upper=np.array([1.0, 2.0]), envelope=3.0)
        assert reg.lower_at(0.5) == -1.0
        assert reg.lower_at(2.0) == -2.0  # right-continuous at breakpoints
        assert reg.upper_at(10.0) == 2.0

    def test_serialization_roundtrip(self):
        from crossbound import region_from_dict, region_pair_from_dict
        reg = ContinuityRegion(breakpoints=np.array([0.0, 2.0]),
                               lower=np.array([-1.0, -2.0]),
                               upper=np.array([1.0, 2.0]), envelope=3.0)
        back = region_from_dict(
            __import__("crossbound").region_to_dict(reg))
        assert np.array_equal(back.breakpoints, reg.breakpoints)
        assert np.array_equal(back.lower, reg.lower)
        assert back.envelope == reg.envelope
        pair = region_pair_from_dict(PAIR_3_5.to_dict())
        assert pair.outer.upper_at(0.0) == 5.0


class TestFirstExit:
    def test_deterministic_ramp(self):
        res = first_exit(_path([0.0, 1.0, 2.0, 3.0]),
                         ContinuityRegion.constant(-2.5, 2.5))
        assert res.tau == 3.0 and res.value_at_stop == 3.0
        assert not res.truncated

    def test_never_exits_truncates(self):
        res = first_exit(_path([0.0, 1.0, 0.5, -1.0]),
                         ContinuityRegion.constant(-2.5, 2.5))
        assert res.tau == math.inf and res.truncated
        assert res.value_at_stop == -1.0

    def test_tie_at_zero(self):
        res = first_exit(_path([3.0, 0.0]), ContinuityRegion.constant(-2.5, 2.5, 3.0))
        assert res.tau == 0.0 and res.value_at_stop == 3.0

    def test_walk_exit_value_support(self):
        spec = LazyWalk(1.0, 2000)
        region = ContinuityRegion.constant(-3.0, 3.0)
        for i in range(200):
            res = first_exit(generate(spec, seed=5, path_index=i), region)
            assert not res.truncated
            assert abs(res.value_at_stop) == 3.0

    def test_monotone_in_regions_and_bounded(self):
        spec = LazyWalk(1.0, 2000)
        for i in range(200):
            path = generate(spec, seed=6, path_index=i)
            r1 = first_exit(path, PAIR_3_5.inner)
            r2 = first_exit(path, PAIR_3_5.outer)
            assert r1.tau <= r2.tau
            if not r2.truncated:
                before = path.values[path.times < r2.tau]
                assert np.all(np.abs(before) <= 5.0)

    def test_empty_path_rejected(self):
        with pytest.raises((EmptyPath, InvalidParameter)):
            first_exit(Path(times=np.array([]), values=np.array([]),
                            vproxy=np.array([])),
                       ContinuityRegion.constant(-1.0, 1.0))


class TestCrossingIndicator:
    def test_constant_below(self):
        assert not crossing_indicator(_path([0.0, 0.0, 0.0]), lambda t: 1.0 + 0 * t)

    def test_exact_hit_is_closed(self):
        path = _path([0.0, 1.0, 0.0])
        assert crossing_indicator(path, lambda t: np.full_like(t, 1.0))

    def test_linear_path_hits_moving_boundary(self):
        path = _path([0.0, 1.0, 2.0, 3.0])
        assert crossing_indicator(path, lambda t: 0.5 + 0.0 * t)
        assert not crossing_indicator(path, lambda t: 3.5 + 0.0 * t)
        assert crossing_indicator(path, lambda t: 0.0 * t, direction="down")
        assert not crossing_indicator(path, lambda t: -0.5 + 0.0 * t,
                                      direction="down")
        # boundary as an aligned array also works
        assert crossing_indicator(path, np.array([0.5, 0.5, 0.5, 0.5]))


class TestOptionalStopping:
    def test_symmetric_walk_equality(self):
        rep = verify_optional_stopping(LazyWalk(1.0, 100), PAIR_3_5,
                                       n_paths=30_000, horizon=3000, seed=17)
        assert rep.verdict == "holds"
        assert abs(rep.mean_inner) <= 3.0 * rep.se_inner
        assert abs(rep.mean_outer) <= 3.0 * rep.se_outer
        assert rep.truncated_outer == 0.0

    def test_drifted_walk_supermartingale(self):
        rep = verify_optional_stopping(LazyWalk(1.0, 100, drift=-0.1), PAIR_3_5,
                                       n_paths=30_000, horizon=3000, seed=18,
                                       kind="supermartingale")
        assert rep.verdict == "holds"
        assert rep.mean_diff <= 3.0 * rep.se_diff
        assert rep.mean_outer < rep.mean_inner  # strict drift effect

    @pytest.mark.filterwarnings("ignore:truncation fraction")
    def test_exponential_supermartingale_equality(self):
        # Most paths never leave (0, 4): Y -> 0, so tau = inf and the terminal
        # value stands in for X_tau, exactly the lim X_{tau ^ t} convention.
        phi = make_phi(Gaussian(1.0))
        spec = ExpSupermartingale(Brownian(dt=2e-3, horizon=60.0), s=1.0, phi=phi)
        pair = RegionPair(
            inner=ContinuityRegion.constant(0.0, 4.0, envelope=8.0),
            outer=ContinuityRegion.constant(0.0, 8.0, envelope=8.0))
        rep = verify_optional_stopping(spec, pair, n_paths=4000, horizon=60.0,
                                       seed=19)
        # martingale started at 1: both stopped means estimate E[Y_0] = 1
        assert abs(rep.mean_inner - 1.0) <= 4.0 * rep.se_inner
        assert abs(rep.mean_outer - 1.0) <= 4.0 * rep.se_outer
        assert rep.verdict == "holds"

    def test_truncation_warning(self):
        tight = RegionPair(inner=ContinuityRegion.constant(-40.0, 40.0, 50.0),
                           outer=ContinuityRegion.constant(-50.0, 50.0, 50.0))
        with pytest.warns(UserWarning, match="truncation"):
            verify_optional_stopping(LazyWalk(1.0, 30), tight, n_paths=500,
                                     horizon=30, seed=20)

    def test_kind_validated(self):
        with pytest.raises(InvalidParameter):
            verify_optional_stopping(LazyWalk(1.0, 10), PAIR_3_5, 10, 10, 1,
                                     kind="submartingale")
