import math

import numpy as np
import pytest

from crossbound import (
    BernoulliIncrements,
    Brownian,
    DomainViolation,
    ExpSupermartingale,
    Gaussian,
    IidSum,
    InvalidParameter,
    InvalidSpec,
    LazyWalk,
    Path,
    PoissonCentered,
    PoissonCounting,
    TwoPointIncrements,
    Uniform24,
    UniformIncrements,
    generate,
    make_phi,
    transform_exp_martingale,
)
from crossbound.sim import increments_matrix, uniform_grid


class TestPathInvariants:
    def test_validation(self):
        with pytest.raises(InvalidParameter):
            Path(times=[0.0, 1.0, 1.0], values=[0, 0, 0], vproxy=[0, 1, 2])
        with pytest.raises(InvalidParameter):
            Path(times=[0.5, 1.0], values=[0, 0], vproxy=[0, 1])
        with pytest.raises(InvalidParameter):
            Path(times=[0.0, 1.0], values=[0, 0], vproxy=[1, 0])

    def test_generated_paths_satisfy_invariants(self):
        for spec in (IidSum(UniformIncrements(), 50),
                     LazyWalk(0.6, 50, drift=-0.05),
                     PoissonCounting(2.0, 5.0),
                     PoissonCounting(2.0, 5.0, centered=True),
                     Brownian(0.1, 5.0)):
            p = generate(spec, seed=5, path_index=3)
            assert p.times[0] == 0.0
            assert np.all(np.diff(p.times) > 0)
            assert np.all(np.diff(p.vproxy) >= 0)


class TestDeterminism:
    @pytest.mark.parametrize("spec", [
        IidSum(BernoulliIncrements(0.3), 64),
        LazyWalk(0.8, 64, drift=0.1),
        PoissonCounting(1.5, 12.0, centered=True),
        Brownian(0.01, 2.0),
    ], ids=lambda s: type(s).__name__)
    def test_same_key_same_path(self, spec):
        a = generate(spec, seed=123, path_index=7)
        b = generate(spec, seed=123, path_index=7)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.times, b.times)

    def test_different_indices_differ(self):
        spec = Brownian(0.01, 2.0)
        a = generate(spec, seed=123, path_index=0)
        b = generate(spec, seed=123, path_index=1)
        assert not np.array_equal(a.values, b.values)

    def test_batch_rows_match_single_paths(self):
        spec = IidSum(UniformIncrements(), 32)
        mat = increments_matrix(spec, seed=9, indices=np.arange(5))
        for i in range(5):
            path = generate(spec, seed=9, path_index=i)
            rebuilt = np.concatenate([[0.0], np.cumsum(mat[i])])
            assert np.array_equal(path.values, rebuilt)


class TestIidSum:
    def test_bernoulli_increment_support(self):
        p = 0.3
        path = generate(IidSum(BernoulliIncrements(p), 200), seed=1)
        inc = np.diff(path.values)
        assert set(np.round(inc, 12)) <= {-p, 1.0 - p}

    def test_vproxy_counts_steps(self):
        path = generate(IidSum(UniformIncrements(), 10), seed=1)
        assert np.array_equal(path.vproxy, np.arange(11.0))

    def test_two_point_validation(self):
        with pytest.raises(InvalidSpec):
            generate(IidSum(TwoPointIncrements(1.0, 2.0, 0.5), 10), seed=1)


class TestPoisson:
    def test_mean_count(self):
        lam, horizon, n = 1.0, 10.0, 100_000
        spec = PoissonCounting(lam, horizon)
        total = 0.0
        for i in range(n):
            total += generate(spec, seed=42, path_index=i).values[-1]
        mean = total / n
        se = math.sqrt(lam * horizon / n)
        assert abs(mean - lam * horizon) <= 4.0 * se

    def test_counting_path_shape(self):
        p = generate(PoissonCounting(2.0, 10.0), seed=3, path_index=1)
        jumps = len(p.times) - 2
        assert p.values[-1] == jumps
        assert np.array_equal(p.vproxy, p.times)
        assert np.all(np.diff(p.values) >= 0)

    def test_centered_flag(self):
        raw = generate(PoissonCounting(2.0, 10.0), seed=3, path_index=1)
        cen = generate(PoissonCounting(2.0, 10.0, centered=True), seed=3,
                       path_index=1)
        assert np.allclose(cen.values, raw.values - 2.0 * raw.times)


class TestExpSupermartingale:
    def test_starts_at_one(self):
        phi = make_phi(Gaussian(1.0))
        spec = ExpSupermartingale(Brownian(0.01, 1.0), s=0.7, phi=phi)
        path = generate(spec, seed=11)
        assert path.values[0] == 1.0

    def test_transform_s_zero_constant_one(self):
        phi = make_phi(Gaussian(1.0))
        base = generate(Brownian(0.05, 1.0), seed=2)
        y = transform_exp_martingale(base, 0.0, phi)
        assert np.all(y.values == 1.0)

    def test_transform_domain_violation(self):
        from crossbound import Bernstein
        phi = make_phi(Bernstein(1.0))
        base = generate(Brownian(0.05, 1.0), seed=2)
        with pytest.raises(DomainViolation):
            transform_exp_martingale(base, 3.5, phi)

    def test_brownian_exponential_is_mean_one(self):
        # E[exp(W_t - t/2)] = 1 at every checkpoint
        phi = make_phi(Gaussian(1.0))
        spec = ExpSupermartingale(Brownian(0.02, 1.0), s=1.0, phi=phi)
        n = 100_000
        cols = [10, 20, 30, 40, 50]
        acc = np.zeros((n, len(cols)))
        for i in range(n):
            y = generate(spec, seed=77, path_index=i)
            acc[i] = y.values[cols]
        for j in range(len(cols)):
            mean = acc[:, j].mean()
            se = acc[:, j].std(ddof=1) / math.sqrt(n)
            assert abs(mean - 1.0) <= 4.0 * se, (j, mean, se)

    def test_poisson_exponential_is_mean_one(self):
        lam = 1.0
        phi = make_phi(PoissonCentered(lam))
        s = math.log(2.0)
        horizon, n = 5.0, 50_000
        total = 0.0
        for i in range(n):
            base = generate(PoissonCounting(lam, horizon, centered=True),
                            seed=13, path_index=i)
            y = transform_exp_martingale(base, s, phi)
            total += y.values[-1]
        mean = total / n
        # terminal variance of exp(s X - phi(s) t): E Y^2 = exp((phi(2s)-2phi(s)) t)
        var = math.exp((2.0 * lam * (math.expm1(2 * s) - 2 * s) / 2
                        - 2 * lam * (math.expm1(s) - s)) * horizon) - 1.0
        se = math.sqrt(var / n)
        assert abs(mean - 1.0) <= 4.0 * se, (mean, se)


class TestMartingaleIncrements:
    def test_iid_and_brownian_mean_zero(self):
        n = 20_000
        for spec, cols in ((IidSum(UniformIncrements(), 100), (20, 80)),
                           (Brownian(0.01, 1.0), (30, 90))):
            t1, t2 = cols
            vals = np.empty(n)
            for i in range(n):
                p = generate(spec, seed=21, path_index=i)
                vals[i] = p.values[t2] - p.values[t1]
            se = vals.std(ddof=1) / math.sqrt(n)
            assert abs(vals.mean()) <= 4.0 * se

    def test_mgf_domination_of_increments(self):
        # E[exp(s (X_t2 - X_t1))] <= exp(phi(s) (V_t2 - V_t1)) + 4 se
        cases = [
            (IidSum(UniformIncrements(), 60), make_phi(Uniform24()), 2.0),
            (IidSum(BernoulliIncrements(0.3), 60),
             make_phi(__import__("crossbound").HoeffdingBernoulli(0.3)), 1.0),
            (Brownian(0.05, 3.0), make_phi(Gaussian(1.0)), 1.0),
        ]
        n = 20_000
        for spec, phi, s in cases:
            w = np.empty(n)
            for i in range(n):
                p = generate(spec, seed=33, path_index=i)
                t1, t2 = len(p.times) // 3, len(p.times) - 1
                dv = p.vproxy[t2] - p.vproxy[t1]
                w[i] = math.exp(s * (p.values[t2] - p.values[t1]))
            cap = math.exp(float(np.asarray(phi.phi(s))) * dv)
            se = w.std(ddof=1) / math.sqrt(n)
            assert w.mean() <= cap + 4.0 * se


class TestValidation:
    def test_invalid_specs(self):
        with pytest.raises(InvalidSpec):
            generate(IidSum(BernoulliIncrements(1.5), 10), seed=1)
        with pytest.raises(InvalidSpec):
            generate(LazyWalk(1.5, 10), seed=1)
        with pytest.raises(InvalidSpec):
            generate(PoissonCounting(0.0, 1.0), seed=1)
        with pytest.raises(InvalidSpec):
            generate(Brownian(0.0, 1.0), seed=1)

    def test_uniform_grid(self):
        t, v = uniform_grid(Brownian(0.25, 1.0))
        assert np.allclose(t, [0.0, 0.25, 0.5, 0.75, 1.0])
        assert np.allclose(v, t)
