import math

import numpy as np
import pytest

from crossbound import (
    Bennett,
    Bernstein,
    CbbExp,
    Custom,
    DomainViolation,
    Gaussian,
    HoeffdingBernoulli,
    MonotonicityViolation,
    NotUnimodal,
    PoissonCentered,
    Uniform24,
    UnsupportedSide,
    golden_or_bisect_min,
    make_phi,
    minimize_tail_exponent,
    solve_slope_root,
)

# independent oracle (bisection on e^s - 1 - 2s, frozen before the build)
CBB_ROOT_G1 = 1.2564312086261697


class TestGoldenMin:
    def test_quadratic_vertex(self):
        x, fx = golden_or_bisect_min(lambda s: (s - 1.0) ** 2, 0.0, 3.0, tol=1e-8)
        assert x == pytest.approx(1.0, abs=1e-7)
        assert fx == pytest.approx(0.0, abs=1e-12)

    def test_calculus_oracle(self):
        x, fx = golden_or_bisect_min(lambda s: s * s / 2.0 - 2.0 * s, 0.0, 10.0)
        assert x == pytest.approx(2.0, abs=1e-6)
        assert fx == pytest.approx(-2.0, abs=1e-12)

    def test_exp_root(self):
        x, _ = golden_or_bisect_min(lambda s: math.exp(s) - 1.0 - 2.0 * s, 0.0, 5.0)
        assert x == pytest.approx(math.log(2.0), abs=1e-6)

    def test_not_unimodal_detected(self):
        with pytest.raises(NotUnimodal):
            golden_or_bisect_min(lambda s: math.cos(3.0 * s) - 0.3 * s, 0.0, 4.0)


class TestMinimizeTailExponent:
    def test_gaussian_example(self):
        r = minimize_tail_exponent(make_phi(Gaussian(1.0)), 2.0)
        assert r.attained and r.location == "interior"
        assert r.s_opt == pytest.approx(2.0, abs=1e-10)
        assert r.value == pytest.approx(-2.0, abs=1e-12)
        assert r.slope == pytest.approx(1.0, abs=1e-10)

    def test_cbb_exp_example(self):
        r = minimize_tail_exponent(make_phi(CbbExp(1.0)), 1.0)
        assert r.s_opt == pytest.approx(math.log(2.0), abs=1e-10)
        assert r.value == pytest.approx(1.0 - 2.0 * math.log(2.0), rel=1e-12)

    def test_poisson_example(self):
        r = minimize_tail_exponent(make_phi(PoissonCentered(1.0)), 1.0)
        assert r.s_opt == pytest.approx(math.log(2.0), abs=1e-10)
        assert r.slope == pytest.approx(1.0 / math.log(2.0) - 1.0, rel=1e-10)

    def test_origin_signal(self):
        phi = make_phi(Custom(phi=lambda s: 2.0 * np.abs(s), a=10.0, b=10.0))
        r = minimize_tail_exponent(phi, 1.0)
        assert r.location == "origin"
        assert r.value == 0.0 and r.s_opt == 0.0
        assert not r.attained

    def test_boundary_finite_radius(self):
        phi = make_phi(Custom(phi=lambda s: np.abs(s), a=1.0, b=1.0))
        r = minimize_tail_exponent(phi, 2.0)
        assert r.location == "boundary"
        assert r.s_opt == pytest.approx(1.0)
        assert r.value == pytest.approx(-1.0, rel=1e-6)
        assert r.slope == pytest.approx(1.0, rel=1e-6)

    def test_boundary_infinite_radius(self):
        phi = make_phi(Custom(phi=lambda s: np.abs(s), a=math.inf, b=math.inf))
        r = minimize_tail_exponent(phi, 2.0)
        assert r.location == "boundary"
        assert r.s_opt == math.inf
        assert r.value == -math.inf

    def test_bernstein_lower_rejected(self):
        with pytest.raises(UnsupportedSide):
            minimize_tail_exponent(make_phi(Bernstein(1.0)), 1.0, side="lower")

    def test_gamma_validation(self):
        with pytest.raises(DomainViolation):
            minimize_tail_exponent(make_phi(Gaussian(1.0)), 0.0)

    @pytest.mark.parametrize("kind", [Gaussian(1.0), Uniform24(), CbbExp(1.0),
                                      PoissonCentered(2.0),
                                      HoeffdingBernoulli(0.3),
                                      Bernstein(1.0)],
                             ids=lambda k: type(k).__name__)
    def test_global_domination_and_slope_sandwich(self, kind):
        phi = make_phi(kind)
        rng = np.random.default_rng(12)
        for gamma in np.geomspace(1e-2, 1e2, 9):
            r = minimize_tail_exponent(phi, float(gamma))
            if not r.attained:
                continue
            assert 0.0 < r.slope < gamma
            s = rng.uniform(1e-6, min(phi.b * (1.0 - 1e-9), 50.0), size=1000)
            h = np.asarray(phi.phi(s)) - gamma * s
            assert r.value <= h.min() + 1e-12 * (1.0 + abs(r.value))

    def test_bennett_lower_side_cases(self):
        from crossbound import Bennett
        phi = make_phi(Bennett(1.0, 2.0))  # phi(-s)/s -> sigma2/b = 0.5
        interior = minimize_tail_exponent(phi, 0.4, side="lower")
        assert interior.attained and 0.0 < interior.slope < 0.4
        knife = minimize_tail_exponent(phi, 0.5, side="lower")
        assert knife.location == "boundary"
        assert knife.value == pytest.approx(math.log(0.8), rel=1e-9)
        steep = minimize_tail_exponent(phi, 0.7, side="lower")
        assert steep.location == "boundary" and steep.value == -math.inf

    def test_consistency_against_grid(self):
        phi = make_phi(CbbExp(1.0))
        for gamma in (0.3, 1.0, 4.0):
            r = minimize_tail_exponent(phi, gamma)
            s = np.linspace(1e-9, 4.0 * r.s_opt, 100_000)
            grid_min = float(np.exp(np.asarray(phi.phi(s)) - gamma * s).min())
            assert math.exp(r.value) == pytest.approx(grid_min, rel=1e-6)

    def test_interior_value_matches_objective(self):
        phi = make_phi(PoissonCentered(1.5))
        r = minimize_tail_exponent(phi, 0.7)
        direct = float(np.asarray(phi.phi(r.s_opt))) - 0.7 * r.s_opt
        assert r.value == pytest.approx(direct, rel=1e-10)


class TestSlopeRoot:
    def test_gaussian_closed_form(self):
        r = solve_slope_root(make_phi(Gaussian(1.0)), 3.0)
        assert not r.is_boundary
        assert r.s_root == pytest.approx(6.0, rel=1e-9)

    def test_cbb_exp_oracle(self):
        r = solve_slope_root(make_phi(CbbExp(1.0)), 1.0)
        assert r.s_root == pytest.approx(CBB_ROOT_G1, abs=1e-9)

    def test_bernstein_pole(self):
        r = solve_slope_root(make_phi(Bernstein(1.0)), 1e6)
        assert r.s_root < 3.0

    def test_boundary_when_limit_below_gamma(self):
        phi = make_phi(Custom(phi=lambda s: np.square(s) / 2.0, a=1.0, b=1.0))
        r = solve_slope_root(phi, 5.0)
        assert r.is_boundary and r.s_root == pytest.approx(1.0)

    def test_infinite_boundary(self):
        # Bennett ratio tends to b; any gamma >= b leaves the boundary at inf
        from crossbound import Bennett
        r = solve_slope_root(make_phi(Bennett(1.0, 2.0)), 3.0)
        assert r.is_boundary and r.s_root == math.inf

    def test_root_satisfies_equation(self):
        for kind, gamma in ((CbbExp(0.5), 2.0), (PoissonCentered(1.0), 3.0),
                            (Gaussian(2.0), 1.3)):
            phi = make_phi(kind)
            r = solve_slope_root(phi, gamma)
            ratio = float(np.asarray(phi.phi(r.s_root))) / r.s_root
            assert ratio == pytest.approx(gamma, rel=1e-8)

    def test_monotonicity_violation(self):
        phi = make_phi(Custom(
            phi=lambda s: np.abs(s) * (2.0 + np.sin(5.0 * s)), a=20.0, b=20.0))
        with pytest.raises(MonotonicityViolation):
            solve_slope_root(phi, 2.0)

    def test_empty_feasible_set(self):
        phi = make_phi(Custom(phi=lambda s: 2.0 * np.abs(s), a=10.0, b=10.0))
        r = solve_slope_root(phi, 1.0)
        assert r.empty

    def test_gamma_validation(self):
        with pytest.raises(DomainViolation):
            solve_slope_root(make_phi(Gaussian(1.0)), -1.0)
