"""Evaluators producing BoundReports for every supported maximal inequality.

Every evaluator returns the raw (unclamped) value alongside the [0, 1]-clamped
probability bound so that algebraic identity tests can compare exact
exponentials even when the display exceeds one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainViolation, InvalidParameter
from .mgf import MgfBound
from .optimize import minimize_tail_exponent, solve_slope_root

INEQUALITY_IDS = (
    "gen_line_upper", "gen_line_lower",
    "vee_upper", "vee_lower",
    "eta_ray_upper", "eta_ray_lower",
    "eta_vee_upper", "eta_vee_lower",
    "azuma_upper", "azuma_lower", "azuma_two_sided",
    "bennett_cbb", "bernstein_cbb", "chernoff_sub",
    "expfam_upper", "expfam_lower",
    "poisson_upper", "poisson_lower",
    "supermartingale_sup", "doob_exp",
)


@dataclass(frozen=True)
class BoundReport:
    """A computed bound: clamped value, raw value, optimizing s and slope."""

    inequality: str
    bound: float
    raw: float
    s_used: Optional[float]
    slope_used: Optional[float]
    params: dict = field(default_factory=dict)
    vacuous: bool = False
    exact: bool = False

    def to_dict(self) -> dict:
        return {
            "inequality": self.inequality,
            "bound": self.bound,
            "raw": self.raw,
            "s_used": self.s_used,
            "slope_used": self.slope_used,
            "params": self.params,
            "vacuous": self.vacuous,
            "exact": self.exact,
        }


def _exp(x: float) -> float:
    if x == -math.inf:
        return 0.0
    if x > 700.0:
        return math.inf
    return math.exp(x)


def _clamp(raw: float) -> float:
    return min(1.0, max(0.0, raw))


def _report(inequality, exponent, s_used, slope_used, params,
            vacuous=False, exact=False, factor=1.0) -> BoundReport:
    raw = factor * _exp(exponent)
    return BoundReport(inequality=inequality, bound=_clamp(raw), raw=raw,
                       s_used=s_used, slope_used=slope_used, params=params,
                       vacuous=vacuous, exact=exact)


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        if not (value > 0.0):
            raise DomainViolation(f"{name} must be positive, got {value}")


def _side_id(base: str, side: str) -> str:
    if side not in ("upper", "lower"):
        raise InvalidParameter(f"side must be 'upper' or 'lower', got {side!r}")
    return f"{base}_{side}"


def _phi_side(phi: MgfBound, s: float, side: str) -> float:
    return float(np.asarray(phi.phi(s if side == "upper" else -s)))


# ---------------------------------------------------------------------------
# Generic Chernoff-line bounds
# ---------------------------------------------------------------------------


def line_bound(phi: MgfBound, s: float, gamma: float, v_tau: float,
               side: str = "upper") -> BoundReport:
    """Fixed-s line bound  [exp(phi(+-s) - gamma s)]^{V_tau}.

    The continuation line past tau has slope phi(+-s)/s.
    """
    _check_positive(gamma=gamma, v_tau=v_tau)
    ineq = _side_id("gen_line", side)
    radius = phi.b if side == "upper" else phi.a
    if not (0.0 < s < radius):
        raise DomainViolation(
            f"s={s} outside the open interval (0, {radius}) for side={side}"
        )
    ph = _phi_side(phi, s, side)
    exponent = v_tau * (ph - gamma * s)
    return _report(ineq, exponent, s, ph / s,
                   {"gamma": gamma, "v_tau": v_tau, "s": s, **phi.describe()})


def optimized_line_bound(phi: MgfBound, gamma: float, v_tau: float,
                         side: str = "upper", tol: float = 1e-10) -> BoundReport:
    """Optimized line bound  inf_s [exp(phi(+-s) - gamma s)]^{V_tau}  with the
    continuation slope alpha(gamma) / beta(gamma) from the optimizer."""
    _check_positive(gamma=gamma, v_tau=v_tau)
    opt = minimize_tail_exponent(phi, gamma, side=side, tol=tol)
    exponent = v_tau * opt.value
    return _report(_side_id("gen_line", side), exponent, opt.s_opt, opt.slope,
                   {"gamma": gamma, "v_tau": v_tau, "location": opt.location,
                    **phi.describe()})


def vee_bound(phi: MgfBound, gamma: float, v_tau: float,
              side: str = "upper", tol: float = 1e-10) -> BoundReport:
    """Bound for crossing the envelope gamma (V_tau v V_t).

    Uses the infimum over (0, b*) (resp. (0, a*)) when phi(s)/|s| is monotone;
    otherwise falls back to the unrestricted infimum and flags it.  An empty
    feasible set {s : phi(+-s) <= gamma s} yields a vacuous bound of 1.
    """
    _check_positive(gamma=gamma, v_tau=v_tau)
    ineq = _side_id("vee", side)
    params = {"gamma": gamma, "v_tau": v_tau, **phi.describe()}
    opt = minimize_tail_exponent(phi, gamma, side=side, tol=tol)
    if opt.value >= 0.0:
        return _report(ineq, 0.0, None, None, params, vacuous=True)
    try:
        root = solve_slope_root(phi, gamma, side=side, tol=tol)
        params["s_star"] = root.s_root
        params["restricted"] = True
    except Exception:
        params["restricted"] = False
    exponent = v_tau * opt.value
    return _report(ineq, exponent, opt.s_opt, opt.slope, params)


def _sup_feasible(phi: MgfBound, gamma: float, side: str) -> float:
    """sup {s : phi(+-s) <= gamma s} without the monotonicity assumption."""
    g = (lambda s: float(np.asarray(phi.phi(s)))) if side == "upper" else (
        lambda s: float(np.asarray(phi.phi(-s))))
    radius = phi.b if side == "upper" else phi.a
    hi_probe = radius * (1.0 - 2.0 ** -40) if math.isfinite(radius) else 1e9
    pts = np.geomspace(1e-12, hi_probe, 400)
    feas = np.array([g(float(s)) <= gamma * s for s in pts])
    if not feas.any():
        return 0.0
    i = int(np.nonzero(feas)[0][-1])
    if i == pts.size - 1:
        return float(pts[-1]) if math.isfinite(radius) else math.inf
    lo, hi = float(pts[i]), float(pts[i + 1])
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if g(mid) <= gamma * mid:
            lo = mid
        else:
            hi = mid
    return lo


def eta_bound(phi: MgfBound, gamma: float, eta: float, v_tau: float = 0.0,
              side: str = "upper", variant: str = "ray",
              tol: float = 1e-10) -> BoundReport:
    """Bounds for the shifted events with intercept eta.

    variant="ray":  inf_{s in feasible} e^{-eta s} = e^{-eta sup feasible};
    v_tau is ignored.
    variant="vee":  inf_{s in feasible} e^{-eta s} [exp(phi(+-s) - gamma s)]^{V_tau}.
    Both return 1 (vacuous) when the feasible set is empty.
    """
    _check_positive(gamma=gamma)
    if eta < 0.0:
        raise InvalidParameter(f"eta must be nonnegative, got {eta}")
    if variant not in ("ray", "vee"):
        raise InvalidParameter(f"variant must be 'ray' or 'vee', got {variant!r}")
    ineq = _side_id("eta_ray" if variant == "ray" else "eta_vee", side)
    params = {"gamma": gamma, "eta": eta, **phi.describe()}
    if variant == "vee":
        params["v_tau"] = v_tau

    opt = minimize_tail_exponent(phi, gamma, side=side, tol=tol)
    if opt.value >= 0.0:
        return _report(ineq, 0.0, None, None, params, vacuous=True)

    try:
        root = solve_slope_root(phi, gamma, side=side, tol=tol)
        s_star = root.s_root
        params["restricted"] = True
    except Exception:
        s_star = _sup_feasible(phi, gamma, side)
        params["restricted"] = False
    params["s_star"] = s_star

    if variant == "ray":
        exponent = -eta * s_star if math.isfinite(s_star) else -math.inf
        if eta == 0.0:
            exponent = 0.0
        return _report(ineq, exponent, s_star, None, params)

    if v_tau < 0.0:
        raise InvalidParameter(f"v_tau must be nonnegative, got {v_tau}")
    if v_tau == 0.0:
        exponent = -eta * s_star if math.isfinite(s_star) else -math.inf
        return _report(ineq, exponent, s_star, None, params)
    shifted = minimize_tail_exponent(phi, gamma + eta / v_tau, side=side, tol=tol)
    s_c = min(shifted.s_opt, s_star)
    if not math.isfinite(s_c):
        return _report(ineq, -math.inf, s_c, None, params)
    ph = _phi_side(phi, s_c, side)
    exponent = -eta * s_c + v_tau * (ph - gamma * s_c)
    return _report(ineq, exponent, s_c, ph / s_c, params)


# ---------------------------------------------------------------------------
# Named classical bounds
# ---------------------------------------------------------------------------


def azuma_bound(gamma: float, v_tau: float, kind: str = "upper") -> BoundReport:
    """Hoeffding-Azuma envelope bound exp(-gamma^2 / (2 V_tau)).

    The crossed boundary is (gamma/2)(1 + V_t / V_tau); the two-sided variant
    doubles the raw value before clamping.
    """
    _check_positive(gamma=gamma, v_tau=v_tau)
    if kind not in ("upper", "lower", "two_sided"):
        raise InvalidParameter(f"kind must be upper|lower|two_sided, got {kind!r}")
    exponent = -gamma * gamma / (2.0 * v_tau)
    factor = 2.0 if kind == "two_sided" else 1.0
    params = {"gamma": gamma, "v_tau": v_tau,
              "envelope_intercept": gamma / 2.0,
              "envelope_slope": gamma / (2.0 * v_tau)}
    return _report(f"azuma_{kind}", exponent, gamma / v_tau, gamma / (2.0 * v_tau),
                   params, factor=factor)


def cbb_bounds(gamma: float, v_m: float, b: float,
               which: str = "bennett") -> BoundReport:
    """Bennett / Bernstein / sub-Gaussian Chernoff bounds for bounded-increment
    martingales with variance proxy V_m."""
    _check_positive(gamma=gamma, v_m=v_m, b=b)
    if which == "bennett":
        lg = math.log1p(b * gamma)
        exponent = v_m * (gamma / b - (1.0 + b * gamma) * lg / (b * b))
        slope = gamma / lg - 1.0 / b
        return _report("bennett_cbb", exponent, lg / b, slope,
                       {"gamma": gamma, "v_m": v_m, "b": b})
    if which == "bernstein":
        exponent = -gamma * gamma / (2.0 * (v_m + b * gamma / 3.0))
        params = {"gamma": gamma, "v_m": v_m, "b": b,
                  "envelope_intercept": gamma / 2.0,
                  "envelope_slope": gamma / (2.0 * v_m)}
        return _report("bernstein_cbb", exponent, 1.0 / (1.0 / gamma + b / 3.0),
                       None, params)
    if which == "chernoff_sub":
        if b != 1.0:
            raise DomainViolation("chernoff_sub requires b = 1")
        if gamma >= 3.5 * v_m:
            raise DomainViolation(
                f"chernoff_sub requires gamma < 3.5 V_m, got gamma={gamma}, V_m={v_m}"
            )
        exponent = -gamma * gamma / (4.0 * v_m)
        params = {"gamma": gamma, "v_m": v_m, "b": b,
                  "envelope_intercept": gamma / 2.0,
                  "envelope_slope": gamma / (2.0 * v_m)}
        return _report("chernoff_sub", exponent, gamma / (2.0 * v_m), None, params)
    raise InvalidParameter(f"which must be bennett|bernstein|chernoff_sub, got {which!r}")


# ---------------------------------------------------------------------------
# Exponential families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpFamily:
    """Natural-parameter description f(y; theta) = w(y) exp(u(theta) y - v(theta)).

    The defining hypothesis dv/dtheta = theta du/dtheta is verified numerically
    on a grid at construction; w is never needed by the computed bounds.
    """

    u: Callable[[float], float]
    v: Callable[[float], float]
    theta_lo: float
    theta_hi: float
    name: str = "custom"

    def __post_init__(self):
        if not self.theta_lo < self.theta_hi:
            raise InvalidParameter("need theta_lo < theta_hi")
        lo = self.theta_lo if math.isfinite(self.theta_lo) else -5.0
        hi = self.theta_hi if math.isfinite(self.theta_hi) else 5.0
        w = hi - lo
        grid = np.linspace(lo + 0.05 * w, hi - 0.05 * w, 15)
        for th in grid:
            h = 1e-5 * (1.0 + abs(th))
            if not (self.theta_lo < th - h and th + h < self.theta_hi):
                continue
            du = (self.u(th + h) - self.u(th - h)) / (2 * h)
            dv = (self.v(th + h) - self.v(th - h)) / (2 * h)
            if abs(dv - th * du) > 1e-6 * (1.0 + abs(th * du)):
                raise InvalidParameter(
                    f"family {self.name!r}: dv/dtheta != theta du/dtheta at "
                    f"theta={th:.6g} (dv={dv:.6g}, theta*du={th * du:.6g})"
                )

    def contains(self, theta: float) -> bool:
        return self.theta_lo < theta < self.theta_hi


def bernoulli_family() -> ExpFamily:
    """Bernoulli(theta) in natural form: u = logit, v = -ln(1 - theta)."""
    return ExpFamily(
        u=lambda t: math.log(t / (1.0 - t)),
        v=lambda t: -math.log(1.0 - t),
        theta_lo=0.0, theta_hi=1.0, name="bernoulli",
    )


def chernoff_factor(fam: ExpFamily, z: float, theta: float) -> float:
    """Per-sample factor M(z, theta) = exp(u(theta) z - v(theta)) / exp(u(z) z - v(z))."""
    return _exp(fam.v(z) - fam.v(theta) - z * (fam.u(z) - fam.u(theta)))


def rho_line(fam: ExpFamily, z: float, theta: float, m: int, n: float) -> float:
    """Stopping boundary rho(z, theta, m, n) = m z + (n - m)(v(z)-v(theta))/(u(z)-u(theta))."""
    slope = (fam.v(z) - fam.v(theta)) / (fam.u(z) - fam.u(theta))
    return m * z + (n - m) * slope


def expfam_bound(fam: ExpFamily, theta: float, gamma: float, m: int,
                 side: str = "upper") -> BoundReport:
    """Bound [M(theta +- gamma, theta)]^m for raw-sum crossings of the envelope
    theta n + gamma (n v m), plus the rho boundary-line coefficients in n."""
    ineq = _side_id("expfam", side)
    if not fam.contains(theta):
        raise DomainViolation(f"theta={theta} outside open domain of {fam.name}")
    if gamma < 0.0:
        raise InvalidParameter(f"gamma must be nonnegative, got {gamma}")
    if not (isinstance(m, (int, np.integer)) and m > 0):
        raise InvalidParameter(f"m must be a positive integer, got {m!r}")
    params = {"theta": theta, "gamma": gamma, "m": int(m), "family": fam.name}
    if gamma == 0.0:
        return _report(ineq, 0.0, None, None, params)
    z = theta + gamma if side == "upper" else theta - gamma
    if not fam.contains(z):
        raise DomainViolation(
            f"theta {'+' if side == 'upper' else '-'} gamma = {z} outside "
            f"open domain ({fam.theta_lo}, {fam.theta_hi}) of {fam.name}"
        )
    ln_m_factor = fam.v(z) - fam.v(theta) - z * (fam.u(z) - fam.u(theta))
    rho_slope = (fam.v(z) - fam.v(theta)) / (fam.u(z) - fam.u(theta))
    s_star = abs(fam.u(z) - fam.u(theta))
    params.update({"z": z, "rho_at_m": m * z, "rho_slope": rho_slope})
    # Continuation slope of the centered process X_n - n theta.
    centered_slope = rho_slope - theta if side == "upper" else theta - rho_slope
    return _report(ineq, m * ln_m_factor, s_star, centered_slope, params)


# ---------------------------------------------------------------------------
# Poisson process bounds
# ---------------------------------------------------------------------------


def poisson_bounds(lam: float, gamma: float, tau: float,
                   side: str = "upper") -> BoundReport:
    """Crossing bounds for a Poisson counting path against its tilted lines:
    [(lam/(lam+gamma))^{lam+gamma} e^gamma]^tau and the lower-side twin."""
    _check_positive(lam=lam, gamma=gamma, tau=tau)
    ineq = _side_id("poisson", side)
    params = {"lam": lam, "gamma": gamma, "tau": tau}
    if side == "upper":
        lg = math.log1p(gamma / lam)
        exponent = tau * (gamma - (lam + gamma) * lg)
        slope = gamma / lg
        params["centered_slope"] = slope - lam
        return _report(ineq, exponent, lg, slope, params)
    if gamma >= lam:
        raise DomainViolation(
            f"lower side requires gamma < lam, got gamma={gamma}, lam={lam}"
        )
    lg = math.log(1.0 - gamma / lam)  # negative
    exponent = tau * ((lam - gamma) * math.log(lam / (lam - gamma)) - gamma)
    slope = gamma / lg
    params["centered_slope"] = lam + slope  # alpha(gamma) of the centered path
    return _report(ineq, exponent, -lg, slope, params)


# ---------------------------------------------------------------------------
# Supremum bounds for nonnegative supermartingales
# ---------------------------------------------------------------------------


def supermartingale_sup_bound(mean0: float, c: float, gamma: float,
                              continuous_martingale: bool = False) -> BoundReport:
    """P{sup X_t >= gamma} <= (E[X_0] - c)/(gamma - c) for a nonnegative
    right-continuous supermartingale converging to c; an equality (and 1 for
    gamma <= E[X_0]) when the caller asserts the continuous-martingale case."""
    if not (0.0 <= c <= mean0):
        raise InvalidParameter(f"need 0 <= c <= mean0, got c={c}, mean0={mean0}")
    if not (gamma > c):
        raise DomainViolation(f"gamma must exceed c, got gamma={gamma}, c={c}")
    raw = (mean0 - c) / (gamma - c)
    return BoundReport(
        inequality="supermartingale_sup", bound=_clamp(raw), raw=raw,
        s_used=None, slope_used=None,
        params={"mean0": mean0, "c": c, "gamma": gamma},
        exact=continuous_martingale,
    )


def doob_exp_bound(gamma: float, phi: Optional[MgfBound] = None) -> BoundReport:
    """P{sup Y_t >= gamma} <= 1/gamma for the exponential supermartingale Y;
    an equality for gamma >= 1 when phi is an exact log-MGF on a continuous
    process."""
    _check_positive(gamma=gamma)
    raw = 1.0 / gamma
    exact = bool(gamma >= 1.0 and phi is not None and phi.claims_equality)
    params = {"gamma": gamma}
    if phi is not None:
        params.update(phi.describe())
    return BoundReport(inequality="doob_exp", bound=_clamp(raw), raw=raw,
                       s_used=None, slope_used=None, params=params, exact=exact)
