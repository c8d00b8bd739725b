"""One-dimensional minimization and root finding on phi-derived objectives.

The two consumers are the tail-exponent infimum  inf_{s in (0, R)} phi(+-s) - gamma s
and the largest usable s on a side, i.e. the domain edge or the root of
phi(+-s)/s = gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .errors import (
    DomainViolation,
    InvalidParameter,
    MonotonicityViolation,
    NotUnimodal,
    UnsupportedSide,
)
from .mgf import MgfBound

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_S_CAP = 1e9  # doubling limit for unbounded domains


@dataclass(frozen=True)
class OptResult:
    """Outcome of minimizing phi(+-s) - gamma s over one side of the domain.

    ``location`` is "interior" (minimum attained), "boundary" (infimum at the
    domain edge, possibly at infinity) or "origin" (no decrease: the infimum
    is 0 at s -> 0+, a signal rather than a failure).
    """

    s_opt: float
    value: float
    slope: float
    attained: bool
    location: str
    side: str


@dataclass(frozen=True)
class SlopeRoot:
    """Largest usable s on a side: interior root of phi(+-s)/s = gamma or the edge."""

    s_root: float
    side: str
    is_boundary: bool
    empty: bool = False


def _side_objective(phi: MgfBound, side: str) -> Tuple[Callable[[float], float], float]:
    if side == "upper":
        return (lambda s: float(np.asarray(phi.phi(s)))), phi.b
    if side == "lower":
        if not phi.lower_tail_supported:
            raise UnsupportedSide(
                f"{phi.label} is defined for upper-tail use only"
            )
        return (lambda s: float(np.asarray(phi.phi(-s)))), phi.a
    raise InvalidParameter(f"side must be 'upper' or 'lower', got {side!r}")


def golden_or_bisect_min(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10
) -> Tuple[float, float]:
    """Golden-section minimum of a unimodal scalar function on [lo, hi].

    Returns (x, f(x)) with |x - argmin| <= tol.  A coarse probe pass afterward
    raises NotUnimodal if an interior point beats the returned minimum, which
    is best-effort detection only.
    """
    if not lo < hi:
        raise InvalidParameter(f"need lo < hi, got [{lo}, {hi}]")
    if tol <= 0:
        raise InvalidParameter("tol must be positive")
    a, b = float(lo), float(hi)
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while (b - a) > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    x, fx = (x1, f1) if f1 <= f2 else (x2, f2)
    probes = np.linspace(lo, hi, 33)[1:-1]
    fvals = [f(float(p)) for p in probes]
    best = min(fvals)
    if best < fx - 1e-9 * (1.0 + abs(fx)):
        raise NotUnimodal(
            f"probe found f={best!r} below returned minimum {fx!r}"
        )
    return x, fx


def _refine_by_derivative(phi: MgfBound, gamma: float, side: str,
                          s0: float, lo: float, hi: float) -> float:
    """Polish a convex minimizer by bisecting h'(s) = +-phi'(+-s) - gamma.

    Golden section resolves the argmin only to ~sqrt(eps); bisection on the
    monotone derivative recovers full precision.  Converges to the left edge
    of a flat-bottom zero set, i.e. the smallest minimizer.
    """
    sign = 1.0 if side == "upper" else -1.0
    if phi.phi_deriv is not None:
        dh = lambda s: sign * float(np.asarray(phi.phi_deriv(sign * s))) - gamma
    else:
        def dh(s, _p=phi.phi):
            step = 6e-6 * (1.0 + abs(s))
            return (float(np.asarray(_p(sign * (s + step)))) -
                    float(np.asarray(_p(sign * (s - step))))) / (2.0 * step) * sign - gamma
    w = 1e-7 * (1.0 + abs(s0))
    a = max(lo, s0 - w)
    b = min(hi, s0 + w)
    for _ in range(60):
        if dh(a) < 0.0:
            break
        w *= 4.0
        a = max(lo, s0 - w)
        if a == lo:
            break
    for _ in range(60):
        if dh(b) > 0.0:
            break
        w *= 4.0
        b = min(hi, s0 + w)
        if b == hi:
            break
    if not (dh(a) < 0.0 <= dh(b)):
        return s0
    for _ in range(200):
        mid = 0.5 * (a + b)
        if dh(mid) < 0.0:
            a = mid
        else:
            b = mid
        if b - a <= 1e-15 * max(1.0, a):
            break
    return 0.5 * (a + b)


def _limit_ratio_at_edge(g: Callable[[float], float], radius: float) -> float:
    """Richardson-extrapolated lim_{s -> radius-} g(s)/s on s = radius (1 - 2^-k)."""
    ks = np.arange(20, 45)
    vals = []
    for k in ks:
        s = radius * (1.0 - 2.0 ** -float(k))
        vals.append(g(s) / s)
    r_prev, r_last = vals[-2], vals[-1]
    return r_last + (r_last - r_prev)


def _limit_ratio_at_infinity(g: Callable[[float], float]) -> float:
    """lim_{s -> inf} g(s)/s estimated along doubling s (may be +inf)."""
    with np.errstate(over="ignore", invalid="ignore"):
        s = 1.0
        prev = g(s) / s
        while s < 1e12:
            s *= 2.0
            cur = g(s) / s
            if abs(cur - prev) <= 1e-12 * (1.0 + abs(cur)):
                return cur
            prev = cur
        return prev


def _limit_value_at_infinity(h: Callable[[float], float]) -> float:
    """Asymptote of a decreasing objective along doubling s, or -inf when it
    keeps falling without leveling off."""
    with np.errstate(over="ignore", invalid="ignore"):
        s = 1.0
        prev = h(s)
        while s < 1e15:
            s *= 2.0
            cur = h(s)
            if not math.isfinite(cur):
                return -math.inf if cur == -math.inf else prev
            if abs(cur - prev) <= 1e-10 * (1.0 + abs(cur)):
                return cur
            prev = cur
        return -math.inf


def minimize_tail_exponent(
    phi: MgfBound, gamma: float, side: str = "upper", tol: float = 1e-10
) -> OptResult:
    """Minimize phi(+-s) - gamma s over the open interval (0, domain radius).

    Returns the interior minimizer when one exists; otherwise marks a boundary
    infimum and reports the edge limit of phi(s)/s found by extrapolation, or
    the origin signal when phi(s) >= gamma s throughout the probe grid.
    """
    if not (gamma > 0.0):
        raise DomainViolation(f"gamma must be positive, got {gamma}")
    if tol <= 0:
        raise InvalidParameter("tol must be positive")
    g, radius = _side_objective(phi, side)
    h = lambda s: g(s) - gamma * s

    finite = math.isfinite(radius)
    # Decrease probe: log-spaced grid plus the small-s heuristic point used to
    # proxy the "phi < gamma |s| near 0" hypothesis.
    s_heur = 1e-6 * min(1.0, radius if finite else 1.0)
    if finite:
        probes = np.unique(np.concatenate([
            np.geomspace(radius * 1e-9, radius * 0.5, 40),
            radius * (1.0 - 2.0 ** -np.arange(1, 31, dtype=float)),
            [s_heur],
        ]))
    else:
        probes = np.unique(np.concatenate([np.geomspace(1e-9, _S_CAP, 80),
                                           [s_heur]]))
    with np.errstate(over="ignore", invalid="ignore"):
        hv = np.array([h(float(s)) for s in probes])
    hv = np.where(np.isnan(hv), np.inf, hv)
    if np.all(hv >= -1e-13 * (1.0 + np.abs(hv))):
        slope0 = g(s_heur) / s_heur
        return OptResult(s_opt=0.0, value=0.0, slope=slope0,
                         attained=False, location="origin", side=side)

    if not finite:
        # Convex objective with a decrease: double until the slope turns up.
        s = max(1.0, float(probes[int(np.argmin(hv))]))
        while h(2.0 * s) <= h(s):
            s *= 2.0
            if s > _S_CAP:
                slope_limit = _limit_ratio_at_infinity(g)
                value = _limit_value_at_infinity(h)
                return OptResult(s_opt=math.inf, value=min(value, 0.0),
                                 slope=slope_limit, attained=False,
                                 location="boundary", side=side)
        lo_b, hi_b = 0.0, 2.0 * s
    else:
        # Refine toward the edge; if the argmin hugs it for three rounds the
        # infimum is at the boundary.
        edge_round = 0
        kmax = 30
        grid = probes  # already sorted and unique
        gv = hv
        while True:
            i = int(np.argmin(gv))
            if i < grid.size - 1:
                break
            edge_round += 1
            if edge_round >= 3:
                slope_limit = _limit_ratio_at_edge(g, radius)
                value = radius * (slope_limit - gamma)
                return OptResult(s_opt=radius, value=min(value, 0.0),
                                 slope=slope_limit, attained=False,
                                 location="boundary", side=side)
            kmax += 10
            extra = radius * (1.0 - 2.0 ** -np.arange(kmax - 10, kmax, dtype=float))
            grid = np.concatenate([grid, extra])
            gv = np.concatenate([gv, [h(float(s)) for s in extra]])
        lo_b = grid[i - 1] if i > 0 else 0.0
        hi_b = grid[i + 1]

    lo_b = max(lo_b, tol * 1e-3)
    s_opt, value = golden_or_bisect_min(h, lo_b, hi_b, tol=max(tol, 1e-10))
    s_opt = _refine_by_derivative(phi, gamma, side, s_opt, lo_b, hi_b)
    value = h(s_opt)
    return OptResult(s_opt=s_opt, value=min(value, 0.0), slope=g(s_opt) / s_opt,
                     attained=True, location="interior", side=side)


def solve_slope_root(
    phi: MgfBound, gamma: float, side: str = "upper", tol: float = 1e-10
) -> SlopeRoot:
    """Find b* (or a*): the domain edge if lim phi(s)/s <= gamma, else the
    unique interior root of phi(+-s)/s = gamma, located by bisection.

    Requires phi(+-s)/s to be monotone increasing on the side, checked on a
    probe grid; a decreasing stretch raises MonotonicityViolation.
    """
    if not (gamma > 0.0):
        raise DomainViolation(f"gamma must be positive, got {gamma}")
    g, radius = _side_objective(phi, side)
    r = lambda s: g(s) / s

    finite = math.isfinite(radius)
    hi_probe = radius * (1.0 - 2.0 ** -40) if finite else 1e9
    pts = np.geomspace(max(1e-12, hi_probe * 1e-12), hi_probe, 60)
    with np.errstate(over="ignore", invalid="ignore"):
        rv = np.array([r(float(s)) for s in pts])
    keep = np.isfinite(rv)
    pts, rv = pts[keep], rv[keep]
    drops = np.nonzero(np.diff(rv) < -1e-9 * (1.0 + np.abs(rv[1:])))[0]
    if drops.size:
        s_bad = float(pts[drops[0] + 1])
        raise MonotonicityViolation(
            f"phi(s)/s decreases near s={s_bad:g} on the {side} side"
        )

    if finite:
        if _limit_ratio_at_edge(g, radius) <= gamma:
            return SlopeRoot(s_root=radius, side=side, is_boundary=True)
        hi = hi_probe
        while r(hi) <= gamma:  # push the bracket into the unchecked sliver
            hi = radius - (radius - hi) / 2.0
    else:
        hi = 1.0
        with np.errstate(over="ignore", invalid="ignore"):
            while r(hi) <= gamma:
                hi *= 2.0
                if hi > 1e12:
                    return SlopeRoot(s_root=math.inf, side=side, is_boundary=True)
    lo = min(1e-9, hi * 1e-9)
    if r(lo) >= gamma:
        # phi(s)/s already above gamma arbitrarily close to 0: empty side set.
        return SlopeRoot(s_root=0.0, side=side, is_boundary=False, empty=True)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if r(mid) > gamma:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol * max(1.0, lo):
            break
    return SlopeRoot(s_root=0.5 * (lo + hi), side=side, is_boundary=False)
