"""Catalog of log-MGF upper bounds ("phi functions") and validity diagnostics.

Each entry supplies a function phi(s) with phi(0) = 0, phi >= 0 and phi convex
on an open interval (-a, b), such that increments Y of the paired process
satisfy  E[exp(s (Y - mu))] <= exp(phi(s) * dV)  per unit of variance proxy dV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import DomainViolation, InvalidParameter

INF = math.inf


# ---------------------------------------------------------------------------
# phi-kind descriptors (serializable parameter records)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Gaussian:
    """phi(s) = v s^2 / 2; exact log-MGF of a centered normal with variance v."""

    v: float = 1.0


@dataclass(frozen=True)
class Bennett:
    """Two-point MGF bound for a centered variable with E[Y^2] = sigma2, Y <= b."""

    sigma2: float
    b: float


@dataclass(frozen=True)
class HoeffdingBernoulli:
    """phi(s) = ln(1 - mu + mu e^s) - mu s for variables in [0, 1] with mean mu."""

    mu: float


@dataclass(frozen=True)
class Uniform24:
    """phi(s) = s^2 / 24, dominating the MGF of Uniform(-1/2, 1/2)."""


@dataclass(frozen=True)
class PoissonCentered:
    """phi(s) = lam (e^s - 1 - s); exact log-MGF of a centered Poisson count."""

    lam: float


@dataclass(frozen=True)
class Bernstein:
    """phi(s) = s^2 / (2 (1 - b s / 3)) on (0, 3/b); upper tail only."""

    b: float


@dataclass(frozen=True)
class CbbExp:
    """phi(s) = (e^{sb} - 1 - sb) / b^2 for martingale differences <= b."""

    b: float


@dataclass(frozen=True)
class Custom:
    """User-supplied phi with an explicit open domain (-a, b)."""

    phi: Callable[[np.ndarray], np.ndarray]
    a: float = INF
    b: float = INF
    phi_deriv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    claims_equality: bool = False
    label: str = "custom"


PhiKind = Union[
    Gaussian, Bennett, HoeffdingBernoulli, Uniform24, PoissonCentered,
    Bernstein, CbbExp, Custom,
]


# ---------------------------------------------------------------------------
# MgfBound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MgfBound:
    """A phi function together with its open domain (-a, b) and validity flags.

    ``phi`` accepts scalars or numpy arrays and is not domain-checked; use
    :meth:`evaluate` for checked evaluation.  Instances are immutable and safe
    to share across workers.
    """

    a: float
    b: float
    phi: Callable[[np.ndarray], np.ndarray]
    phi_deriv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    claims_equality: bool = False
    lower_tail_supported: bool = True
    label: str = "custom"
    kind: Optional[PhiKind] = field(default=None, repr=False)

    def contains(self, s) -> bool:
        s = np.asarray(s, dtype=float)
        return bool(np.all(s > -self.a) and np.all(s < self.b))

    def evaluate(self, s):
        """Evaluate phi(s), raising DomainViolation outside the open domain."""
        if not self.contains(s):
            raise DomainViolation(
                f"s={s!r} outside open domain (-{self.a}, {self.b}) of {self.label}"
            )
        return self.phi(s)

    def describe(self) -> dict:
        """Serializable parameter echo for reports."""
        rec = {"phi": self.label, "a": self.a, "b": self.b}
        if self.kind is not None and not isinstance(self.kind, Custom):
            rec.update(phi_kind_to_dict(self.kind))
        return rec


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0.0) or not math.isfinite(value):
        raise InvalidParameter(f"{name} must be a positive finite number, got {value}")
    return value


def make_phi(kind: PhiKind) -> MgfBound:
    """Build the MgfBound for a catalog entry, validating its parameters."""
    if isinstance(kind, Gaussian):
        v = _positive("v", kind.v)
        return MgfBound(
            a=INF, b=INF,
            phi=lambda s, v=v: 0.5 * v * np.square(s),
            phi_deriv=lambda s, v=v: v * np.asarray(s, dtype=float),
            claims_equality=True,
            label="gaussian", kind=kind,
        )
    if isinstance(kind, Bennett):
        sigma2 = _positive("sigma2", kind.sigma2)
        b = _positive("b", kind.b)
        wb = b * b / (b * b + sigma2)
        ws = sigma2 / (b * b + sigma2)
        r = sigma2 / b

        def phi(s, wb=wb, ws=ws, r=r, b=b):
            s = np.asarray(s, dtype=float)
            # log-sum-exp for numerical stability at large |s|
            e1 = -r * s + np.log(wb)
            e2 = b * s + np.log(ws)
            m = np.maximum(e1, e2)
            return m + np.log(np.exp(e1 - m) + np.exp(e2 - m))

        def phi_deriv(s, wb=wb, ws=ws, r=r, b=b):
            s = np.asarray(s, dtype=float)
            e1 = -r * s + np.log(wb)
            e2 = b * s + np.log(ws)
            m = np.maximum(e1, e2)
            p1 = np.exp(e1 - m)
            p2 = np.exp(e2 - m)
            return (-r * p1 + b * p2) / (p1 + p2)

        return MgfBound(a=INF, b=INF, phi=phi, phi_deriv=phi_deriv,
                        label="bennett", kind=kind)
    if isinstance(kind, HoeffdingBernoulli):
        mu = float(kind.mu)
        if not (0.0 < mu < 1.0):
            raise InvalidParameter(f"mu must lie in (0, 1), got {mu}")

        def phi(s, mu=mu):
            s = np.asarray(s, dtype=float)
            # ln(1 - mu + mu e^s) - mu s, stable for large positive s
            return np.logaddexp(np.log(1.0 - mu), np.log(mu) + s) - mu * s

        def phi_deriv(s, mu=mu):
            s = np.asarray(s, dtype=float)
            w = np.exp(np.log(mu) + s - np.logaddexp(np.log(1.0 - mu), np.log(mu) + s))
            return w - mu

        return MgfBound(a=INF, b=INF, phi=phi, phi_deriv=phi_deriv,
                        label="hoeffding_bernoulli", kind=kind)
    if isinstance(kind, Uniform24):
        return MgfBound(
            a=INF, b=INF,
            phi=lambda s: np.square(s) / 24.0,
            phi_deriv=lambda s: np.asarray(s, dtype=float) / 12.0,
            label="uniform24", kind=kind,
        )
    if isinstance(kind, PoissonCentered):
        lam = _positive("lam", kind.lam)
        return MgfBound(
            a=INF, b=INF,
            phi=lambda s, lam=lam: lam * (np.expm1(s) - np.asarray(s, dtype=float)),
            phi_deriv=lambda s, lam=lam: lam * np.expm1(s),
            claims_equality=True,
            label="poisson_centered", kind=kind,
        )
    if isinstance(kind, Bernstein):
        b = _positive("b", kind.b)

        def phi(s, b=b):
            s = np.asarray(s, dtype=float)
            return np.square(s) / (2.0 * (1.0 - b * s / 3.0))

        def phi_deriv(s, b=b):
            s = np.asarray(s, dtype=float)
            d = 1.0 - b * s / 3.0
            return s * (2.0 - b * s / 3.0) / (2.0 * d * d)

        # Pole at s = 3/b limits the upper domain; the negative branch is not
        # defined by the source inequality, so lower-tail use is rejected.
        return MgfBound(a=INF, b=3.0 / b, phi=phi, phi_deriv=phi_deriv,
                        lower_tail_supported=False, label="bernstein", kind=kind)
    if isinstance(kind, CbbExp):
        b = _positive("b", kind.b)

        def phi(s, b=b):
            s = np.asarray(s, dtype=float)
            return (np.expm1(b * s) - b * s) / (b * b)

        def phi_deriv(s, b=b):
            s = np.asarray(s, dtype=float)
            return np.expm1(b * s) / b

        return MgfBound(a=INF, b=INF, phi=phi, phi_deriv=phi_deriv,
                        label="cbb_exp", kind=kind)
    if isinstance(kind, Custom):
        a = float(kind.a)
        b = float(kind.b)
        if not (a > 0.0 and b > 0.0):
            raise InvalidParameter("custom domain radii a, b must be positive")
        return MgfBound(a=a, b=b, phi=kind.phi, phi_deriv=kind.phi_deriv,
                        claims_equality=kind.claims_equality,
                        label=kind.label, kind=kind)
    raise InvalidParameter(f"unknown phi kind: {kind!r}")


# ---------------------------------------------------------------------------
# CLI serialization of phi kinds
# ---------------------------------------------------------------------------

_KIND_TAGS = {
    "gaussian": Gaussian,
    "bennett": Bennett,
    "hoeffding_bernoulli": HoeffdingBernoulli,
    "uniform24": Uniform24,
    "poisson_centered": PoissonCentered,
    "bernstein": Bernstein,
    "cbb_exp": CbbExp,
}


def phi_kind_to_dict(kind: PhiKind) -> dict:
    for tag, cls in _KIND_TAGS.items():
        if isinstance(kind, cls):
            rec = {"kind": tag}
            for name in getattr(cls, "__dataclass_fields__", {}):
                rec[name] = getattr(kind, name)
            return rec
    raise InvalidParameter(f"phi kind {kind!r} is not serializable")


def phi_kind_from_dict(rec: dict) -> PhiKind:
    rec = dict(rec)
    tag = rec.pop("kind", None)
    cls = _KIND_TAGS.get(tag)
    if cls is None:
        raise InvalidParameter(f"unknown phi kind tag {tag!r}")
    try:
        return cls(**rec)
    except TypeError as exc:
        raise InvalidParameter(f"bad parameters for phi kind {tag!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# Validity diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiViolation:
    check: str
    s: float
    detail: str


@dataclass(frozen=True)
class DiagnosticReport:
    violations: tuple

    @property
    def ok(self) -> bool:
        return len(self.violations) == 0


CONVEXITY_SLACK = 1e-12


def check_phi_validity(phi: MgfBound, grid: Sequence[float]) -> DiagnosticReport:
    """Run the runtime invariants of a phi function on a grid of s values.

    Checks phi(0) = 0, nonnegativity, convexity (midpoint test with slack
    1e-12 * (1 + |phi|)), and, when an analytic derivative is attached,
    agreement with central finite differences to 1e-6 relative.
    """
    grid = np.asarray(sorted(float(s) for s in grid), dtype=float)
    if grid.size and not phi.contains(grid):
        raise DomainViolation(
            f"grid extends outside the open domain (-{phi.a}, {phi.b})"
        )
    out = []

    z = float(np.asarray(phi.phi(0.0)))
    if abs(z) > 1e-12:
        out.append(PhiViolation("zero_at_origin", 0.0, f"phi(0) = {z!r}"))

    vals = np.asarray(phi.phi(grid), dtype=float)
    for s, v in zip(grid, vals):
        if v < -1e-12 * (1.0 + abs(v)):
            out.append(PhiViolation("nonnegative", float(s), f"phi({s}) = {v!r}"))

    n = grid.size
    for i in range(n):
        for j in range(i + 1, n):
            mid = 0.5 * (grid[i] + grid[j])
            fm = float(np.asarray(phi.phi(mid)))
            avg = 0.5 * (vals[i] + vals[j])
            if fm > avg + CONVEXITY_SLACK * (1.0 + abs(fm)):
                out.append(PhiViolation(
                    "convexity", float(mid),
                    f"phi(mid)={fm!r} > chord {avg!r} for [{grid[i]}, {grid[j]}]",
                ))

    if phi.phi_deriv is not None:
        for s in grid:
            h = 1e-6 * (1.0 + abs(s))
            if not (phi.contains(s - h) and phi.contains(s + h)):
                continue
            fd = (float(np.asarray(phi.phi(s + h))) - float(np.asarray(phi.phi(s - h)))) / (2 * h)
            an = float(np.asarray(phi.phi_deriv(s)))
            if abs(fd - an) > 1e-6 * (1.0 + abs(an)):
                out.append(PhiViolation(
                    "derivative", float(s), f"finite diff {fd!r} vs analytic {an!r}"
                ))

    return DiagnosticReport(violations=tuple(out))
