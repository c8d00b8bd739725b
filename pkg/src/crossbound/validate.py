"""Monte Carlo estimation of boundary-crossing probabilities and statistically
sound comparison against theoretical bounds.

A finite horizon can only under-count crossings, so a "violated" verdict
(exact lower confidence limit above the bound) is a sound conclusion, while
"holds" is conservative.  Intervals are exact Clopper-Pearson throughout.
"""

from __future__ import annotations

import dataclasses
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .errors import DomainViolation, InvalidParameter, InvalidSpec
from .sim import (
    Brownian,
    ExpSupermartingale,
    IidSum,
    LazyWalk,
    PoissonCounting,
    ProcessSpec,
    generate,
    increments_matrix,
    uniform_grid,
    validate_spec,
)
from .stopping import RegionPair, _with_horizon, verify_optional_stopping

SCHEMA_VERSION = "1"

EVENT_KINDS = ("line", "vee", "eta_ray", "sup_level", "stopping")


def clopper_pearson(k: int, n: int, alpha: float) -> tuple:
    """Exact two-sided binomial interval via Beta quantiles.

    k = 0 gives (0, 1 - (alpha/2)^(1/n)); k = n gives ((alpha/2)^(1/n), 1).
    """
    if not (0 < alpha < 1):
        raise DomainViolation(f"alpha must lie in (0, 1), got {alpha}")
    if n <= 0 or k < 0 or k > n:
        raise DomainViolation(f"need 0 <= k <= n with n >= 1, got k={k}, n={n}")
    lo = 0.0 if k == 0 else float(_scipy_stats.beta.ppf(alpha / 2.0, k, n - k + 1))
    hi = 1.0 if k == n else float(_scipy_stats.beta.ppf(1.0 - alpha / 2.0, k + 1, n - k))
    return lo, hi


@dataclass(frozen=True)
class EventSpec:
    """A crossing event paired with the theoretical bound it must respect.

    kinds: "line" (moving boundary gamma V_tau + slope (V_t - V_tau); side may
    be two_sided for the absolute-value envelope), "vee" (eta + gamma
    (V_tau v V_t)), "eta_ray" (eta + gamma V_t), "sup_level" (sup Y_t >= gamma)
    and "stopping" (delegates to the optional-stopping harness).
    """

    kind: str
    side: str = "upper"
    gamma: float = 0.0
    v_tau: float = 0.0
    slope: float = 0.0
    eta: float = 0.0
    bound: float = math.nan
    label: str = ""
    pair: Optional[RegionPair] = None
    stopping_kind: str = "martingale"

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise InvalidParameter(f"unknown event kind {self.kind!r}")
        if self.side not in ("upper", "lower", "two_sided"):
            raise InvalidParameter(f"unknown side {self.side!r}")
        if self.side == "two_sided" and self.kind != "line":
            raise InvalidParameter("two_sided applies to line events only")
        if self.kind == "stopping" and self.pair is None:
            raise InvalidParameter("stopping events need a RegionPair")


@dataclass(frozen=True)
class ValidationReport:
    label: str
    n_paths: int
    n_crossed: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    bound: float
    verdict: str
    truncation_fraction: float
    runtime_seconds: float
    alpha: float
    seed: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        rec = dataclasses.asdict(self)
        rec["schema_version"] = SCHEMA_VERSION
        return rec

    @staticmethod
    def csv_header() -> str:
        return ("schema_version,label,n_paths,n_crossed,p_hat,ci_lo,ci_hi,"
                "bound,verdict,truncation_fraction,runtime_seconds,alpha,seed")

    def csv_row(self) -> str:
        from .cli import fmt17  # local import to avoid a cycle at module load
        return ",".join([
            SCHEMA_VERSION, self.label, str(self.n_paths), str(self.n_crossed),
            fmt17(self.p_hat), fmt17(self.ci_lo), fmt17(self.ci_hi),
            fmt17(self.bound), self.verdict, fmt17(self.truncation_fraction),
            f"{self.runtime_seconds:.3f}", fmt17(self.alpha), str(self.seed),
        ])


def _verdict(ci_lo: float, ci_hi: float, bound: float) -> str:
    if math.isnan(bound):
        return "holds"
    if ci_lo > bound:
        return "violated"
    if (ci_hi - ci_lo) > 0.5 * bound:
        return "inconclusive"
    return "holds"


# ---------------------------------------------------------------------------
# Event evaluation on path matrices
# ---------------------------------------------------------------------------


class _RowStats:
    """Cached row statistics max/min of X -+ b V over column ranges.

    Events sharing a slope reuse one pass over the chunk, which dominates the
    evaluation cost for long grids.
    """

    def __init__(self, X: np.ndarray, V: np.ndarray):
        self.X = X
        self.V = V
        self._cache: dict = {}

    def get(self, op: str, b: float, lo: int, hi: Optional[int]):
        key = (op, float(b), lo, hi)
        got = self._cache.get(key)
        if got is not None:
            return got
        sl = slice(lo, hi)
        Xs = self.X[:, sl] if self.X.ndim == 2 else self.X[sl][None, :]
        Vs = self.V[sl]
        if op == "max":
            F = Xs - b * Vs if b != 0.0 else Xs
            out = F.max(axis=1)
        else:
            F = Xs + b * Vs if b != 0.0 else Xs
            out = F.min(axis=1)
        self._cache[key] = out
        return out


def _event_rows(event: EventSpec, st: _RowStats,
                transform: Optional[tuple]) -> np.ndarray:
    """Boolean crossed-indicator per path row for one event."""
    n_cols = st.V.size
    if event.kind == "sup_level":
        if transform is None:
            return st.get("max", 0.0, 0, None) >= event.gamma
        s, phi_s = transform
        level = math.log(event.gamma)
        if s > 0:
            return st.get("max", phi_s / s, 0, None) >= level / s
        return st.get("min", -phi_s / s, 0, None) <= level / s
    if event.kind == "line":
        c = (event.gamma - event.slope) * event.v_tau
        if event.side == "upper":
            return st.get("max", event.slope, 0, None) >= c
        if event.side == "lower":
            return st.get("min", event.slope, 0, None) <= -c
        up = st.get("max", event.slope, 0, None) >= c
        dn = st.get("min", event.slope, 0, None) <= -c
        return up | dn
    if event.kind == "eta_ray":
        if event.side == "upper":
            return st.get("max", event.gamma, 0, None) >= event.eta
        return st.get("min", event.gamma, 0, None) <= -event.eta
    if event.kind == "vee":
        i_tau = int(np.searchsorted(st.V, event.v_tau, side="right"))
        thresh = event.eta + event.gamma * event.v_tau
        if event.side == "upper":
            hit = st.get("max", 0.0, 0, i_tau) >= thresh
            if i_tau < n_cols:
                hit = hit | (st.get("max", event.gamma, i_tau, None) >= event.eta)
            return hit
        hit = st.get("min", 0.0, 0, i_tau) <= -thresh
        if i_tau < n_cols:
            hit = hit | (st.get("min", event.gamma, i_tau, None) <= -event.eta)
        return hit
    raise InvalidParameter(f"cannot evaluate event kind {event.kind!r} here")


def _transform_of(spec: ProcessSpec) -> Optional[tuple]:
    if isinstance(spec, ExpSupermartingale):
        return spec.s, float(np.asarray(spec.phi.phi(spec.s)))
    return None


def _count_uniform_chunk(spec, events, seed, indices, transform):
    base = spec.base if isinstance(spec, ExpSupermartingale) else spec
    inc = increments_matrix(base, seed, indices)
    k, n = inc.shape
    X = np.empty((k, n + 1))
    X[:, 0] = 0.0
    np.cumsum(inc, axis=1, out=X[:, 1:])
    _, V = uniform_grid(base)
    st = _RowStats(X, V)
    return np.array([int(_event_rows(ev, st, transform).sum()) for ev in events])


def _count_poisson_chunk(spec, events, seed, indices, transform):
    base = spec.base if isinstance(spec, ExpSupermartingale) else spec
    counts = np.zeros(len(events), dtype=np.int64)
    for idx in indices:
        path = generate(base, seed, int(idx))
        st = _RowStats(path.values[None, :], path.vproxy)
        for j, ev in enumerate(events):
            if bool(_event_rows(ev, st, transform)[0]):
                counts[j] += 1
    return counts


def sweep(spec: ProcessSpec, events: Sequence[EventSpec], n_paths: int,
          horizon=None, seed: int = 0, alpha: float = 0.01,
          threads: Optional[int] = None,
          chunk_size: Optional[int] = None) -> list:
    """Estimate every event on one shared set of simulated paths.

    Identical (spec, seed) always reproduces identical p_hat values whether
    events are estimated together or one at a time.
    """
    if not events:
        return []
    validate_spec(spec)
    if n_paths <= 0:
        raise InvalidParameter("n_paths must be positive")
    if horizon is not None:
        spec = _with_horizon(spec, horizon)
    t0 = time.perf_counter()

    out = []
    crossing = [ev for ev in events if ev.kind != "stopping"]
    if crossing:
        transform = _transform_of(spec)
        base = spec.base if isinstance(spec, ExpSupermartingale) else spec
        if isinstance(base, PoissonCounting):
            worker = _count_poisson_chunk
            chunk = chunk_size or 2048
        else:
            _, V = uniform_grid(base)
            worker = _count_uniform_chunk
            chunk = chunk_size or max(16, min(8192, int(4_000_000 // V.size)))
        starts = list(range(0, n_paths, chunk))
        jobs = [np.arange(s, min(s + chunk, n_paths)) for s in starts]
        n_workers = threads if threads is not None else (os.cpu_count() or 1)
        if n_workers > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                parts = list(pool.map(
                    lambda ix: worker(spec, crossing, seed, ix, transform), jobs))
        else:
            parts = [worker(spec, crossing, seed, ix, transform) for ix in jobs]
        counts = np.sum(parts, axis=0)

    elapsed = time.perf_counter() - t0
    ci = 0
    for ev in events:
        if ev.kind == "stopping":
            t1 = time.perf_counter()
            rep = verify_optional_stopping(
                spec, ev.pair, n_paths, horizon if horizon is not None else
                _default_stop_horizon(spec), seed, kind=ev.stopping_kind)
            k = int(round((1.0 - rep.truncated_outer) * n_paths))
            lo, hi = clopper_pearson(k, n_paths, alpha)
            out.append(ValidationReport(
                label=ev.label or "stopping", n_paths=n_paths, n_crossed=k,
                p_hat=k / n_paths, ci_lo=lo, ci_hi=hi, bound=math.nan,
                verdict=rep.verdict, truncation_fraction=rep.truncated_outer,
                runtime_seconds=time.perf_counter() - t1, alpha=alpha, seed=seed,
                extra=rep.to_dict()))
            continue
        k = int(counts[ci]); ci += 1
        lo, hi = clopper_pearson(k, n_paths, alpha)
        p_hat = k / n_paths
        out.append(ValidationReport(
            label=ev.label or ev.kind, n_paths=n_paths, n_crossed=k,
            p_hat=p_hat, ci_lo=lo, ci_hi=hi, bound=ev.bound,
            verdict=_verdict(lo, hi, ev.bound),
            truncation_fraction=1.0 - p_hat,
            runtime_seconds=elapsed / max(1, len(crossing)),
            alpha=alpha, seed=seed))
    return out


def _default_stop_horizon(spec: ProcessSpec):
    if isinstance(spec, (IidSum, LazyWalk)):
        return spec.n
    if isinstance(spec, (PoissonCounting, Brownian)):
        return spec.horizon
    if isinstance(spec, ExpSupermartingale):
        return _default_stop_horizon(spec.base)
    raise InvalidSpec(f"no default horizon for {type(spec).__name__}")


def estimate_crossing(spec: ProcessSpec, event: EventSpec, n_paths: int,
                      horizon=None, seed: int = 0, alpha: float = 0.01,
                      threads: Optional[int] = None) -> ValidationReport:
    """Estimate one crossing probability with its exact confidence interval."""
    return sweep(spec, [event], n_paths, horizon=horizon, seed=seed,
                 alpha=alpha, threads=threads)[0]


def halving_allowance(p_fine: float, p_coarse: float) -> float:
    """Richardson estimate of the fine-grid crossing deficit from a paired
    (coarse = 2 dt, fine = dt) run, assuming sqrt(dt) bias order:
    bias(dt) ~= (p_fine - p_coarse) / (sqrt(2) - 1)."""
    return max(0.0, (p_fine - p_coarse) / (math.sqrt(2.0) - 1.0))
