"""Continuous univariate distributions for compliance costs and signals.

Two families are supported: ``Normal`` and ``PiecewiseLinearCdf``.  Both are
immutable and expose their CDF, survival function, density and a
left-continuous generalized inverse.  The module also hosts the two
structural checks the mechanism relies on: the CDF-ordering form of the
monotone likelihood ratio property and first-order stochastic dominance
between two cost distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np
from scipy import special

from .exceptions import DomainError

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

MLRP_TOL = 0.0
DOMINANCE_EPS = 1e-9
CROSSING_TOL = 1e-10
DOMINANCE_GRID_N = 4097
BRACKET_PROB = 1e-4


@dataclass(frozen=True)
class Normal:
    mean: float
    sd: float

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.sd)):
            raise DomainError(f"normal parameters must be finite, got {self}")
        if self.sd <= 0:
            raise DomainError(f"normal sd must be > 0, got {self.sd}")

    def to_dict(self) -> dict:
        return {"normal": {"mean": self.mean, "sd": self.sd}}


@dataclass(frozen=True)
class PiecewiseLinearCdf:
    """CDF obtained by linear interpolation between ``(x, p)`` knots.

    The first knot must carry ``p == 0`` and the last ``p == 1``; outside the
    knot range the CDF is constant at 0 and 1 respectively.
    """

    knots: tuple = field()

    def __post_init__(self):
        knots = tuple((float(x), float(p)) for x, p in self.knots)
        if len(knots) < 2:
            raise DomainError("piecewise CDF needs at least two knots")
        xs = [k[0] for k in knots]
        ps = [k[1] for k in knots]
        if any(not math.isfinite(v) for v in xs + ps):
            raise DomainError("piecewise knots must be finite")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("piecewise knots must be strictly increasing in x")
        if any(b < a for a, b in zip(ps, ps[1:])):
            raise DomainError("piecewise knot probabilities must be non-decreasing")
        if ps[0] != 0.0 or ps[-1] != 1.0:
            raise DomainError("piecewise knot probabilities must run from 0 to 1")
        object.__setattr__(self, "knots", knots)

    @property
    def xs(self) -> np.ndarray:
        return np.array([k[0] for k in self.knots])

    @property
    def ps(self) -> np.ndarray:
        return np.array([k[1] for k in self.knots])

    def to_dict(self) -> dict:
        return {"piecewise": {"knots": [list(k) for k in self.knots]}}


ContinuousDistribution = Union[Normal, PiecewiseLinearCdf]


def from_dict(data: dict) -> ContinuousDistribution:
    """Build a distribution from its JSON literal."""
    if not isinstance(data, dict) or len(data) != 1:
        raise DomainError(
            'distribution literal must be {"normal": {...}} or {"piecewise": {...}}'
        )
    (kind, body), = data.items()
    if kind == "normal":
        try:
            return Normal(float(body["mean"]), float(body["sd"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"bad normal literal {body!r}: {exc}") from None
    if kind == "piecewise":
        try:
            return PiecewiseLinearCdf(tuple(tuple(k) for k in body["knots"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"bad piecewise literal {body!r}: {exc}") from None
    raise DomainError(f"unknown distribution family {kind!r}")


def cdf(dist: ContinuousDistribution, x):
    """Evaluate the CDF at ``x`` (scalar or array)."""
    if isinstance(dist, Normal):
        z = (np.asarray(x, dtype=float) - dist.mean) / (dist.sd * SQRT2)
        out = 0.5 * special.erfc(-z)
    else:
        out = np.interp(np.asarray(x, dtype=float), dist.xs, dist.ps, left=0.0, right=1.0)
    return float(out) if np.ndim(out) == 0 else out


def sf(dist: ContinuousDistribution, x):
    """Survival function ``1 - cdf``, computed without cancellation in the upper tail."""
    if isinstance(dist, Normal):
        z = (np.asarray(x, dtype=float) - dist.mean) / (dist.sd * SQRT2)
        out = 0.5 * special.erfc(z)
    else:
        out = 1.0 - np.interp(np.asarray(x, dtype=float), dist.xs, dist.ps, left=0.0, right=1.0)
    return float(out) if np.ndim(out) == 0 else out


def pdf(dist: ContinuousDistribution, x):
    if isinstance(dist, Normal):
        z = (np.asarray(x, dtype=float) - dist.mean) / dist.sd
        out = INV_SQRT_2PI / dist.sd * np.exp(-0.5 * z * z)
    else:
        xs, ps = dist.xs, dist.ps
        slopes = np.diff(ps) / np.diff(xs)
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(xs, x, side="right") - 1
        inside = (idx >= 0) & (idx < len(slopes))
        out = np.where(inside, slopes[np.clip(idx, 0, len(slopes) - 1)], 0.0)
    return float(out) if np.ndim(out) == 0 else out


def _bracket(f, target, start, scale):
    # f increasing; returns (lo, hi) with f(lo) < target <= f(hi)
    lo, hi = start - scale, start + scale
    step = scale
    while f(lo) >= target:
        step *= 2.0
        lo -= step
        if not math.isfinite(lo):
            raise DomainError("quantile bracket expansion overflowed")
    step = scale
    while f(hi) < target:
        step *= 2.0
        hi += step
        if not math.isfinite(hi):
            raise DomainError("quantile bracket expansion overflowed")
    return lo, hi


def _bisect_smallest(f, target, lo, hi):
    # invariant: f(lo) < target <= f(hi); shrink to adjacent floats
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi


def quantile(dist: ContinuousDistribution, p: float) -> float:
    """Left-continuous generalized inverse: the smallest ``x`` with ``cdf(x) >= p``.

    Normal quantiles come from bracketed bisection on the CDF (geometric
    bracket expansion, then bisection down to adjacent floats).  Piecewise
    CDFs are inverted exactly segment by segment; on a flat spot the left end
    is returned.
    """
    p = float(p)
    if not (0.0 < p < 1.0):
        raise DomainError(f"quantile needs p in (0, 1), got {p}")
    if isinstance(dist, PiecewiseLinearCdf):
        return _piecewise_quantile(dist, p)
    lo, hi = _bracket(lambda x: cdf(dist, x), p, dist.mean, dist.sd)
    return _bisect_smallest(lambda x: cdf(dist, x), p, lo, hi)


def isf(dist: ContinuousDistribution, q: float) -> float:
    """Inverse survival function: the smallest ``x`` with ``sf(x) <= q``.

    Agrees with ``quantile(dist, 1 - q)`` but keeps full precision when ``q``
    is tiny (upper-tail matching).
    """
    q = float(q)
    if not (0.0 < q < 1.0):
        raise DomainError(f"isf needs q in (0, 1), got {q}")
    if isinstance(dist, PiecewiseLinearCdf):
        return _piecewise_quantile(dist, 1.0 - q)
    neg_sf = lambda x: -sf(dist, x)  # noqa: E731
    lo, hi = _bracket(neg_sf, -q, dist.mean, dist.sd)
    return _bisect_smallest(neg_sf, -q, lo, hi)


def _piecewise_quantile(dist: PiecewiseLinearCdf, p: float) -> float:
    xs, ps = dist.xs, dist.ps
    k = int(np.searchsorted(ps, p, side="left"))
    # ps[k-1] < p <= ps[k]
    if ps[k] == p:
        # first knot attaining p; left end of any flat spot
        return float(xs[k])
    x0, x1, p0, p1 = xs[k - 1], xs[k], ps[k - 1], ps[k]
    return float(x0 + (p - p0) * (x1 - x0) / (p1 - p0))


def sample(dist: ContinuousDistribution, rng: np.random.Generator, size=None):
    """Inverse-transform sampling from ``dist`` with the given generator."""
    u = rng.random(size)
    if isinstance(dist, Normal):
        out = dist.mean + dist.sd * special.ndtri(u)
    else:
        xs, ps = dist.xs, dist.ps
        # u == 0 has probability zero; map it to the lower end
        k = np.clip(np.searchsorted(ps, u, side="left"), 1, len(ps) - 1)
        x0, x1, p0, p1 = xs[k - 1], xs[k], ps[k - 1], ps[k]
        out = x0 + (u - p0) * (x1 - x0) / (p1 - p0)
    return float(out) if np.ndim(out) == 0 else out


def support_hull(dists: Iterable[ContinuousDistribution], prob: float) -> tuple[float, float]:
    """Smallest interval containing the ``prob`` and ``1 - prob`` quantiles of every dist."""
    lows, highs = [], []
    for d in dists:
        lows.append(quantile(d, prob))
        highs.append(quantile(d, 1.0 - prob))
    return min(lows), max(highs)


@dataclass(frozen=True)
class SignalModel:
    """Signal distributions for non-compliant (``f0``) and compliant (``f1``) individuals."""

    f0: ContinuousDistribution
    f1: ContinuousDistribution

    def cdf(self, behavior: int, s):
        return cdf(self.f1 if behavior else self.f0, s)

    def to_dict(self) -> dict:
        return {"f0": self.f0.to_dict(), "f1": self.f1.to_dict()}


@dataclass(frozen=True)
class MlrpCheck:
    passed: bool
    worst_margin: float
    worst_at: float


def verify_mlrp(model: SignalModel, grid: Sequence[float], tol: float = MLRP_TOL) -> MlrpCheck:
    """Check ``F0(s) - F1(s) > tol`` at every interior grid point.

    Interior means both CDFs lie strictly inside (0, 1); at points where the
    two distributions have exhausted their support the ordering cannot be
    strict and is not tested.  If no grid point is interior the check fails.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise DomainError("MLRP grid must be non-empty")
    f0 = np.atleast_1d(cdf(model.f0, grid))
    f1 = np.atleast_1d(cdf(model.f1, grid))
    interior = (f0 > 0) & (f0 < 1) & (f1 > 0) & (f1 < 1)
    if not interior.any():
        return MlrpCheck(False, 0.0, float("nan"))
    margin = (f0 - f1)[interior]
    i = int(np.argmin(margin))
    return MlrpCheck(bool(margin[i] > tol), float(margin[i]), float(grid[interior][i]))


def default_mlrp_grid(model: SignalModel, n: int = 2049) -> np.ndarray:
    lo, hi = support_hull([model.f0, model.f1], 1e-3)
    return np.linspace(lo, hi, n)


@dataclass(frozen=True)
class DominanceVerdict:
    """Outcome of comparing two cost CDFs ``H^X`` (first) and ``H^Y`` (second).

    ``tag`` is one of ``"first_dominates_second"``, ``"second_dominates_first"``,
    ``"crossing"`` or ``"identical"``.  "Second dominates first" means the
    second distribution's costs are stochastically larger, i.e. its CDF lies
    below the first one's.
    """

    tag: str
    points: tuple = ()

    FIRST = "first_dominates_second"
    SECOND = "second_dominates_first"
    CROSSING = "crossing"
    IDENTICAL = "identical"

    @property
    def is_strict_dominance(self) -> bool:
        return self.tag in (self.FIRST, self.SECOND)

    def swapped(self) -> "DominanceVerdict":
        flip = {self.FIRST: self.SECOND, self.SECOND: self.FIRST}
        return DominanceVerdict(flip.get(self.tag, self.tag), self.points)


def _refine_crossing(diff, lo, hi, tol=CROSSING_TOL):
    d_lo = diff(lo)
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        d_mid = diff(mid)
        if d_mid == 0.0:
            return mid
        if (d_mid > 0) == (d_lo > 0):
            lo, d_lo = mid, d_mid
        else:
            hi = mid
    best = min((lo, hi), key=lambda x: abs(diff(x)))
    if abs(diff(best)) > tol:
        raise DomainError(f"crossing refinement near {best} did not reach tolerance {tol}")
    return best


def classify_dominance(
    hx: ContinuousDistribution,
    hy: ContinuousDistribution,
    bracket: tuple[float, float] | None = None,
    grid_n: int = DOMINANCE_GRID_N,
    eps: float = DOMINANCE_EPS,
) -> DominanceVerdict:
    """Classify the first-order stochastic ordering of two cost CDFs.

    The difference ``H^X - H^Y`` is evaluated on a uniform grid over
    ``bracket``.  Grid points where ``|H^X - H^Y| <= eps`` carry no sign.
    If every signed point agrees, one distribution dominates; each sign flip
    between consecutive signed points is refined by bisection into a crossing
    point; with no signed point at all the distributions are reported
    identical within tolerance.
    """
    if bracket is None:
        bracket = support_hull([hx, hy], BRACKET_PROB)
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise DomainError(f"bracket must satisfy lo < hi, got {bracket}")
    for d in (hx, hy):
        if cdf(d, lo) >= 1e-3 or cdf(d, hi) <= 1 - 1e-3:
            raise DomainError(f"bracket {bracket} too narrow for {d}")
    grid = np.linspace(lo, hi, grid_n)
    diff = np.asarray(cdf(hx, grid)) - np.asarray(cdf(hy, grid))
    signed = np.flatnonzero(np.abs(diff) > eps)
    if signed.size == 0:
        return DominanceVerdict(DominanceVerdict.IDENTICAL)
    signs = np.sign(diff[signed])
    if np.all(signs > 0):
        # H^X above H^Y: Y's costs are larger
        return DominanceVerdict(DominanceVerdict.SECOND)
    if np.all(signs < 0):
        return DominanceVerdict(DominanceVerdict.FIRST)

    def d(x):
        return cdf(hx, x) - cdf(hy, x)

    points = []
    flips = np.flatnonzero(signs[1:] != signs[:-1])
    for k in flips:
        a, b = grid[signed[k]], grid[signed[k + 1]]
        points.append(float(_refine_crossing(d, a, b)))
    return DominanceVerdict(DominanceVerdict.CROSSING, tuple(points))
