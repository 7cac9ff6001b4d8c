"""Two-stage construction of fair classification rules and stakes.

Stage one post-processes each group's signal with a randomized two-piece rule
so both groups share the same true and false positive rates.  Stage two picks
per-group stakes so the induced equilibrium prevalences coincide, which with
shared error rates also equalizes positive predictive value.  The stakes can be
chosen freely per group (always possible) or forced equal across groups
(possible exactly when the cost CDFs cross).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from . import distributions as dist
from .classifier import DecisionRule, ErrorProfile, TwoPieceRule, error_profile
from .distributions import DominanceVerdict, SignalModel
from .equilibrium import (
    EquilibriumOutcome,
    GroupEnvironment,
    Stakes,
    equilibrium_from_profile,
    solve_equilibrium,
)
from .exceptions import ConstructionError, DomainError, InfeasibleDesignError
from .fairness import DEFAULT_TOL, FairnessReport, evaluate

THRESHOLD_GRID_N = 2049
THRESHOLD_HULL_PROB = 1e-3
THRESHOLD_XTOL = 1e-8
PROFILE_TOL = 1e-10

MODES = ("theorem1", "equal_stakes")
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, lo, hi, xtol):
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > xtol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)


def _admissible(model: SignalModel, s: float) -> bool:
    m, ell = dist.cdf(model.f1, s), dist.cdf(model.f0, s)
    return 0.0 < m < ell < 1.0


def choose_threshold(model: SignalModel) -> float:
    """Signal threshold maximizing ``F0(s) - F1(s)`` over admissible thresholds.

    Admissible means ``0 < F1(s) < F0(s) < 1``.  A 2049-point grid over the
    joint 0.001/0.999 quantile hull locates the best cell, then golden-section
    search refines it to an interval of width 1e-8.
    """
    lo, hi = dist.support_hull([model.f0, model.f1], THRESHOLD_HULL_PROB)
    grid = np.linspace(lo, hi, THRESHOLD_GRID_N)
    f0 = np.asarray(dist.cdf(model.f0, grid))
    f1 = np.asarray(dist.cdf(model.f1, grid))
    gap = f0 - f1
    ok = (f1 > 0) & (f1 < f0) & (f0 < 1)
    if not ok.any():
        raise ConstructionError("no admissible threshold: F1 < F0 never holds strictly")
    gap = np.where(ok, gap, -np.inf)
    i = int(np.argmax(gap))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    s = _golden_max(lambda x: dist.cdf(model.f0, x) - dist.cdf(model.f1, x), a, b, THRESHOLD_XTOL)
    if not _admissible(model, s) or (
        dist.cdf(model.f0, s) - dist.cdf(model.f1, s) < gap[i]
    ):
        s = float(grid[i])
    return float(s)


@dataclass(frozen=True)
class GroupRuleDesign:
    """Stage-one quantities for one group."""

    threshold: float
    ell: float
    m: float
    a: float
    b: float
    profile: ErrorProfile

    @property
    def rule(self) -> TwoPieceRule:
        return TwoPieceRule(self.threshold, self.a, self.b)

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "ell": self.ell,
            "m": self.m,
            "a": self.a,
            "b": self.b,
            "tpr": self.profile.tpr,
            "fpr": self.profile.fpr,
        }


@dataclass(frozen=True)
class ErrorRateDesign:
    groups: dict
    delta: float
    target_tpr: float
    target_fpr: float

    @property
    def targets(self) -> tuple:
        return self.target_tpr, self.target_fpr

    @property
    def rules(self) -> dict:
        return {g: d.rule for g, d in self.groups.items()}


def _unit(x, name):
    if x < -1e-12 or x > 1 + 1e-12:
        raise ConstructionError(f"{name} = {x} left [0, 1]")
    return min(1.0, max(0.0, x))


def equalize_error_rates(envs: Mapping[str, GroupEnvironment]) -> ErrorRateDesign:
    """Group-specific two-piece rules sharing one (TPR, FPR) pair.

    The shared false positive rate is 1/2 and the shared true positive rate is
    ``1/2 + delta`` with ``delta = min_g (ell - m) / (2 max(ell, 1 - ell))``,
    which keeps every acceptance probability inside [0, 1].
    """
    if len(envs) != 2:
        raise ConstructionError("the construction is defined for exactly two groups")
    per_group = {}
    for g, env in envs.items():
        check = dist.verify_mlrp(env.signals, dist.default_mlrp_grid(env.signals))
        if not check.passed:
            raise ConstructionError(
                f"group {g}: signals violate F0 > F1 (worst margin {check.worst_margin:.3g} "
                f"at s={check.worst_at:.6g})"
            )
        s = choose_threshold(env.signals)
        per_group[g] = (s, dist.cdf(env.signals.f0, s), dist.cdf(env.signals.f1, s))

    delta = min((ell - m) / (2.0 * max(ell, 1.0 - ell)) for _, ell, m in per_group.values())
    if not delta > 0:
        raise ConstructionError(f"degenerate informativeness margin {delta}")
    target_fpr = 0.5
    target_tpr = 0.5 + delta

    designs = {}
    for g, (s, ell, m) in per_group.items():
        a = _unit(0.5 - delta * (1.0 - ell) / (ell - m), f"a[{g}]")
        b = _unit(0.5 + delta * ell / (ell - m), f"b[{g}]")
        profile = error_profile(TwoPieceRule(s, a, b), envs[g].signals)
        if abs(profile.tpr - target_tpr) > PROFILE_TOL or abs(profile.fpr - target_fpr) > PROFILE_TOL:
            raise ConstructionError(f"group {g}: realized rates {profile} miss targets")
        designs[g] = GroupRuleDesign(s, ell, m, a, b, profile)
    return ErrorRateDesign(designs, delta, target_tpr, target_fpr)


def _match_prevalence(cost_other, cost_ref, c_ref) -> float:
    """Cost level at which ``cost_other`` reaches ``cost_ref(c_ref)``."""
    p = dist.cdf(cost_ref, c_ref)
    q = dist.sf(cost_ref, c_ref)
    try:
        if p <= 0.5:
            return dist.quantile(cost_other, p)
        return dist.isf(cost_other, q)
    except DomainError as exc:
        raise ConstructionError(
            f"reference prevalence {p} has no interior preimage: {exc}"
        ) from None


def design_stakes_theorem1(
    envs: Mapping[str, GroupEnvironment],
    targets: tuple,
    base_reward: float = 0.0,
) -> tuple[dict, str]:
    """Differential stakes that equalize prevalence under shared error rates.

    The group with the higher sincere prevalence (ties go to the first group)
    is the reference and receives ``base_reward``; the other group's stakes
    move its cutoff to where its cost CDF reaches the reference prevalence.
    Returns the stakes per group and the reference group's name.
    """
    tpr, fpr = targets
    gap = tpr - fpr
    if not gap > 0:
        raise ConstructionError(f"targets must be informative, got TPR={tpr}, FPR={fpr}")
    g1, g2 = list(envs)
    ref, other = (g1, g2) if envs[g1].sincere_prevalence >= envs[g2].sincere_prevalence else (g2, g1)
    c_ref = base_reward * gap
    c_other = _match_prevalence(envs[other].cost, envs[ref].cost, c_ref)
    return {ref: Stakes(float(base_reward)), other: Stakes(c_other / gap)}, ref


@dataclass(frozen=True)
class EqualStakesResult:
    """Either a shared stake equalizing prevalence, or the dominance that rules it out."""

    feasible: bool
    r: Optional[float] = None
    crossing: Optional[float] = None
    aligned_incentives: Optional[bool] = None
    dominated_group: Optional[str] = None
    verdict: Optional[DominanceVerdict] = None

    def to_dict(self) -> dict:
        d = {"feasible": self.feasible}
        if self.feasible:
            d.update(r=self.r, crossing=self.crossing, aligned_incentives=self.aligned_incentives)
        else:
            d["dominated_group"] = self.dominated_group
        if self.verdict is not None:
            d["dominance"] = {"tag": self.verdict.tag, "points": list(self.verdict.points)}
        return d


def select_crossing(points: Sequence[float]) -> float:
    """Largest non-negative crossing if there is one, else the one closest to zero."""
    nonneg = [c for c in points if c >= 0]
    if nonneg:
        return max(nonneg)
    return max(points)


def design_stakes_equal(envs: Mapping[str, GroupEnvironment], targets: tuple) -> EqualStakesResult:
    tpr, fpr = targets
    gap = tpr - fpr
    if not gap > 0:
        raise ConstructionError(f"targets must be informative, got TPR={tpr}, FPR={fpr}")
    g1, g2 = list(envs)
    verdict = dist.classify_dominance(envs[g1].cost, envs[g2].cost)
    if verdict.tag == DominanceVerdict.SECOND:
        return EqualStakesResult(False, dominated_group=g2, verdict=verdict)
    if verdict.tag == DominanceVerdict.FIRST:
        return EqualStakesResult(False, dominated_group=g1, verdict=verdict)
    c_bar = 0.0 if verdict.tag == DominanceVerdict.IDENTICAL else select_crossing(verdict.points)
    return EqualStakesResult(True, r=c_bar / gap, crossing=c_bar, aligned_incentives=c_bar >= 0, verdict=verdict)


@dataclass(frozen=True)
class MechanismDesign:
    mode: str
    error_rates: ErrorRateDesign
    stakes: dict
    outcomes: dict
    report: FairnessReport
    reference_group: Optional[str] = None
    equal_stakes: Optional[EqualStakesResult] = None
    signals: dict = field(default_factory=dict)

    @property
    def groups(self) -> tuple:
        return tuple(self.stakes)

    @property
    def rules(self) -> dict:
        return self.error_rates.rules

    def to_dict(self) -> dict:
        er = self.error_rates
        d = {
            "mode": self.mode,
            "delta": er.delta,
            "target_tpr": er.target_tpr,
            "target_fpr": er.target_fpr,
            "informativeness": er.target_tpr - er.target_fpr,
            "groups": {
                g: {
                    "design": er.groups[g].to_dict(),
                    "rule": er.groups[g].rule.to_dict(),
                    "stakes": self.stakes[g].r,
                    "outcome": self.outcomes[g].to_dict(),
                }
                for g in self.groups
            },
            "fairness": self.report.to_dict(),
        }
        if self.reference_group is not None:
            d["reference_group"] = self.reference_group
        if self.equal_stakes is not None:
            d["equal_stakes"] = self.equal_stakes.to_dict()
        return d


def audit(
    envs: Mapping[str, GroupEnvironment],
    rules: Mapping[str, DecisionRule],
    tol: float = DEFAULT_TOL,
) -> tuple[dict, FairnessReport]:
    """Equilibria and fairness report for user-supplied rules and stakes."""
    outcomes = {g: solve_equilibrium(envs[g], rules[g]) for g in envs}
    return outcomes, evaluate(outcomes, {g: envs[g].stakes for g in envs}, tol)


def run_mechanism(
    envs: Mapping[str, GroupEnvironment],
    mode: str = "theorem1",
    base_reward: float = 0.0,
    tol: float = DEFAULT_TOL,
) -> MechanismDesign:
    """Build rules and stakes for two groups and audit the resulting equilibrium.

    ``mode="theorem1"`` uses differential stakes and always succeeds for
    signals with ordered CDFs; ``mode="equal_stakes"`` forces one shared
    stake and raises :class:`InfeasibleDesignError` when one group's costs
    stochastically dominate the other's.
    """
    mode = mode.replace("-", "_")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    er = equalize_error_rates(envs)
    ref = None
    eq = None
    if mode == "theorem1":
        stakes, ref = design_stakes_theorem1(envs, er.targets, base_reward)
    else:
        eq = design_stakes_equal(envs, er.targets)
        if not eq.feasible:
            raise InfeasibleDesignError(
                f"costs of group {eq.dominated_group} stochastically dominate; "
                "equal stakes cannot equalize prevalence"
            )
        stakes = {g: Stakes(eq.r) for g in envs}
    outcomes = {
        g: equilibrium_from_profile(envs[g].cost, er.groups[g].profile, stakes[g]) for g in envs
    }
    report = evaluate(outcomes, stakes, tol)
    return MechanismDesign(
        mode=mode,
        error_rates=er,
        stakes=stakes,
        outcomes=outcomes,
        report=report,
        reference_group=ref,
        equal_stakes=eq,
        signals={g: envs[g].signals for g in envs},
    )


def sweep_shared_stakes(
    envs: Mapping[str, GroupEnvironment],
    rules: Mapping[str, DecisionRule],
    r_values: Sequence[float],
) -> list[dict]:
    """Equilibria under one shared stake for each value in ``r_values``.

    Gaps are signed as first group minus second group.
    """
    g1, g2 = list(envs)
    profiles = {g: error_profile(rules[g], envs[g].signals) for g in envs}
    rows = []
    for r in r_values:
        o1 = equilibrium_from_profile(envs[g1].cost, profiles[g1], r)
        o2 = equilibrium_from_profile(envs[g2].cost, profiles[g2], r)
        ppv_gap = None if o1.ppv is None or o2.ppv is None else o1.ppv - o2.ppv
        rows.append(
            {
                "r": float(r),
                f"pi_{g1}": o1.prevalence,
                f"pi_{g2}": o2.prevalence,
                f"ppv_{g1}": o1.ppv,
                f"ppv_{g2}": o2.ppv,
                "prevalence_gap": o1.prevalence - o2.prevalence,
                "ppv_gap": ppv_gap,
            }
        )
    return rows
