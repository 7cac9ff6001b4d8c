"""Best-response behavior and the equilibrium it induces within a group."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .classifier import DecisionRule, ErrorProfile, error_profile
from .distributions import ContinuousDistribution, SignalModel, cdf
from .exceptions import DomainError


@dataclass(frozen=True)
class Stakes:
    """Net payoff ``r`` of a favorable over an unfavorable decision."""

    r: float

    def __post_init__(self):
        if not math.isfinite(self.r):
            raise DomainError(f"stakes must be finite, got {self.r}")

    @classmethod
    def from_rewards(cls, r1: float, r0: float) -> "Stakes":
        """Only the difference between the two rewards matters for behavior."""
        return cls(float(r1) - float(r0))


@dataclass(frozen=True)
class GroupEnvironment:
    cost: ContinuousDistribution
    signals: SignalModel
    stakes: Optional[Stakes] = None

    def with_stakes(self, r: float) -> "GroupEnvironment":
        return replace(self, stakes=Stakes(float(r)))

    @property
    def sincere_prevalence(self) -> float:
        return cdf(self.cost, 0.0)


@dataclass(frozen=True)
class Confusion:
    """Population masses of the four decision/behavior cells."""

    tp: float
    fp: float
    fn: float
    tn: float

    @classmethod
    def from_rates(cls, prevalence: float, profile: ErrorProfile) -> "Confusion":
        pi = prevalence
        return cls(
            tp=pi * profile.tpr,
            fp=(1.0 - pi) * profile.fpr,
            fn=pi * (1.0 - profile.tpr),
            tn=(1.0 - pi) * (1.0 - profile.fpr),
        )

    def as_tuple(self) -> tuple:
        return (self.tp, self.fp, self.fn, self.tn)

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


@dataclass(frozen=True)
class EquilibriumOutcome:
    cutoff: float
    prevalence: float
    sincere_prevalence: float
    profile: ErrorProfile
    confusion: Confusion
    ppv: Optional[float]

    @property
    def ppv_defined(self) -> bool:
        return self.ppv is not None

    def to_dict(self) -> dict:
        return {
            "cutoff": self.cutoff,
            "prevalence": self.prevalence,
            "sincere_prevalence": self.sincere_prevalence,
            "tpr": self.profile.tpr,
            "fpr": self.profile.fpr,
            "confusion": self.confusion.to_dict(),
            "ppv": self.ppv,
        }


def compliance_cutoff(profile: ErrorProfile, stakes: Stakes | float) -> float:
    """Largest compliance cost an individual is willing to pay."""
    r = stakes.r if isinstance(stakes, Stakes) else float(stakes)
    return r * (profile.tpr - profile.fpr)


def ppv(prevalence: float, profile: ErrorProfile) -> Optional[float]:
    """Share of compliant individuals among those classified favorably.

    Returns ``None`` when nobody is classified favorably.
    """
    if not (0.0 <= prevalence <= 1.0):
        raise DomainError(f"prevalence must be in [0, 1], got {prevalence}")
    tp = prevalence * profile.tpr
    denom = tp + (1.0 - prevalence) * profile.fpr
    if denom == 0.0:
        return None
    return tp / denom


def equilibrium_from_profile(
    cost: ContinuousDistribution, profile: ErrorProfile, stakes: Stakes | float
) -> EquilibriumOutcome:
    c_hat = compliance_cutoff(profile, stakes)
    # ties comply; H is right-continuous so H(c_hat) counts them
    pi = cdf(cost, c_hat)
    return EquilibriumOutcome(
        cutoff=c_hat,
        prevalence=pi,
        sincere_prevalence=cdf(cost, 0.0),
        profile=profile,
        confusion=Confusion.from_rates(pi, profile),
        ppv=ppv(pi, profile),
    )


def solve_equilibrium(env: GroupEnvironment, rule: DecisionRule) -> EquilibriumOutcome:
    """Equilibrium prevalence, confusion masses and PPV for one group."""
    if env.stakes is None:
        raise DomainError("environment has no stakes set")
    return equilibrium_from_profile(env.cost, error_profile(rule, env.signals), env.stakes)
