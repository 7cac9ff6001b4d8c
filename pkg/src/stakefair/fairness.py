"""The four fairness criteria evaluated on two groups' equilibrium outcomes."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Mapping, Optional

from .equilibrium import EquilibriumOutcome, Stakes

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class ErrorRateBalance:
    tpr_gap: float
    fpr_gap: float
    passed: bool


@dataclass(frozen=True)
class PredictiveParity:
    ppv_gap: Optional[float]
    passed: bool
    undefined: bool
    reason: str = ""


@dataclass(frozen=True)
class EqualStakes:
    stakes_gap: float
    passed: bool


@dataclass(frozen=True)
class AlignedIncentives:
    margins: dict
    passed: bool


@dataclass(frozen=True)
class FairnessReport:
    groups: tuple
    error_rate_balance: ErrorRateBalance
    predictive_parity: PredictiveParity
    equal_stakes: EqualStakes
    aligned_incentives: AlignedIncentives
    tol: float

    @property
    def verdicts(self) -> dict:
        return {
            "error_rate_balance": self.error_rate_balance.passed,
            "predictive_parity": self.predictive_parity.passed,
            "equal_stakes": self.equal_stakes.passed,
            "aligned_incentives": self.aligned_incentives.passed,
        }

    @property
    def all_passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["groups"] = list(self.groups)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FairnessReport":
        return cls(
            groups=tuple(d["groups"]),
            error_rate_balance=ErrorRateBalance(**d["error_rate_balance"]),
            predictive_parity=PredictiveParity(**d["predictive_parity"]),
            equal_stakes=EqualStakes(**d["equal_stakes"]),
            aligned_incentives=AlignedIncentives(**d["aligned_incentives"]),
            tol=d["tol"],
        )

    def render(self) -> str:
        def mark(ok):
            return "PASS" if ok else "FAIL"

        g1, g2 = self.groups
        eb, pp, es, ai = (
            self.error_rate_balance,
            self.predictive_parity,
            self.equal_stakes,
            self.aligned_incentives,
        )
        pp_detail = (
            f"ppv gap {pp.ppv_gap:.6g}" if pp.ppv_gap is not None else f"undefined ({pp.reason})"
        )
        ai_detail = ", ".join(f"{g} {ai.margins[g]:+.6g}" for g in (g1, g2))
        rows = [
            ("error-rate balance", eb.passed, f"tpr gap {eb.tpr_gap:.6g}, fpr gap {eb.fpr_gap:.6g}"),
            ("predictive parity", pp.passed, pp_detail),
            ("equal stakes", es.passed, f"stakes gap {es.stakes_gap:.6g}"),
            ("aligned incentives", ai.passed, f"margins {ai_detail}"),
        ]
        width = max(len(r[0]) for r in rows)
        lines = [f"fairness (tol {self.tol:.3g})"]
        lines += [f"  {name:<{width}}  {mark(ok)}  {detail}" for name, ok, detail in rows]
        return "\n".join(lines)


def evaluate(
    outcomes: Mapping[str, EquilibriumOutcome],
    stakes: Mapping[str, Stakes | float],
    tol: float = DEFAULT_TOL,
) -> FairnessReport:
    """Score error-rate balance, predictive parity, equal stakes and aligned incentives.

    All gaps are absolute differences between the two groups; a criterion
    passes when its gap is at most ``tol`` (aligned incentives: when every
    margin ``prevalence - sincere prevalence`` is at least ``-tol``).
    """
    if len(outcomes) != 2 or set(outcomes) != set(stakes):
        raise ValueError("evaluate needs outcomes and stakes for exactly two groups")
    g1, g2 = list(outcomes)
    o1, o2 = outcomes[g1], outcomes[g2]
    r1, r2 = (s.r if isinstance(s, Stakes) else float(s) for s in (stakes[g1], stakes[g2]))

    tpr_gap = abs(o1.profile.tpr - o2.profile.tpr)
    fpr_gap = abs(o1.profile.fpr - o2.profile.fpr)
    eb = ErrorRateBalance(tpr_gap, fpr_gap, tpr_gap <= tol and fpr_gap <= tol)

    if o1.ppv is None or o2.ppv is None:
        missing = [g for g, o in ((g1, o1), (g2, o2)) if o.ppv is None]
        pp = PredictiveParity(None, False, True, f"no favorable decisions in {', '.join(missing)}")
    else:
        gap = abs(o1.ppv - o2.ppv)
        pp = PredictiveParity(gap, gap <= tol, False)

    es_gap = abs(r1 - r2)
    es = EqualStakes(es_gap, es_gap <= tol)

    margins = {g: o.prevalence - o.sincere_prevalence for g, o in ((g1, o1), (g2, o2))}
    ai = AlignedIncentives(margins, all(m >= -tol for m in margins.values()))

    return FairnessReport((g1, g2), eb, pp, es, ai, tol)
