"""Seeded agent-population simulation used to cross-check analytic equilibria."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from .classifier import DecisionRule, acceptance_probability, error_profile
from .distributions import sample
from .equilibrium import EquilibriumOutcome, GroupEnvironment, compliance_cutoff

CHUNK = 1 << 16
Z_LIMIT = 4.0


@dataclass(frozen=True)
class GroupSample:
    n_agents: int
    n_compliant: int
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def prevalence(self) -> float:
        return self.n_compliant / self.n_agents

    @property
    def tpr(self) -> float:
        return self.tp / self.n_compliant if self.n_compliant else float("nan")

    @property
    def fpr(self) -> float:
        n0 = self.n_agents - self.n_compliant
        return self.fp / n0 if n0 else float("nan")

    @property
    def ppv(self) -> float:
        pos = self.tp + self.fp
        return self.tp / pos if pos else float("nan")

    def rates(self) -> dict:
        n = self.n_agents
        return {
            "prevalence": self.prevalence,
            "tpr": self.tpr,
            "fpr": self.fpr,
            "ppv": self.ppv,
            "tp": self.tp / n,
            "fp": self.fp / n,
            "fn": self.fn / n,
            "tn": self.tn / n,
        }

    def standard_errors(self) -> dict:
        """Binomial standard errors of :meth:`rates` at their empirical values."""
        out = {}
        denoms = self.denominators()
        for k, v in self.rates().items():
            d = denoms[k]
            out[k] = math.sqrt(v * (1 - v) / d) if d and not math.isnan(v) else float("nan")
        return out

    def denominators(self) -> dict:
        n = self.n_agents
        return {
            "prevalence": n,
            "tpr": self.n_compliant,
            "fpr": n - self.n_compliant,
            "ppv": self.tp + self.fp,
            "tp": n,
            "fp": n,
            "fn": n,
            "tn": n,
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rates"] = self.rates()
        d["standard_errors"] = self.standard_errors()
        return d


@dataclass(frozen=True)
class SimulationResult:
    seed: int
    groups: dict

    def to_dict(self) -> dict:
        return {"seed": self.seed, "groups": {g: s.to_dict() for g, s in self.groups.items()}}


def _simulate_chunk(env, rule, c_hat, n, rng):
    costs = sample(env.cost, rng, n)
    comply = costs <= c_hat
    s0 = sample(env.signals.f0, rng, n)
    s1 = sample(env.signals.f1, rng, n)
    signals = np.where(comply, s1, s0)
    accept = rng.random(n) < acceptance_probability(rule, signals)
    tp = int(np.count_nonzero(comply & accept))
    fn = int(np.count_nonzero(comply & ~accept))
    fp = int(np.count_nonzero(~comply & accept))
    tn = n - tp - fn - fp
    return tp, fp, fn, tn


def simulate(
    envs: Mapping[str, GroupEnvironment],
    rules: Mapping[str, DecisionRule],
    n: int,
    seed: int,
) -> SimulationResult:
    """Draw ``n`` agents per group and tally decisions against behavior.

    Each agent draws a cost, complies iff the cost is at most the analytic
    cutoff for its group, emits a signal from the matching signal
    distribution and receives a favorable decision with the rule's acceptance
    probability.  Agents are processed in fixed blocks; block ``k`` of the
    ``i``-th group uses a generator seeded by ``(seed, i, k)``, so results do
    not depend on processing order.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    groups = {}
    for gi, (g, env) in enumerate(envs.items()):
        if env.stakes is None:
            raise ValueError(f"group {g} has no stakes")
        c_hat = compliance_cutoff(error_profile(rules[g], env.signals), env.stakes)
        counts = np.zeros(4, dtype=np.int64)
        for k, start in enumerate(range(0, n, CHUNK)):
            m = min(CHUNK, n - start)
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(gi, k)))
            counts += _simulate_chunk(env, rules[g], c_hat, m, rng)
        tp, fp, fn, tn = (int(c) for c in counts)
        groups[g] = GroupSample(n, tp + fn, tp, fp, fn, tn)
    return SimulationResult(seed, groups)


@dataclass(frozen=True)
class Comparison:
    z_scores: dict
    passed: bool
    limit: float = Z_LIMIT

    def failures(self) -> list:
        return [
            (g, k, z) for g, cells in self.z_scores.items() for k, z in cells.items() if abs(z) > self.limit
        ]

    def to_dict(self) -> dict:
        return {"z_scores": self.z_scores, "passed": self.passed, "limit": self.limit}


def _analytic_cells(o: EquilibriumOutcome) -> dict:
    return {
        "prevalence": o.prevalence,
        "tpr": o.profile.tpr,
        "fpr": o.profile.fpr,
        "ppv": o.ppv,
        **o.confusion.to_dict(),
    }


def compare(
    sim: SimulationResult,
    analytic: Mapping[str, EquilibriumOutcome],
    limit: float = Z_LIMIT,
) -> Comparison:
    """Per-cell z-scores of simulated rates against analytic ones.

    The standard error uses the analytic probability, i.e. the binomial
    spread expected if the analytic model is right.  Cells whose standard
    error is zero (probability 0 or 1) must match exactly; their z-score is
    0 on a match and infinite otherwise.
    """
    if set(sim.groups) != set(analytic):
        raise ValueError("simulation and analytic outcomes cover different groups")
    z = {}
    for g, s in sim.groups.items():
        emp = s.rates()
        denoms = s.denominators()
        cells = {}
        for k, p in _analytic_cells(analytic[g]).items():
            d = denoms[k]
            if p is None or d == 0:
                continue
            se = math.sqrt(p * (1 - p) / d)
            diff = emp[k] - p
            if se == 0.0:
                cells[k] = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
            else:
                cells[k] = diff / se
        z[g] = cells
    passed = all(abs(v) <= limit for cells in z.values() for v in cells.values())
    return Comparison(z, passed, limit)
