"""Randomized decision rules over signals and the error rates they induce."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .distributions import SignalModel, cdf
from .exceptions import DomainError, SupportError


def _check_prob(name, v):
    if not (0.0 <= v <= 1.0) or math.isnan(v):
        raise DomainError(f"{name} must be a probability, got {v}")


@dataclass(frozen=True)
class TwoPieceRule:
    """Accept with probability ``a`` below ``threshold`` and ``b`` at or above it."""

    threshold: float
    a: float
    b: float

    def __post_init__(self):
        if not math.isfinite(self.threshold):
            raise DomainError(f"threshold must be finite, got {self.threshold}")
        _check_prob("a", self.a)
        _check_prob("b", self.b)

    @property
    def breaks(self) -> tuple:
        return (self.threshold,)

    @property
    def values(self) -> tuple:
        return (self.a, self.b)

    def to_dict(self) -> dict:
        return {"two_piece": {"s": self.threshold, "a": self.a, "b": self.b}}


@dataclass(frozen=True)
class TabulatedRule:
    """Piecewise-constant acceptance probability.

    ``values[0]`` applies for ``s < breaks[0]``, ``values[i]`` on
    ``[breaks[i-1], breaks[i])`` and ``values[-1]`` for ``s >= breaks[-1]``,
    so there is always one more value than break.
    """

    breaks: tuple
    values: tuple

    def __post_init__(self):
        breaks = tuple(float(b) for b in self.breaks)
        values = tuple(float(v) for v in self.values)
        if len(values) != len(breaks) + 1:
            raise DomainError("tabulated rule needs len(values) == len(breaks) + 1")
        if any(not math.isfinite(b) for b in breaks):
            raise DomainError("tabulated breaks must be finite")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            raise DomainError("tabulated breaks must be strictly increasing")
        for v in values:
            _check_prob("tabulated value", v)
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "values", values)

    def to_dict(self) -> dict:
        return {"tabulated": {"breaks": list(self.breaks), "values": list(self.values)}}


DecisionRule = Union[TwoPieceRule, TabulatedRule]


def rule_from_dict(data: dict) -> DecisionRule:
    if not isinstance(data, dict) or len(data) != 1:
        raise DomainError('rule literal must be {"two_piece": {...}} or {"tabulated": {...}}')
    (kind, body), = data.items()
    try:
        if kind == "two_piece":
            return TwoPieceRule(float(body["s"]), float(body["a"]), float(body["b"]))
        if kind == "tabulated":
            return TabulatedRule(tuple(body["breaks"]), tuple(body["values"]))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad {kind} rule literal {body!r}: {exc}") from None
    raise DomainError(f"unknown rule kind {kind!r}")


def acceptance_probability(rule: DecisionRule, s):
    """Probability of the favorable decision for signal(s) ``s``."""
    s = np.asarray(s, dtype=float)
    idx = np.searchsorted(np.asarray(rule.breaks), s, side="right")
    out = np.asarray(rule.values)[idx]
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ErrorProfile:
    tpr: float
    fpr: float

    def __post_init__(self):
        _check_prob("tpr", self.tpr)
        _check_prob("fpr", self.fpr)

    @property
    def is_informative(self) -> bool:
        return self.tpr > self.fpr

    def to_dict(self) -> dict:
        return {"tpr": self.tpr, "fpr": self.fpr}


def _clip01(x):
    return min(1.0, max(0.0, x))


def error_profile(rule: DecisionRule, model: SignalModel) -> ErrorProfile:
    """True and false positive rates of ``rule`` under ``model``.

    Both rates are exact sums of acceptance probabilities times signal-CDF
    increments, so no quadrature is involved.  A two-piece rule with
    ``a != b`` whose threshold lies where ``F1`` is already 0 or ``F0`` is
    already 1 raises :class:`SupportError`.
    """
    if isinstance(rule, TwoPieceRule):
        m = cdf(model.f1, rule.threshold)
        ell = cdf(model.f0, rule.threshold)
        if rule.a != rule.b and not (m > 0.0 and ell < 1.0):
            raise SupportError(
                f"threshold {rule.threshold} outside signal support "
                f"(F1={m:.3g}, F0={ell:.3g})"
            )
        tpr = rule.a * m + rule.b * (1.0 - m)
        fpr = rule.a * ell + rule.b * (1.0 - ell)
        return ErrorProfile(_clip01(tpr), _clip01(fpr))

    rates = []
    for dist in (model.f1, model.f0):
        edges = np.concatenate([[0.0], np.atleast_1d(cdf(dist, rule.breaks)), [1.0]])
        rates.append(_clip01(float(np.dot(rule.values, np.diff(edges)))))
    return ErrorProfile(*rates)


def informativeness(profile: ErrorProfile) -> float:
    """``tpr - fpr``; positive exactly when the rule beats random assignment."""
    return profile.tpr - profile.fpr
