"""scikit-learn style facade over the mechanism.

``StakesDesignClassifier.fit`` takes the two groups' environments (or a
:class:`~stakefair.scenario.Scenario`) instead of labelled data, since the
construction works from known cost and signal distributions.  After fitting,
the estimator behaves like a group-aware randomized classifier over raw
signals.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted, column_or_1d

from .classifier import acceptance_probability
from .fairness import DEFAULT_TOL
from .mechanism import run_mechanism
from .scenario import Scenario


class StakesDesignClassifier(ClassifierMixin, BaseEstimator):
    """Group-specific randomized rules with stakes that equalize prevalence.

    Parameters
    ----------
    mode : {"theorem1", "equal_stakes"}
        Differential stakes (always feasible) or one shared stake.
    base_reward : float
        Stakes of the reference group in ``"theorem1"`` mode.
    tol : float
        Tolerance of the fairness report.
    random_state : int, Generator or None
        Source of randomness for :meth:`predict`.

    Attributes
    ----------
    design_ : MechanismDesign
    groups_ : ndarray of group names
    classes_ : ndarray ``[0, 1]``
    stakes_ : dict of group name to net stakes
    """

    def __init__(self, mode="theorem1", base_reward=0.0, tol=DEFAULT_TOL, random_state=None):
        self.mode = mode
        self.base_reward = base_reward
        self.tol = tol
        self.random_state = random_state

    def fit(self, X, y=None):
        envs = X.envs if isinstance(X, Scenario) else dict(X)
        self.design_ = run_mechanism(envs, self.mode, self.base_reward, self.tol)
        self.groups_ = np.array(list(envs), dtype=object)
        self.classes_ = np.array([0, 1])
        self.stakes_ = {g: s.r for g, s in self.design_.stakes.items()}
        return self

    def _validate(self, X, groups):
        check_is_fitted(self, "design_")
        s = check_array(X, ensure_2d=False, dtype=float)
        if s.ndim == 2:
            if s.shape[1] != 1:
                raise ValueError(f"expected a single signal column, got shape {s.shape}")
            s = s[:, 0]
        g = column_or_1d(np.asarray(groups, dtype=object))
        if len(g) != len(s):
            raise ValueError(f"{len(s)} signals but {len(g)} group labels")
        unknown = set(g) - set(self.groups_)
        if unknown:
            raise ValueError(f"unknown groups {sorted(map(str, unknown))}")
        return s, g

    def predict_proba(self, X, groups):
        """``[P(d=0), P(d=1)]`` per signal under its group's rule."""
        s, g = self._validate(X, groups)
        p = np.empty(len(s))
        for name, rule in self.design_.rules.items():
            mask = g == name
            p[mask] = acceptance_probability(rule, s[mask])
        return np.column_stack([1.0 - p, p])

    def predict(self, X, groups):
        """Randomized decisions drawn from :meth:`predict_proba`."""
        p = self.predict_proba(X, groups)[:, 1]
        rng = check_random_state(self.random_state)
        return (rng.random_sample(len(p)) < p).astype(int)

    def score(self, X, y, groups):
        """Mean accuracy of randomized decisions against behavior labels ``y``."""
        y = column_or_1d(y)
        return float(np.mean(self.predict(X, groups) == y))

    @property
    def fairness_report_(self):
        check_is_fitted(self, "design_")
        return self.design_.report
