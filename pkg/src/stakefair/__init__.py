"""Fair classification with behavioral responses: rules, stakes and audits."""

from .classifier import ErrorProfile, TabulatedRule, TwoPieceRule, error_profile, informativeness
from .distributions import (
    DominanceVerdict,
    Normal,
    PiecewiseLinearCdf,
    SignalModel,
    cdf,
    classify_dominance,
    quantile,
    sample,
    verify_mlrp,
)
from .equilibrium import (
    EquilibriumOutcome,
    GroupEnvironment,
    Stakes,
    compliance_cutoff,
    ppv,
    solve_equilibrium,
)
from .estimator import StakesDesignClassifier
from .exceptions import (
    ConstructionError,
    DomainError,
    InfeasibleDesignError,
    ScenarioError,
    SupportError,
)
from .fairness import FairnessReport, evaluate
from .mechanism import (
    EqualStakesResult,
    MechanismDesign,
    audit,
    choose_threshold,
    design_stakes_equal,
    design_stakes_theorem1,
    equalize_error_rates,
    run_mechanism,
    sweep_shared_stakes,
)
from .montecarlo import SimulationResult, compare, simulate

__version__ = "0.1.0"
