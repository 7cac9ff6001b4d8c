class StakefairError(Exception):
    """Base class for errors raised by stakefair."""


class DomainError(StakefairError, ValueError):
    """An argument lies outside the domain of an operation."""


class SupportError(DomainError):
    """A rule threshold sits where a signal CDF is already 0 or 1."""


class ConstructionError(StakefairError):
    """The mechanism construction cannot be carried out for these inputs."""


class InfeasibleDesignError(ConstructionError):
    """Equal stakes cannot equalize prevalence (cost distributions are ordered)."""


class ScenarioError(StakefairError, ValueError):
    """A scenario file failed to parse or validate."""
