"""Scenario files: two groups' costs, signals, stakes/rewards, rules and run options.

A scenario is JSON with an explicit ``version``::

    {
      "version": 1,
      "groups": {
        "X": {"cost": {"normal": {"mean": 0, "sd": 1}},
              "signals": {"f0": {"normal": {"mean": 0, "sd": 1}},
                          "f1": {"normal": {"mean": 1, "sd": 1}}},
              "stakes": 0.0,
              "rule": {"two_piece": {"s": 0.5, "a": 0.28, "b": 1.0}}},
        "Y": {...}
      },
      "options": {"mode": "theorem1", "tol": 1e-9, "seed": 0, "n": 200000}
    }

``stakes`` (net reward) and ``rewards`` (``{"r1": ..., "r0": ...}``) are
alternatives; ``rule`` is only needed for audits and simulations of a
user-supplied design.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from .classifier import DecisionRule, rule_from_dict
from .distributions import Normal, SignalModel
from .distributions import from_dict as dist_from_dict
from .equilibrium import GroupEnvironment, Stakes
from .exceptions import DomainError, ScenarioError

SCENARIO_VERSION = 1
DEFAULT_SIGNALS = SignalModel(Normal(0.0, 1.0), Normal(1.0, 1.0))

_OPTION_TYPES = {"mode": str, "tol": float, "seed": int, "n": int, "base_reward": float}
_DEFAULT_OPTIONS = {"mode": "theorem1", "tol": 1e-9, "seed": 0, "n": 200_000, "base_reward": 0.0}


@dataclass(frozen=True)
class Scenario:
    envs: dict
    rules: dict = field(default_factory=dict)
    options: dict = field(default_factory=lambda: dict(_DEFAULT_OPTIONS))
    name: str = ""

    @property
    def groups(self) -> tuple:
        return tuple(self.envs)

    @property
    def has_rules(self) -> bool:
        return len(self.rules) == len(self.envs)

    @property
    def has_stakes(self) -> bool:
        return all(env.stakes is not None for env in self.envs.values())

    def with_design(self, rules: dict, stakes: dict) -> "Scenario":
        envs = {g: replace(env, stakes=stakes[g]) for g, env in self.envs.items()}
        return replace(self, envs=envs, rules=dict(rules))

    def to_dict(self) -> dict:
        groups = {}
        for g, env in self.envs.items():
            d = {"cost": env.cost.to_dict(), "signals": env.signals.to_dict()}
            if env.stakes is not None:
                d["stakes"] = env.stakes.r
            if g in self.rules:
                d["rule"] = self.rules[g].to_dict()
            groups[g] = d
        return {"version": SCENARIO_VERSION, "groups": groups, "options": dict(self.options)}


def _line_of(text: Optional[str], needle: str) -> str:
    if not text:
        return ""
    for i, line in enumerate(text.splitlines(), 1):
        if f'"{needle}"' in line:
            return f" (line {i})"
    return ""


def from_dict(data: dict, text: Optional[str] = None, name: str = "") -> Scenario:
    """Validate a parsed scenario; ``text`` (the raw file) is used for line hints."""

    def fail(path, msg, key=None):
        raise ScenarioError(f"{path}: {msg}{_line_of(text, key or path.split('.')[-1])}")

    if not isinstance(data, dict):
        fail("<root>", "scenario must be a JSON object")
    version = data.get("version")
    if version != SCENARIO_VERSION:
        fail("version", f"expected {SCENARIO_VERSION}, got {version!r}")
    unknown = set(data) - {"version", "groups", "options", "name"}
    if unknown:
        fail("<root>", f"unknown keys {sorted(unknown)}", sorted(unknown)[0])
    groups = data.get("groups")
    if not isinstance(groups, dict) or len(groups) != 2:
        n = len(groups) if isinstance(groups, dict) else "no"
        fail("groups", f"exactly two groups required, got {n}")

    envs, rules = {}, {}
    for g, body in groups.items():
        path = f"groups.{g}"
        if not isinstance(body, dict):
            fail(path, "group must be an object", g)
        extra = set(body) - {"cost", "signals", "stakes", "rewards", "rule"}
        if extra:
            fail(path, f"unknown keys {sorted(extra)}", sorted(extra)[0])
        try:
            cost = dist_from_dict(body["cost"])
        except KeyError:
            fail(path, "missing 'cost'", g)
        except DomainError as exc:
            fail(f"{path}.cost", str(exc), g)
        sig = body.get("signals")
        if not isinstance(sig, dict) or set(sig) != {"f0", "f1"}:
            fail(f"{path}.signals", "need exactly 'f0' and 'f1'", g)
        try:
            signals = SignalModel(dist_from_dict(sig["f0"]), dist_from_dict(sig["f1"]))
        except DomainError as exc:
            fail(f"{path}.signals", str(exc), g)

        if "stakes" in body and "rewards" in body:
            fail(path, "give either 'stakes' or 'rewards', not both", "rewards")
        stakes = None
        try:
            if "stakes" in body:
                stakes = Stakes(float(body["stakes"]))
            elif "rewards" in body:
                rw = body["rewards"]
                stakes = Stakes.from_rewards(rw["r1"], rw["r0"])
        except (KeyError, TypeError, ValueError) as exc:
            fail(path, f"bad stakes/rewards: {exc}", g)
        envs[g] = GroupEnvironment(cost, signals, stakes)

        if "rule" in body:
            try:
                rules[g] = rule_from_dict(body["rule"])
            except DomainError as exc:
                fail(f"{path}.rule", str(exc), "rule")

    if rules and len(rules) != 2:
        fail("groups", "rules must be given for both groups or neither", "rule")

    options = dict(_DEFAULT_OPTIONS)
    raw = data.get("options", {})
    if not isinstance(raw, dict):
        fail("options", "must be an object")
    for k, v in raw.items():
        if k not in _OPTION_TYPES:
            fail(f"options.{k}", "unknown option", k)
        try:
            options[k] = _OPTION_TYPES[k](v)
        except (TypeError, ValueError):
            fail(f"options.{k}", f"expected {_OPTION_TYPES[k].__name__}, got {v!r}", k)
    options["mode"] = options["mode"].replace("-", "_")
    if options["mode"] not in ("theorem1", "equal_stakes"):
        fail("options.mode", f"unknown mode {options['mode']!r}", "mode")
    return Scenario(envs, rules, options, name or data.get("name", ""))


def loads(text: str, name: str = "") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return from_dict(data, text, name)


def load(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, name=path.stem)


EXAMPLE_COSTS = {
    1: (Normal(0.0, 1.0), Normal(1.0, 1.0)),
    2: (Normal(0.0, 2.0), Normal(1.0, 1.0)),
    3: (Normal(0.0, 2.0), Normal(-1.0, 1.0)),
}
EXAMPLE_MODES = {1: "theorem1", 2: "equal_stakes", 3: "equal_stakes"}
EXAMPLE_TITLES = {
    1: "Equalizing prevalence requires differential stakes",
    2: "Equalizing prevalence requires lifting up disadvantaged group Y",
    3: "Equalizing prevalence requires leveling down advantaged group Y",
}


def example(i: int) -> Scenario:
    """Built-in two-group cost scenario ``i`` with the default signal model."""
    if i not in EXAMPLE_COSTS:
        raise ScenarioError(f"unknown example {i}; choose 1, 2 or 3")
    hx, hy = EXAMPLE_COSTS[i]
    envs = {"X": GroupEnvironment(hx, DEFAULT_SIGNALS), "Y": GroupEnvironment(hy, DEFAULT_SIGNALS)}
    options = dict(_DEFAULT_OPTIONS, mode=EXAMPLE_MODES[i])
    return Scenario(envs, {}, options, name=f"example{i}")


def shipped_example_path(i: int):
    """Path to the JSON file equivalent to :func:`example` ``i``."""
    return resources.files("stakefair") / "scenarios" / f"example{i}.json"
