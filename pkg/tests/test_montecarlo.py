import dataclasses
import math

import pytest

from envgen import example_envs
from stakefair import GroupEnvironment, Normal, Stakes, TwoPieceRule, audit, compare, run_mechanism, simulate
from stakefair.montecarlo import GroupSample


def designed(i=1, mode="theorem1"):
    envs = example_envs(i)
    d = run_mechanism(envs, mode)
    envs = {g: envs[g].with_stakes(d.stakes[g].r) for g in envs}
    return envs, d.rules, d.outcomes


def test_sincere_prevalence_within_binomial_ci():
    envs = {g: e.with_stakes(0.0) for g, e in example_envs(1).items()}
    rules = {g: TwoPieceRule(0.5, 0.3, 0.9) for g in envs}
    n = 1_000_000
    sim = simulate(envs, rules, n, seed=5)
    for g, env in envs.items():
        h0 = env.sincere_prevalence
        assert abs(sim.groups[g].prevalence - h0) <= 4 * math.sqrt(h0 * (1 - h0) / n)


def test_example1_design_matches_analytic_and_across_groups():
    envs, rules, outcomes = designed()
    n = 200_000
    sim = simulate(envs, rules, n, seed=11)
    cmp = compare(sim, outcomes)
    assert cmp.passed, cmp.failures()
    x, y = sim.groups["X"].rates(), sim.groups["Y"].rates()
    for cell in ("tp", "fp", "fn", "tn"):
        p = outcomes["X"].confusion.to_dict()[cell]
        # difference of two independent proportions
        assert abs(x[cell] - y[cell]) <= 4 * math.sqrt(2 * p * (1 - p) / n)


def test_accept_all_rule():
    envs = {g: e.with_stakes(1.0) for g, e in example_envs(2).items()}
    rules = {g: TwoPieceRule(0.0, 1.0, 1.0) for g in envs}
    sim = simulate(envs, rules, 10_000, seed=2)
    outcomes, _ = audit(envs, rules)
    for s in sim.groups.values():
        assert s.tpr == 1.0 and s.fpr == 1.0
    assert compare(sim, outcomes).passed


def test_counts_consistent():
    envs, rules, _ = designed(2, "equal_stakes")
    sim = simulate(envs, rules, 12_345, seed=9)
    for s in sim.groups.values():
        assert s.tp + s.fp + s.fn + s.tn == s.n_agents == 12_345
        assert s.n_compliant == s.tp + s.fn
        assert s.tpr == s.tp / s.n_compliant


def test_reproducible_bit_identical():
    envs, rules, _ = designed()
    a = simulate(envs, rules, 150_000, seed=42)
    b = simulate(envs, rules, 150_000, seed=42)
    assert a == b
    assert simulate(envs, rules, 150_000, seed=43) != a


def test_perturbed_prevalence_detected():
    envs, rules, outcomes = designed()
    sim = simulate(envs, rules, 1_000_000, seed=3)
    bad = dict(outcomes)
    bad["Y"] = dataclasses.replace(outcomes["Y"], prevalence=outcomes["Y"].prevalence + 0.05)
    cmp = compare(sim, bad)
    assert not cmp.passed
    assert ("Y", "prevalence") in [(g, k) for g, k, _ in cmp.failures()]


def test_zero_se_cells_compare_exactly():
    envs = {g: e.with_stakes(1.0) for g, e in example_envs(1).items()}
    rules = {g: TwoPieceRule(0.0, 1.0, 1.0) for g in envs}
    outcomes, _ = audit(envs, rules)
    sim = simulate(envs, rules, 1000, seed=0)
    s = sim.groups["X"]
    sim.groups["X"] = GroupSample(s.n_agents, s.n_compliant, s.tp - 1, s.fp, s.fn + 1, s.tn)
    cmp = compare(sim, outcomes)
    assert math.isinf(cmp.z_scores["X"]["tpr"])
    assert not cmp.passed


def test_n_must_be_positive():
    envs, rules, _ = designed()
    with pytest.raises(ValueError):
        simulate(envs, rules, 0, seed=1)


def test_error_shrinks_with_n():
    envs, rules, outcomes = designed()
    errs = []
    for n in (10_000, 100_000, 1_000_000):
        sim = simulate(envs, rules, n, seed=8)
        rates = sim.groups["Y"].rates()
        analytic = {"prevalence": outcomes["Y"].prevalence, **outcomes["Y"].confusion.to_dict()}
        errs.append(max(abs(rates[k] - v) for k, v in analytic.items()))
    # 1/sqrt(n) scaling with slack for noise
    assert errs[2] < errs[0]
    assert errs[1] < 4 * 4 * math.sqrt(0.25 / 100_000)
    assert errs[2] < 4 * 4 * math.sqrt(0.25 / 1_000_000)


def test_result_serializes_with_seed():
    envs, rules, _ = designed()
    d = simulate(envs, rules, 1000, seed=77).to_dict()
    assert d["seed"] == 77
    assert set(d["groups"]["X"]["rates"]) >= {"prevalence", "tpr", "fpr", "ppv"}


def test_missing_stakes():
    envs = {"X": GroupEnvironment(Normal(0, 1), example_envs(1)["X"].signals),
            "Y": GroupEnvironment(Normal(0, 1), example_envs(1)["X"].signals, Stakes(1))}
    with pytest.raises(ValueError):
        simulate(envs, {g: TwoPieceRule(0, 0.2, 0.8) for g in envs}, 10, seed=0)
