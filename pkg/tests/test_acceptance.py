"""The eight acceptance criteria, one test each.

Every test records a ``PASS``/``FAIL`` line (shown in the terminal summary
and on stdout) before asserting.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from envgen import example_envs, random_environments
from stakefair import (
    InfeasibleDesignError,
    Normal,
    classify_dominance,
    compare,
    run_mechanism,
    simulate,
    solve_equilibrium,
    sweep_shared_stakes,
)
from stakefair.distributions import PiecewiseLinearCdf, cdf, isf, quantile, sf

PHI_1 = 0.8413447460685429
PHI_M1 = 0.15865525393145705


@pytest.fixture(scope="module")
def envs500():
    return random_environments(500)


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def close(x, y, tol):
    return abs(x - y) <= tol


def test_criterion_1_example1():
    d, dt = timed(lambda: run_mechanism(example_envs(1), "theorem1"))
    gap = d.error_rates.target_tpr - d.error_rates.target_fpr
    pi = {g: o.prevalence for g, o in d.outcomes.items()}
    v = d.report.verdicts
    checks = {
        "r^X=0": d.stakes["X"].r == 0.0,
        "r^Y=1/gap": close(d.stakes["Y"].r, 1 / gap, 1e-9 / gap),
        "pi=0.5": all(close(p, 0.5, 1e-6) for p in pi.values()),
        "Y sincere": close(d.outcomes["Y"].sincere_prevalence, 0.158655, 1e-4),
        "EB/PP/AI pass, ES fail": v["error_rate_balance"] and v["predictive_parity"]
        and v["aligned_incentives"] and not v["equal_stakes"],
        "runtime": dt < 1.0,
    }
    bad = [k for k, ok in checks.items() if not ok]
    record(1, not bad, f"r^Y={d.stakes['Y'].r:.6f} pi={pi} t={dt:.3f}s failed={bad}")


@pytest.mark.parametrize(
    "crit,i,c_bar,pi,ai",
    [(2, 2, 2.0, PHI_1, True), (3, 3, -2.0, PHI_M1, False)],
)
def test_criteria_2_3_equal_stakes_examples(crit, i, c_bar, pi, ai):
    d, dt = timed(lambda: run_mechanism(example_envs(i), "equal_stakes"))
    gap = d.error_rates.target_tpr - d.error_rates.target_fpr
    eq = d.equal_stakes
    v = d.report.verdicts
    checks = {
        "c_bar": close(eq.crossing, c_bar, 1e-8),
        "r=c_bar/gap": all(close(s.r, c_bar / gap, 1e-8 / gap) for s in d.stakes.values()),
        "pi": all(close(o.prevalence, pi, 1e-4) for o in d.outcomes.values()),
        "EB/PP/ES pass": v["error_rate_balance"] and v["predictive_parity"] and v["equal_stakes"],
        "AI verdict": v["aligned_incentives"] is ai,
        "runtime": dt < 1.0,
    }
    bad = [k for k, ok in checks.items() if not ok]
    record(crit, not bad, f"c_bar={eq.crossing:.12f} r={eq.r:.6f} AI={v['aligned_incentives']} t={dt:.3f}s failed={bad}")


def _theorem1_failures(envs):
    d = run_mechanism(envs, "theorem1")
    er = d.error_rates
    out = []
    for g, gd in er.groups.items():
        if not (0 <= gd.a <= 1 and 0 <= gd.b <= 1):
            out.append(f"{g}: a/b outside [0,1]")
    if not (er.delta > 0 and er.target_tpr - er.target_fpr == pytest.approx(er.delta, abs=1e-15)):
        out.append("gap != delta")
    cx, cy = (d.outcomes[g].confusion.as_tuple() for g in ("X", "Y"))
    if max(abs(p - q) for p, q in zip(cx, cy)) > 1e-8:
        out.append("confusion mismatch")
    if min(d.report.aligned_incentives.margins.values()) < -1e-12:
        out.append("AI margin")
    return out


def test_criterion_4_theorem1_property_suite(envs500):
    failures, dt = timed(lambda: [(k, f) for k, e in enumerate(envs500) for f in _theorem1_failures(e)])
    ok = not failures and dt < 30
    record(4, ok, f"500 environments, failures={len(failures)} t={dt:.2f}s {failures[:3]}")


def _dichotomy_mismatch(envs):
    verdict = classify_dominance(envs["X"].cost, envs["Y"].cost)
    try:
        d = run_mechanism(envs, "equal_stakes")
    except InfeasibleDesignError:
        return None if verdict.is_strict_dominance else "infeasible without dominance"
    if verdict.is_strict_dominance:
        return "feasible under dominance"
    # apply the shared stake through the full equilibrium solver
    pis = [solve_equilibrium(envs[g].with_stakes(d.stakes[g].r), d.rules[g]).prevalence for g in envs]
    if abs(pis[0] - pis[1]) > 1e-8:
        return f"prevalence gap {abs(pis[0] - pis[1]):.3g}"
    return None


def test_criterion_5_dichotomy(envs500):
    results, dt = timed(lambda: [(k, _dichotomy_mismatch(e)) for k, e in enumerate(envs500)])
    bad = [(k, m) for k, m in results if m]
    n_dom = sum(classify_dominance(e["X"].cost, e["Y"].cost).is_strict_dominance for e in envs500)
    record(5, not bad, f"dominance={n_dom} feasible={500 - n_dom} mismatches={len(bad)} t={dt:.2f}s {bad[:3]}")


def test_criterion_6_infeasibility_sweep():
    envs = example_envs(1)
    rules = run_mechanism(envs, "theorem1").rules
    rows = sweep_shared_stakes(envs, rules, np.linspace(0, 10, 101))
    gaps = [row["ppv_gap"] for row in rows]
    signs = {np.sign(g) for g in gaps}
    ok = len(rows) == 101 and signs in ({1.0}, {-1.0})
    record(6, ok, f"101 points, min |gap|={min(map(abs, gaps)):.3g}, signs={sorted(signs)}")


def test_criterion_7_monte_carlo():
    envs = example_envs(1)
    d = run_mechanism(envs, "theorem1")
    envs = {g: envs[g].with_stakes(d.stakes[g].r) for g in envs}
    sim, dt = timed(lambda: simulate(envs, d.rules, 200_000, seed=20261018))
    rerun = simulate(envs, d.rules, 200_000, seed=20261018)
    cmp = compare(sim, d.outcomes, limit=4.0)
    z_max = max(abs(z) for cells in cmp.z_scores.values() for z in cells.values())
    ok = cmp.passed and sim == rerun and dt < 10
    record(7, ok, f"n=200000/group max|z|={z_max:.2f} identical_rerun={sim == rerun} t={dt:.2f}s")


def _crossing_residuals(envs_list):
    worst = 0.0
    count = 0
    for hx, hy in envs_list:
        v = classify_dominance(hx, hy)
        for c in v.points:
            worst = max(worst, abs(cdf(hx, c) - cdf(hy, c)))
            count += 1
    return worst, count


def test_criterion_8_numerics(envs500):
    # beyond ~5.5 sd cdf(x) sits within an ulp of 1, so the upper tail is
    # checked through the survival pair instead
    grid = np.linspace(-5, 5, 1000)
    tail = np.linspace(0, 8, 1000)
    round_trip = 0.0
    for mean, sd in [(0, 1), (1, 1), (0, 2), (-1, 1), (2.5, 0.3)]:
        h = Normal(mean, sd)
        for z in grid:
            x = mean + sd * z
            round_trip = max(round_trip, abs(quantile(h, cdf(h, x)) - x))
        for z in tail:
            x = mean + sd * z
            round_trip = max(round_trip, abs(isf(h, sf(h, x)) - x))
    wavy = PiecewiseLinearCdf(((-3, 0), (-2, 1 / 6 + 0.05), (-1, 2 / 6 - 0.05), (1, 4 / 6 + 0.05), (2, 5 / 6 - 0.05), (3, 1)))
    pairs = [(Normal(0, 2), Normal(1, 1)), (Normal(0, 2), Normal(-1, 1)), (wavy, Normal(0, 1.5))]
    pairs += [(e["X"].cost, e["Y"].cost) for e in envs500]
    worst, count = _crossing_residuals(pairs)
    ok = round_trip <= 1e-8 and worst <= 1e-10
    record(8, ok, f"round trip max err={round_trip:.2e}; {count} crossings, max |dH|={worst:.2e}")
