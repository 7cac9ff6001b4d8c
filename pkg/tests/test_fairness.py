import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from envgen import DEFAULT_SIGNALS, example_envs
from stakefair import ErrorProfile, FairnessReport, GroupEnvironment, Normal, Stakes, evaluate, run_mechanism
from stakefair.distributions import cdf
from stakefair.equilibrium import equilibrium_from_profile

PROFILE = ErrorProfile(0.8, 0.4)


def outcome(cost, r, profile=PROFILE):
    return equilibrium_from_profile(cost, profile, r)


def test_identical_outcomes_all_pass():
    o = outcome(Normal(0, 1), 2.0)
    rep = evaluate({"X": o, "Y": o}, {"X": Stakes(2.0), "Y": Stakes(2.0)})
    assert rep.all_passed
    assert rep.error_rate_balance.tpr_gap == 0 and rep.error_rate_balance.fpr_gap == 0
    assert rep.predictive_parity.ppv_gap == 0
    assert rep.equal_stakes.stakes_gap == 0


def test_example1_theorem1_report():
    d = run_mechanism(example_envs(1), "theorem1")
    rep = d.report
    gap = d.error_rates.target_tpr - d.error_rates.target_fpr
    assert rep.error_rate_balance.passed
    assert rep.predictive_parity.passed
    assert rep.aligned_incentives.passed
    assert not rep.equal_stakes.passed
    assert rep.equal_stakes.stakes_gap == pytest.approx(1 / gap, rel=1e-9)


def test_example3_equal_stakes_report():
    d = run_mechanism(example_envs(3), "equal_stakes")
    rep = d.report
    assert rep.error_rate_balance.passed and rep.predictive_parity.passed and rep.equal_stakes.passed
    assert not rep.aligned_incentives.passed
    phi_m1 = cdf(Normal(0, 1), -1)
    # X: sincere 0.5; Y: sincere Phi(1)
    assert rep.aligned_incentives.margins["X"] == pytest.approx(-(0.5 - phi_m1), abs=1e-4)
    assert rep.aligned_incentives.margins["Y"] == pytest.approx(-((1 - phi_m1) - phi_m1), abs=1e-4)


def test_undefined_ppv_fails_with_flag():
    none = ErrorProfile(0.0, 0.0)
    o1 = outcome(Normal(0, 1), 0.0, none)
    o2 = outcome(Normal(0, 1), 0.0, none)
    rep = evaluate({"X": o1, "Y": o2}, {"X": 0.0, "Y": 0.0})
    assert rep.predictive_parity.undefined
    assert not rep.predictive_parity.passed
    assert rep.predictive_parity.reason


def _random_pair(args):
    m1, s1, m2, s2, r1, r2 = args
    o = {"X": outcome(Normal(m1, s1), r1), "Y": outcome(Normal(m2, s2), r2)}
    return o, {"X": Stakes(r1), "Y": Stakes(r2)}


pairs = st.tuples(st.floats(-3, 3), st.floats(0.3, 3), st.floats(-3, 3), st.floats(0.3, 3), st.floats(-5, 5), st.floats(-5, 5))


@given(pairs)
def test_label_swap_symmetry(pair):
    o, s = _random_pair(pair)
    a = evaluate(o, s)
    b = evaluate({"Y": o["Y"], "X": o["X"]}, {"Y": s["Y"], "X": s["X"]})
    assert a.error_rate_balance == b.error_rate_balance
    assert a.predictive_parity == b.predictive_parity
    assert a.equal_stakes == b.equal_stakes
    assert a.aligned_incentives.margins == b.aligned_incentives.margins


@given(pairs, st.floats(0, 0.5), st.floats(0, 0.5))
def test_tolerance_monotone(pair, t1, t2):
    lo, hi = sorted((t1, t2))
    o, s = _random_pair(pair)
    a, b = evaluate(o, s, lo), evaluate(o, s, hi)
    for k, ok in a.verdicts.items():
        if ok:
            assert b.verdicts[k]


@given(pairs)
def test_error_rate_balance_ignores_costs(pair):
    o, s = _random_pair(pair)
    base = evaluate(o, s).error_rate_balance
    o2 = {"X": outcome(Normal(0, 1), 1.0), "Y": outcome(Normal(2, 0.5), -1.0)}
    assert evaluate(o2, s).error_rate_balance == base


def test_report_json_round_trip():
    rep = run_mechanism(example_envs(1), "theorem1").report
    back = FairnessReport.from_dict(json.loads(json.dumps(rep.to_dict())))
    assert back == rep


def test_render_has_every_criterion():
    text = run_mechanism(example_envs(3), "equal_stakes").report.render()
    for name in ("error-rate balance", "predictive parity", "equal stakes", "aligned incentives"):
        assert name in text
    assert "FAIL" in text


def test_evaluate_requires_two_groups():
    o = outcome(Normal(0, 1), 0.0)
    with pytest.raises(ValueError):
        evaluate({"X": o}, {"X": 0.0})


def test_accept_all_pp_gap_is_sincere_gap():
    envs = example_envs(1)
    accept = ErrorProfile(1.0, 1.0)
    o = {g: equilibrium_from_profile(envs[g].cost, accept, 0.0) for g in envs}
    rep = evaluate(o, {"X": 0.0, "Y": 0.0})
    assert rep.error_rate_balance.passed
    assert rep.equal_stakes.passed
    assert rep.aligned_incentives.passed
    assert all(m == 0 for m in rep.aligned_incentives.margins.values())
    sincere_gap = envs["X"].sincere_prevalence - envs["Y"].sincere_prevalence
    assert rep.predictive_parity.ppv_gap == pytest.approx(abs(sincere_gap), abs=1e-15)
    assert not rep.predictive_parity.passed


def test_shared_stakes_identical_groups():
    env = GroupEnvironment(Normal(0.2, 1.0), DEFAULT_SIGNALS)
    o = outcome(env.cost, 1.0)
    assert evaluate({"X": o, "Y": o}, {"X": 1.0, "Y": 1.0}).all_passed
