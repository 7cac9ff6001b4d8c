"""Command-line entry point: ``stakefair {example,run,sweep,audit,simulate}``."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import distributions as dist
from . import scenario as scn
from .exceptions import ConstructionError, DomainError, ScenarioError
from .mechanism import MechanismDesign, audit, equalize_error_rates, run_mechanism, sweep_shared_stakes
from .montecarlo import compare, simulate

OUTPUT_DIR_ENV = "STAKEFAIR_OUTPUT_DIR"
EXIT_OK, EXIT_VALIDATION, EXIT_CONSTRUCTION = 0, 2, 3
FIGURE_GRID_N = 401


def g6(x) -> str:
    if x is None:
        return "undefined"
    return f"{x:.6g}"


def _describe(d) -> str:
    if isinstance(d, dist.Normal):
        return f"Normal(mean={g6(d.mean)}, sd={g6(d.sd)})"
    return f"PiecewiseLinearCdf({len(d.knots)} knots)"


def render_outcomes(outcomes: dict, stakes: dict) -> str:
    cols = ("r", "cutoff", "prevalence", "sincere", "tpr", "fpr", "ppv")
    lines = ["group " + "".join(f"{c:>12}" for c in cols)]
    for g, o in outcomes.items():
        vals = (stakes[g].r, o.cutoff, o.prevalence, o.sincere_prevalence, o.profile.tpr, o.profile.fpr, o.ppv)
        lines.append(f"{g:<6}" + "".join(f"{g6(v):>12}" for v in vals))
    return "\n".join(lines)


def render_design(design: MechanismDesign, title: str = "") -> str:
    er = design.error_rates
    out = []
    if title:
        out.append(title)
    out.append(f"mode: {design.mode}")
    for g, sig in design.signals.items():
        out.append(f"signals {g}: f0={_describe(sig.f0)}, f1={_describe(sig.f1)}")
    out.append(
        f"shared rates: TPR={g6(er.target_tpr)} FPR={g6(er.target_fpr)} "
        f"informativeness E=TPR-FPR={g6(er.target_tpr - er.target_fpr)}"
    )
    for g, gd in er.groups.items():
        out.append(
            f"rule {g}: threshold={g6(gd.threshold)} ell={g6(gd.ell)} m={g6(gd.m)} "
            f"a={g6(gd.a)} b={g6(gd.b)}"
        )
    if design.equal_stakes is not None:
        eq = design.equal_stakes
        out.append(f"cost CDF crossing c_bar={g6(eq.crossing)}, shared r={g6(eq.r)} (= c_bar/E)")
    if design.reference_group is not None:
        out.append(f"reference group (higher sincere prevalence): {design.reference_group}")
    out.append(render_outcomes(design.outcomes, design.stakes))
    out.append(design.report.render())
    return "\n".join(out)


def output_dir(arg) -> Path:
    path = Path(arg or os.environ.get(OUTPUT_DIR_ENV) or ".")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def figure_rows(design: MechanismDesign, costs: dict) -> list[dict]:
    """Cost CDFs and densities of both groups on a common grid."""
    gx, gy = design.groups
    lo, hi = dist.support_hull(costs.values(), 1e-4)
    lo = min(lo, *(o.cutoff for o in design.outcomes.values()))
    hi = max(hi, *(o.cutoff for o in design.outcomes.values()))
    grid = np.linspace(lo, hi, FIGURE_GRID_N)
    cx, cy = costs[gx], costs[gy]
    return [
        {
            "c": float(c),
            f"cdf_{gx}": dist.cdf(cx, c),
            f"cdf_{gy}": dist.cdf(cy, c),
            f"pdf_{gx}": dist.pdf(cx, c),
            f"pdf_{gy}": dist.pdf(cy, c),
        }
        for c in grid
    ]


def write_figure(design: MechanismDesign, costs: dict, directory: Path, stem: str) -> tuple[Path, Path]:
    rows = figure_rows(design, costs)
    fig_path = directory / f"{stem}_figure.csv"
    with open(fig_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    cut_path = directory / f"{stem}_cutoffs.csv"
    with open(cut_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["group", "cutoff", "prevalence", "sincere_prevalence", "stakes"])
        for g, o in design.outcomes.items():
            w.writerow([g, o.cutoff, o.prevalence, o.sincere_prevalence, design.stakes[g].r])
    return fig_path, cut_path


def _run_design(s: scn.Scenario, mode=None) -> MechanismDesign:
    return run_mechanism(
        s.envs,
        mode or s.options["mode"],
        base_reward=s.options["base_reward"],
        tol=s.options["tol"],
    )


def cmd_example(args) -> int:
    s = scn.example(args.id)
    design = _run_design(s)
    print(render_design(design, f"example {args.id}: {scn.EXAMPLE_TITLES[args.id]}"))
    directory = output_dir(args.out_dir)
    costs = {g: env.cost for g, env in s.envs.items()}
    fig, cut = write_figure(design, costs, directory, f"example{args.id}")
    print(f"figure data: {fig}\ncutoffs: {cut}")
    if args.json:
        _write_json(args.json, design.to_dict())
    return EXIT_OK


def cmd_run(args) -> int:
    s = scn.load(args.scenario)
    design = _run_design(s, args.mode)
    print(render_design(design, f"scenario {s.name}"))
    if args.json:
        _write_json(args.json, design.to_dict())
    if args.emit_scenario:
        designed = s.with_design(design.rules, design.stakes)
        _write_json(args.emit_scenario, designed.to_dict())
    return EXIT_OK


def _rules_for(s: scn.Scenario) -> dict:
    return s.rules if s.has_rules else equalize_error_rates(s.envs).rules


def cmd_sweep(args) -> int:
    s = scn.load(args.scenario)
    if args.steps < 1:
        raise ScenarioError("--steps must be >= 1")
    r_values = np.linspace(args.r_min, args.r_max, args.steps)
    rows = sweep_shared_stakes(s.envs, _rules_for(s), r_values)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def cmd_audit(args) -> int:
    s = scn.load(args.scenario)
    if not (s.has_rules and s.has_stakes):
        raise ScenarioError("audit needs an explicit 'rule' and stakes/rewards for both groups")
    outcomes, report = audit(s.envs, s.rules, s.options["tol"])
    print(render_outcomes(outcomes, {g: env.stakes for g, env in s.envs.items()}))
    print(report.render())
    if args.json:
        _write_json(
            args.json,
            {"outcomes": {g: o.to_dict() for g, o in outcomes.items()}, "fairness": report.to_dict()},
        )
    return EXIT_OK


def cmd_simulate(args) -> int:
    s = scn.load(args.scenario)
    n = args.n if args.n is not None else s.options["n"]
    seed = args.seed if args.seed is not None else s.options["seed"]
    if n < 1:
        raise ScenarioError("--n must be >= 1")
    if s.has_rules and s.has_stakes:
        envs, rules = s.envs, s.rules
    else:
        design = _run_design(s)
        s = s.with_design(design.rules, design.stakes)
        envs, rules = s.envs, s.rules
    outcomes, _ = audit(envs, rules, s.options["tol"])
    sim = simulate(envs, rules, n, seed)
    cmp = compare(sim, outcomes)
    print(f"seed {seed}, n {n} per group")
    keys = ("prevalence", "tpr", "fpr", "ppv", "tp", "fp", "fn", "tn")
    print("group cell        " + "".join(f"{k:>12}" for k in keys))
    for g, gs in sim.groups.items():
        rates = gs.rates()
        print(f"{g:<6}empirical   " + "".join(f"{g6(rates[k]):>12}" for k in keys))
        z = cmp.z_scores[g]
        print(f"{g:<6}z-score     " + "".join(f"{g6(z.get(k)) if k in z else '-':>12}" for k in keys))
    print(f"verdict: {'PASS' if cmp.passed else 'FAIL'} (|z| <= {cmp.limit:g})")
    if args.json:
        _write_json(args.json, {**sim.to_dict(), "comparison": cmp.to_dict()})
    return EXIT_OK if cmp.passed else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stakefair", description="Equilibria, stakes design and fairness audits for two-group strategic classification.")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("example", help="run a built-in two-group example")
    e.add_argument("id", type=int, choices=(1, 2, 3))
    e.add_argument("--out-dir", help=f"directory for figure CSVs (default ${OUTPUT_DIR_ENV} or .)")
    e.add_argument("--json", help="write the full design as JSON")
    e.set_defaults(func=cmd_example)

    r = sub.add_parser("run", help="construct rules and stakes for a scenario")
    r.add_argument("scenario")
    r.add_argument("--mode", choices=("theorem1", "equal-stakes", "equal_stakes"))
    r.add_argument("--json")
    r.add_argument("--emit-scenario", help="write the scenario with the designed rules and stakes")
    r.set_defaults(func=cmd_run)

    w = sub.add_parser("sweep", help="equilibria under one shared stake over a grid")
    w.add_argument("scenario")
    w.add_argument("--r-min", type=float, default=0.0)
    w.add_argument("--r-max", type=float, default=10.0)
    w.add_argument("--steps", type=int, default=101)
    w.add_argument("--out", help="CSV path (default stdout)")
    w.set_defaults(func=cmd_sweep)

    a = sub.add_parser("audit", help="fairness report for explicit rules and stakes")
    a.add_argument("scenario")
    a.add_argument("--json")
    a.set_defaults(func=cmd_audit)

    m = sub.add_parser("simulate", help="Monte-Carlo check of the analytic equilibrium")
    m.add_argument("scenario")
    m.add_argument("--n", type=int)
    m.add_argument("--seed", type=int)
    m.add_argument("--json")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConstructionError as exc:
        print(f"construction failed: {exc}", file=sys.stderr)
        return EXIT_CONSTRUCTION


if __name__ == "__main__":
    sys.exit(main())
