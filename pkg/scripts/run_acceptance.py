#!/usr/bin/env python3
"""
Run the acceptance checks against the fixture corpus and the property suites,
then emit a JSON and a Markdown report under output/acceptance/.
"""

import argparse
import json
import os
import sys
import time
from datetime import datetime

import numpy as np

ROOT_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if ROOT_DIR not in sys.path:
    sys.path.insert(0, ROOT_DIR)

from src.classifier import EstimateKind, classify_markov_chain, full_classification, degree_bound
from src.components import (
    conical_decomposition,
    enumerate_components,
    reconstruct,
    zero_bounded_on_vector,
)
from src.constraints import check_dichotomy, maximal_solution_i, maximal_solution_ii
from src.generators import random_conical_sum, random_lp, random_model
from src.graph import simple_cycles
from src.model import add_step_counter, load_model
from src.ratlp import LpStatus, solve, vertex_optimum
from src.settings import load_config
from src.simulator import UniformRandom, estimate_fp, load_strategy, run_trajectory, sample_return_effects


REPORT_DIR = os.path.join(ROOT_DIR, "output", "acceptance")
MODELS_DIR = os.path.join(ROOT_DIR, "models")
CORPUS = ("rw1", "expo1", "countdown", "twocycle", "biased_rw", "increasing")


def _model(name):
    return load_model(os.path.join(MODELS_DIR, f"{name}.vass"))


def check_random_walk_verdicts(args):
    m = _model("rw1")
    report = full_classification(m)
    chain = classify_markov_chain(m)
    observed = {
        "analyze_length": report.length.describe(),
        "analyze_counter": report.counters["c"].describe(),
        "mc_length": chain.length.describe(),
        "mc_counter": chain.counters["c"].describe(),
    }
    passed = (
        report.length.polynomial_degree == 2
        and report.counters["c"].polynomial_degree == 1
        and chain.length.polynomial_degree == 2
        and chain.counters["c"].polynomial_degree == 1
    )
    return passed, observed


def check_random_walk_simulation(args):
    m = _model("rw1")
    sim = load_config(args.config)["simulation"]
    n_list = [32, 64, 128] if args.quick else sim["n_list"]
    trials = 100 if args.quick else sim["trials"]
    length = estimate_fp(m, UniformRandom(), "length", sim["p"], n_list, trials, sim["max_steps"],
                         seed=args.seed, workers=args.workers)
    counter = estimate_fp(m, UniformRandom(), "counter:c", sim["p"], n_list, trials, sim["max_steps"],
                          seed=args.seed, workers=args.workers)
    passed = (
        length.slope is not None
        and 1.7 <= length.slope <= 2.3
        and counter.slope is not None
        and 0.8 <= counter.slope <= 1.2
    )
    return passed, {"length": length.as_dict(), "counter": counter.as_dict()}


def check_doubling_loops(args):
    m = _model("expo1")
    report = full_classification(m)
    kinds = {label: est.kind.value for label, est in report.items()}
    strat = load_strategy(m, "phased:" + os.path.join(MODELS_DIR, "strategies", "expo1_doubling_n12.phased"))
    stats = run_trajectory(m, strat, 12, 100_000, seed=args.seed)
    all_exponential = all(kind == EstimateKind.EXPONENTIAL_LOWER.value for kind in kinds.values())
    passed = all_exponential and max(stats.max_counter) > 2 ** 10
    return passed, {"verdicts": kinds, "max_counter": list(stats.max_counter), "term_step": stats.term_step}


def check_dichotomy_suite(args):
    rng = np.random.default_rng(args.seed)
    failures = []
    for case in range(200):
        m = random_model(rng)
        if not check_dichotomy(m, maximal_solution_i(m), maximal_solution_ii(m)):
            failures.append(case)
    return not failures, {"cases": 200, "failures": failures}


def check_decomposition_suite(args):
    rng = np.random.default_rng(args.seed + 1)
    failures = []
    for case in range(100):
        m = random_model(rng)
        x, _ = random_conical_sum(rng, m)
        if reconstruct(m, conical_decomposition(x)).flow != x.flow:
            failures.append(case)
    return not failures, {"cases": 100, "failures": failures}


def check_zero_boundedness_suite(args):
    rng = np.random.default_rng(args.seed + 2)
    failures = []
    components = 0
    for case in range(100):
        m = random_model(rng, max_states=6, max_transitions=10)
        for y in enumerate_components(m):
            components += 1
            cycles = simple_cycles(y.model, transitions=y.support)
            for position, c in enumerate(m.counters):
                expected = all(sum(m.transition(tid).update[position] for tid in cycle) == 0 for cycle in cycles)
                if zero_bounded_on_vector(y, {c: 1}) != expected:
                    failures.append({"case": case, "center": y.center, "counter": c})
    return not failures, {"models": 100, "components": components, "failures": failures}


def check_lp_suite(args):
    rng = np.random.default_rng(args.seed + 3)
    failures = []
    for case in range(200):
        lp = random_lp(rng)
        expected = vertex_optimum(lp)
        result = solve(lp)
        if expected is None:
            ok = result.status == LpStatus.INFEASIBLE
        else:
            ok = result.status == LpStatus.OPTIMAL and result.value == expected
        if not ok:
            failures.append(case)
    return not failures, {"cases": 200, "failures": failures}


def check_degree_bound(args):
    degrees = {}
    within = True
    for name in CORPUS:
        m = _model(name)
        report = full_classification(m)
        bound = degree_bound(add_step_counter(m)[0])
        tight = [est.degree for _, est in report.items() if est.kind == EstimateKind.TIGHT_POLY]
        degrees[name] = max(tight, default=0)
        within = within and all(k <= bound for k in tight)
    return within and max(degrees.values()) <= 4, {"max_degree": degrees}


def check_return_effects(args):
    (y,) = enumerate_components(_model("rw1"))
    mean, stderr = sample_return_effects(y, 10_000, seed=args.seed)
    passed = abs(float(mean[0])) <= 3 * float(stderr[0])
    return passed, {"mean": mean.tolist(), "stderr": stderr.tolist()}


CHECKS = [
    ("rw1 verdicts", check_random_walk_verdicts),
    ("rw1 simulation exponents", check_random_walk_simulation),
    ("expo1 exponential verdicts and doubling run", check_doubling_loops),
    ("dichotomy on random models", check_dichotomy_suite),
    ("conical decomposition oracle", check_decomposition_suite),
    ("zero-boundedness oracle", check_zero_boundedness_suite),
    ("LP oracle", check_lp_suite),
    ("degree bound on the corpus", check_degree_bound),
    ("expected return effect", check_return_effects),
]


def parse_args():
    parser = argparse.ArgumentParser(description="Run the vassclass acceptance checks.")
    parser.add_argument("--config", type=str, default=None, help="Optional config.yaml for the simulation budget.")
    parser.add_argument("--seed", type=int, default=2024, help="Master seed for the property suites.")
    parser.add_argument("--workers", type=int, default=1, help="Process pool size for simulations.")
    parser.add_argument("--quick", action="store_true", help="Smaller simulation grid (not the full criterion).")
    parser.add_argument("--only", type=str, default="", help="Run only checks whose name contains this text.")
    return parser.parse_args()


def write_reports(report):
    os.makedirs(REPORT_DIR, exist_ok=True)
    stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    json_path = os.path.join(REPORT_DIR, f"acceptance_{stamp}.json")
    md_path = os.path.join(REPORT_DIR, f"acceptance_{stamp}.md")

    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, ensure_ascii=False)

    lines = [
        "# Acceptance Report",
        "",
        f"- Generated at: {report['generated_at']}",
        f"- Seed: {report['seed']}",
        f"- Quick mode: {report['quick']}",
        f"- Passed: {report['passed']}",
        "",
        "## Checks",
    ]
    for check in report["checks"]:
        status = "PASS" if check["passed"] else "FAIL"
        lines.append(f"- {check['name']}: {status} ({check['duration_sec']}s)")
        if check.get("error"):
            lines.append(f"  - error: {check['error']}")

    with open(md_path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")

    return json_path, md_path


def main():
    args = parse_args()
    report = {
        "generated_at": datetime.now().isoformat(),
        "seed": args.seed,
        "quick": args.quick,
        "passed": False,
        "checks": [],
    }

    for name, check in CHECKS:
        if args.only and args.only not in name:
            continue
        start = time.time()
        entry = {"name": name}
        try:
            passed, details = check(args)
            entry.update({"passed": bool(passed), "details": details})
        except Exception as exc:
            entry.update({"passed": False, "error": f"{type(exc).__name__}: {exc}"})
        entry["duration_sec"] = round(time.time() - start, 3)
        report["checks"].append(entry)
        print(f"[{'PASS' if entry['passed'] else 'FAIL'}] {name} ({entry['duration_sec']}s)")

    report["passed"] = bool(report["checks"]) and all(check["passed"] for check in report["checks"])
    json_path, md_path = write_reports(report)
    print(f"JSON report: {json_path}")
    print(f"Markdown report: {md_path}")
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    raise SystemExit(main())
