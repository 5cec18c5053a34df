import math
import os
import tempfile
import unittest

from src.classifier import EstimateReport, full_classification, tight
from src.components import enumerate_components
from src.errors import ModelError, PreconditionError, SimulationError
from src.model import LENGTH, load_model, parse_model, parse_observable
from src.simulator import (
    FixedCMD,
    PhasedSchedule,
    UniformRandom,
    ValidationBudget,
    check_strategy,
    enumerate_cmd_strategies,
    estimate_fp,
    fit_exponent,
    load_strategy,
    order_statistic,
    run_trajectory,
    sample_observable,
    sample_return_effects,
    validate_report,
)


MODELS_DIR = os.path.join(os.path.dirname(__file__), "..", "models")
STRATEGY_DIR = os.path.join(MODELS_DIR, "strategies")

PUMP = """
counters: x y
state p n
trans t p p : 2 -1
"""


def _load(name):
    return load_model(os.path.join(MODELS_DIR, name))


def _generic(strategy):
    """Same choices as ``strategy`` but non-stationary, so the step-by-step path runs."""
    return PhasedSchedule(((strategy, 1), (strategy, 1)))


class StrategyTests(unittest.TestCase):
    def test_load_cmd_file(self):
        m = _load("expo1.vass")
        strat = load_strategy(m, "cmd:" + os.path.join(STRATEGY_DIR, "expo1_p.cmd"))
        self.assertEqual(strat.selection_map, {"p": "t1", "q": "t4"})
        self.assertEqual(strat.label, "cmd:{p=t1,q=t4}")
        self.assertTrue(strat.stationary)

    def test_load_phased_file(self):
        m = _load("expo1.vass")
        strat = load_strategy(m, "phased:" + os.path.join(STRATEGY_DIR, "expo1_doubling_n12.phased"))
        self.assertEqual([steps for _, steps in strat.phases], [12, 37, 73, 145, 289, 577])
        self.assertEqual(strat.label, "phased:6")
        self.assertFalse(strat.stationary)
        self.assertEqual(strat.choice("p", 11), "t1")
        self.assertEqual(strat.choice("p", 12), "t2")
        self.assertEqual(strat.choice("q", 10_000), "t3")

    def test_uniform_is_the_default(self):
        self.assertIsInstance(load_strategy(_load("rw1.vass"), None), UniformRandom)

    def test_bad_strategies(self):
        m = _load("expo1.vass")
        with self.assertRaises(ModelError):
            load_strategy(m, "greedy")
        with self.assertRaises(PreconditionError):
            check_strategy(m, FixedCMD((("p", "t3"),)))
        with self.assertRaises(PreconditionError):
            check_strategy(_load("rw1.vass"), FixedCMD((("p", "t_plus"),)))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "bad.cmd")
            with open(path, "w", encoding="utf-8") as handle:
                handle.write("p=t1\nq t4\n")
            with self.assertRaises(ModelError) as ctx:
                load_strategy(m, "cmd:" + path)
            self.assertEqual(ctx.exception.line, 2)

    def test_enumerate_cmd_strategies(self):
        m = _load("expo1.vass")
        self.assertEqual(len(enumerate_cmd_strategies(m, 16)), 4)
        self.assertEqual(len(enumerate_cmd_strategies(m, 2)), 2)
        self.assertEqual(enumerate_cmd_strategies(_load("rw1.vass"), 16), [])
        self.assertEqual(enumerate_cmd_strategies(_load("countdown.vass"), 16), [])


class TrajectoryTests(unittest.TestCase):
    def test_countdown_takes_n_plus_one_steps(self):
        stats = run_trajectory(_load("countdown.vass"), UniformRandom(), 5, 100, seed=0)
        self.assertEqual(stats.term_step, 6)
        self.assertEqual(stats.max_counter, (5,))
        self.assertEqual(stats.trans_count, (6,))
        self.assertFalse(stats.censored)

    def test_terminal_step_does_not_raise_peak(self):
        m = parse_model(PUMP)
        for name, strategy in (("fast", UniformRandom()), ("generic", _generic(UniformRandom()))):
            with self.subTest(path=name):
                stats = run_trajectory(m, strategy, 1, 100, seed=0)
                self.assertEqual(stats.term_step, 2)
                self.assertEqual(stats.max_counter, (3, 1))

    def test_negative_start_terminates_immediately(self):
        stats = run_trajectory(_load("countdown.vass"), UniformRandom(), -1, 100, seed=0)
        self.assertEqual(stats.term_step, 0)

    def test_censoring(self):
        stats = run_trajectory(_load("twocycle.vass"), UniformRandom(), 3, 50, seed=0)
        self.assertTrue(stats.censored)
        self.assertEqual(stats.steps, 50)
        self.assertEqual(stats.max_counter, (4,))
        with self.assertRaises(PreconditionError):
            run_trajectory(_load("twocycle.vass"), UniformRandom(), 3, 0, seed=0)

    def test_random_walk_bookkeeping(self):
        m = _load("rw1.vass")
        for trial in range(50):
            with self.subTest(trial=trial):
                stats = run_trajectory(m, UniformRandom(), 2, 100_000, seed=(0, 2, trial))
                if stats.censored:
                    continue
                up, down = stats.trans_count
                self.assertEqual(up - down, -3)
                self.assertEqual(up + down, stats.term_step)
                self.assertGreaterEqual(stats.term_step, 3)

    def test_same_seed_same_trajectory(self):
        m = _load("rw1.vass")
        first = run_trajectory(m, UniformRandom(), 10, 10_000, seed=(7, 10, 3))
        again = run_trajectory(m, UniformRandom(), 10, 10_000, seed=(7, 10, 3))
        self.assertEqual(first, again)
        others = {run_trajectory(m, UniformRandom(), 10, 10_000, seed=(7, 10, t)).trans_count for t in range(20)}
        self.assertGreater(len(others), 1)

    def test_single_state_fast_path_matches_step_path(self):
        for name in ("rw1.vass", "biased_rw.vass", "countdown.vass"):
            m = _load(name)
            for trial in range(20):
                with self.subTest(model=name, trial=trial):
                    seed = (1, 40, trial)
                    fast = run_trajectory(m, UniformRandom(), 40, 3000, seed)
                    slow = run_trajectory(m, _generic(UniformRandom()), 40, 3000, seed)
                    self.assertEqual(fast, slow)

    def test_max_steps_does_not_change_the_trajectory(self):
        m = _load("rw1.vass")
        short = run_trajectory(m, UniformRandom(), 30, 100, seed=4)
        long = run_trajectory(m, UniformRandom(), 30, 10_000_000, seed=4)
        if long.term_step is not None and long.term_step <= 100:
            self.assertEqual(short.term_step, long.term_step)
        else:
            self.assertTrue(short.censored)

    def test_start_state(self):
        m = _load("twocycle.vass")
        stats = run_trajectory(m, UniformRandom(), 0, 10, seed=0, start="q")
        self.assertEqual(stats.term_step, 1)
        self.assertEqual(stats.trans_count, (0, 1))
        with self.assertRaises(PreconditionError):
            run_trajectory(m, UniformRandom(), 0, 10, seed=0, start="r")
        with self.assertRaises(PreconditionError):
            estimate_fp(m, UniformRandom(), LENGTH, 0.5, [4, 8, 16], 30, 10, start="r")

    def test_doubling_schedule(self):
        m = _load("expo1.vass")
        strat = load_strategy(m, "phased:" + os.path.join(STRATEGY_DIR, "expo1_doubling_n12.phased"))
        stats = run_trajectory(m, strat, 12, 10_000, seed=0)
        self.assertEqual(stats.max_counter, (1152, 576))
        self.assertGreater(stats.max_counter[0], 1024)
        self.assertEqual(stats.term_step, 12 + 37 + 73 + 145 + 289 + 577 + 1)


class FpEstimateTests(unittest.TestCase):
    def test_order_statistic(self):
        self.assertEqual(order_statistic(list(range(1, 101)), 0.75), 75.0)
        self.assertEqual(order_statistic([3.0, 1.0, 2.0], 0.1), 1.0)
        self.assertTrue(math.isinf(order_statistic([1.0, math.inf], 0.9)))

    def test_countdown_quantiles(self):
        m = _load("countdown.vass")
        est = estimate_fp(m, UniformRandom(), LENGTH, 0.75, [4, 8, 16, 32], 30, 1000)
        self.assertEqual(est.values, [5.0, 9.0, 17.0, 33.0])
        self.assertEqual(est.censored, [0, 0, 0, 0])
        self.assertAlmostEqual(est.slope, 1.0, delta=0.15)
        self.assertEqual(est.as_dict()["points"][0], {"n": 4, "quantile": 5.0, "censored": 0})

    def test_random_walk_exponents(self):
        m = _load("rw1.vass")
        n_list = [8, 16, 32, 64]
        length = estimate_fp(m, UniformRandom(), "length", 0.75, n_list, 200, 500_000, seed=1)
        counter = estimate_fp(m, UniformRandom(), "counter:c", 0.75, n_list, 200, 500_000, seed=1)
        self.assertAlmostEqual(length.slope, 2.0, delta=0.35)
        self.assertAlmostEqual(counter.slope, 1.0, delta=0.35)
        self.assertEqual(length.strategy, "uniform")

    def test_schedule_factories(self):
        m = _load("countdown.vass")

        def per_n(n):
            return FixedCMD((("p", "t"),))

        est = estimate_fp(m, per_n, "transition:t", 0.5, [2, 4, 8], 30, 100)
        self.assertEqual(est.values, [3.0, 5.0, 9.0])
        self.assertEqual(est.strategy, "per_n")

    def test_worker_pool_matches_serial(self):
        m = _load("rw1.vass")
        observable = parse_observable("length", m)
        serial = sample_observable(m, UniformRandom(), observable, 5, 40, 50_000, seed=3)
        pooled = sample_observable(m, UniformRandom(), observable, 5, 40, 50_000, seed=3, workers=2)
        self.assertEqual(serial, pooled)

    def test_argument_errors(self):
        m = _load("countdown.vass")
        with self.assertRaises(SimulationError):
            estimate_fp(m, UniformRandom(), LENGTH, 1.0, [4, 8, 16], 30, 100)
        with self.assertRaises(SimulationError):
            estimate_fp(m, UniformRandom(), LENGTH, 0.5, [4, 8, 16], 10, 100)
        with self.assertLogs("src.simulator", level="WARNING"):
            with self.assertRaises(SimulationError):
                estimate_fp(m, UniformRandom(), LENGTH, 0.5, [10, 20, 40], 30, 2)
        with self.assertRaises(ModelError):
            estimate_fp(m, UniformRandom(), "counter:zz", 0.5, [4, 8, 16], 30, 100)


class FitExponentTests(unittest.TestCase):
    def test_exact_power_law(self):
        slope, stderr = fit_exponent([(n, 3 * n ** 2) for n in (4, 8, 16, 32)])
        self.assertAlmostEqual(slope, 2.0)
        self.assertAlmostEqual(stderr, 0.0)

    def test_decade_grid(self):
        slope, stderr = fit_exponent([(10, 100), (100, 10 ** 4), (1000, 10 ** 6)])
        self.assertAlmostEqual(slope, 2.0)
        self.assertAlmostEqual(stderr, 0.0)
        slope, _ = fit_exponent([(10, 10), (100, 100), (1000, 1000)])
        self.assertAlmostEqual(slope, 1.0)

    def test_noisy_points_have_positive_error(self):
        slope, stderr = fit_exponent([(10, 12), (20, 35), (40, 170), (80, 600)])
        self.assertGreater(slope, 1.5)
        self.assertGreater(stderr, 0)

    def test_rejects_degenerate_input(self):
        for points in ([(1, 1), (2, 2)], [(4, 1), (4, 2), (8, 3)], [(2, 1), (4, 0), (8, 3)]):
            with self.subTest(points=points):
                with self.assertRaises(SimulationError):
                    fit_exponent(points)


class ValidationTests(unittest.TestCase):
    def test_countdown_report_passes(self):
        m = _load("countdown.vass")
        budget = ValidationBudget(p=0.75, n_list=(8, 16, 32, 64), trials=30, max_steps=10_000)
        results = validate_report(m, full_classification(m), budget)
        self.assertEqual([r.label for r in results], ["length", "counter:c", "transition:t"])
        self.assertEqual({r.status for r in results}, {"pass"})
        self.assertAlmostEqual(results[1].slope, 1.0)

    def test_wrong_degree_fails(self):
        m = _load("rw1.vass")
        report = EstimateReport("digest", counters={}, transitions={}, length=tight(3, "corrupted"))
        budget = ValidationBudget(p=0.75, n_list=(8, 16, 32, 64), trials=100, max_steps=500_000, seed=2)
        (result,) = validate_report(m, report, budget)
        self.assertEqual(result.status, "fail")
        self.assertLess(result.slope, 2.5)

    def test_nonterminating_model_is_inconclusive(self):
        m = _load("twocycle.vass")
        budget = ValidationBudget(p=0.75, n_list=(4, 8, 16), trials=30, max_steps=200)
        results = validate_report(m, full_classification(m), budget)
        self.assertEqual({r.status for r in results}, {"inconclusive"})
        details = {r.label: r.detail for r in results}
        self.assertEqual(details["length"], "not simulated")
        self.assertEqual(details["counter:c"], "too few finite quantiles")

    def test_budget_from_config(self):
        config = {"simulation": {"p": 0.8, "n_list": [4, 8], "trials": 40}}
        budget = ValidationBudget.from_config(config, seed=9, workers=None)
        self.assertEqual(budget.p, 0.8)
        self.assertEqual(budget.n_list, (4, 8))
        self.assertEqual(budget.seed, 9)
        self.assertEqual(budget.workers, 1)


class ReturnEffectTests(unittest.TestCase):
    def test_biased_walk_mean_effect(self):
        (y,) = enumerate_components(_load("biased_rw.vass"))
        mean, stderr = sample_return_effects(y, 2000, seed=5)
        self.assertLessEqual(abs(mean[0] + 1 / 3), 4 * stderr[0])

    def test_two_state_cycle_effect_is_exact(self):
        (y,) = enumerate_components(_load("twocycle.vass"))
        mean, stderr = sample_return_effects(y, 10)
        self.assertEqual(mean.tolist(), [0.0])
        self.assertEqual(stderr.tolist(), [0.0])
        with self.assertRaises(SimulationError):
            sample_return_effects(y, 1)


if __name__ == "__main__":
    unittest.main()
