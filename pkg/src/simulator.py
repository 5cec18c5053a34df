"""
Monte-Carlo trajectory engine for VASS MDPs.

Every trajectory owns a ``numpy.random.Generator`` seeded from
``(master seed, n, trial)``. Uniforms are drawn in blocks of a fixed geometric
size schedule and consumed one per step, so a trajectory depends only on its
seed and never on ``max_steps`` or on which code path simulates it.

Usage:
    from src.simulator import UniformRandom, estimate_fp

    est = estimate_fp(model, UniformRandom(), LENGTH, 0.9, [32, 64, 128], 500, 10**6, seed=0)
    print(est.slope, est.stderr)
"""

import itertools
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from src.components import component_model
from src.errors import ModelError, PreconditionError, SimulationError
from src.model import ObservableKind, check_observable, parse_observable


logger = logging.getLogger(__name__)

FIRST_BLOCK = 256
MAX_BLOCK = 1 << 16
MIN_TRIALS = 30
DEFAULT_TOLERANCE = 0.35
EXPONENTIAL_SLOPE_GAIN = 0.5


# =============================================================================
# STRATEGIES
# =============================================================================

@dataclass(frozen=True)
class UniformRandom:
    """Picks an outgoing transition uniformly at every nondeterministic step."""

    label = "uniform"

    @property
    def stationary(self):
        return True

    def choice(self, state, step):
        return None


@dataclass(frozen=True)
class FixedCMD:
    selection: tuple = ()

    @property
    def label(self):
        if not self.selection:
            return "cmd:{}"
        return "cmd:{" + ",".join(f"{s}={t}" for s, t in self.selection) + "}"

    @property
    def stationary(self):
        return True

    @property
    def selection_map(self):
        return dict(self.selection)

    def choice(self, state, step):
        return self.selection_map.get(state)


@dataclass(frozen=True)
class PhasedSchedule:
    """cMD selections played for fixed step budgets; the last phase never ends."""

    phases: tuple

    def __post_init__(self):
        if not self.phases:
            raise PreconditionError("a phased schedule needs at least one phase")
        for _, steps in self.phases:
            if steps < 1:
                raise PreconditionError("phase step budgets must be positive")

    @property
    def label(self):
        return f"phased:{len(self.phases)}"

    @property
    def stationary(self):
        return len(self.phases) == 1

    def choice(self, state, step):
        elapsed = 0
        for strategy, steps in self.phases:
            elapsed += steps
            if step < elapsed:
                return strategy.choice(state, step)
        return self.phases[-1][0].choice(state, step)


def check_strategy(m, strat):
    """FixedCMD selections must name existing outgoing transitions of nondeterministic states."""
    if isinstance(strat, PhasedSchedule):
        for strategy, _ in strat.phases:
            check_strategy(m, strategy)
        return strat
    if isinstance(strat, FixedCMD):
        for state, tid in strat.selection:
            if state not in m.state_index:
                raise PreconditionError(f"strategy names unknown state {state!r}")
            if m.is_probabilistic(state):
                raise PreconditionError(f"strategy selects at probabilistic state {state!r}")
            if tid not in {t.id for t in m.outgoing[state]}:
                raise PreconditionError(f"{tid!r} is not an outgoing transition of {state!r}")
    return strat


def _parse_cmd_file(m, path):
    selection = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ModelError(f"{path}: expected state=transition-id", line=line_no)
            state, tid = (part.strip() for part in line.split("=", 1))
            selection.append((state, tid))
    strat = FixedCMD(tuple(selection))
    try:
        return check_strategy(m, strat)
    except PreconditionError as exc:
        raise ModelError(f"{path}: {exc}") from exc


def load_strategy(m, spec):
    """``uniform``, ``cmd:<file>`` or ``phased:<file>`` (lines ``<cmd-file> <steps>``)."""
    spec = (spec or "uniform").strip()
    if spec == "uniform":
        return UniformRandom()
    if spec.startswith("cmd:"):
        return _parse_cmd_file(m, spec[4:])
    if spec.startswith("phased:"):
        path = spec[7:]
        base = os.path.dirname(os.path.abspath(path))
        phases = []
        with open(path, "r", encoding="utf-8") as handle:
            for line_no, raw in enumerate(handle, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                parts = line.split()
                if len(parts) != 2 or not parts[1].isdigit():
                    raise ModelError(f"{path}: expected '<cmd-file> <steps>'", line=line_no)
                cmd_path = parts[0] if os.path.isabs(parts[0]) else os.path.join(base, parts[0])
                phases.append((_parse_cmd_file(m, cmd_path), int(parts[1])))
        try:
            return PhasedSchedule(tuple(phases))
        except PreconditionError as exc:
            raise ModelError(f"{path}: {exc}") from exc
    raise ModelError(f"unknown strategy {spec!r}")


def enumerate_cmd_strategies(m, limit):
    """Up to ``limit`` cMD strategies; empty when no state offers a real choice."""
    choosing = [s.name for s in m.states if not s.is_probabilistic and len(m.outgoing[s.name]) > 1]
    if not choosing:
        return []
    options = [[t.id for t in m.outgoing[name]] for name in choosing]
    found = []
    for combo in itertools.islice(itertools.product(*options), limit):
        found.append(FixedCMD(tuple(zip(choosing, combo))))
    return found


# =============================================================================
# TRAJECTORIES
# =============================================================================

@dataclass(frozen=True)
class TrajectoryStats:
    term_step: int
    max_counter: tuple
    trans_count: tuple
    steps: int
    seed: object

    @property
    def censored(self):
        return self.term_step is None


class _UniformStream:
    """Uniforms in blocks of 256, 512, ... capped at 65536."""

    def __init__(self, rng):
        self.rng = rng
        self.size = FIRST_BLOCK
        self.buffer = np.empty(0)
        self.pos = 0

    def block(self):
        values = self.rng.random(self.size)
        self.size = min(self.size * 2, MAX_BLOCK)
        return values

    def next(self):
        if self.pos == len(self.buffer):
            self.buffer = self.block()
            self.pos = 0
        value = self.buffer[self.pos]
        self.pos += 1
        return value


class _Plan:
    """Integer update matrix and per-state choice tables for one model."""

    def __init__(self, m):
        self.model = m
        rows = []
        for t in m.transitions:
            row = []
            for value in t.update:
                value = Fraction(value)
                if value.denominator != 1:
                    raise SimulationError(f"transition {t.id!r} has a non-integral update")
                row.append(int(value))
            rows.append(row)
        self.updates = np.array(rows, dtype=np.int64).reshape(len(m.transitions), m.dimension)
        index = m.transition_index
        self.outgoing = {}
        self.cumulative = {}
        for state in m.states:
            outgoing = [index[t.id] for t in m.outgoing[state.name]]
            self.outgoing[state.name] = np.array(outgoing, dtype=np.int64)
            if state.is_probabilistic:
                self.cumulative[state.name] = np.cumsum(
                    [float(t.probability) for t in m.outgoing[state.name]]
                )

    def pick(self, state, u, selected):
        outgoing = self.outgoing[state]
        if state in self.cumulative:
            position = int(np.searchsorted(self.cumulative[state], u, side="right"))
            return int(outgoing[min(position, len(outgoing) - 1)])
        if selected is not None:
            return self.model.transition_index[selected]
        return int(outgoing[min(int(u * len(outgoing)), len(outgoing) - 1)])

    def pick_many(self, state, u, selected):
        outgoing = self.outgoing[state]
        if state in self.cumulative:
            positions = np.searchsorted(self.cumulative[state], u, side="right")
        elif selected is not None:
            return np.full(len(u), self.model.transition_index[selected], dtype=np.int64)
        else:
            positions = (u * len(outgoing)).astype(np.int64)
        return outgoing[np.minimum(positions, len(outgoing) - 1)]


def _trajectory_seed(seed):
    return list(seed) if isinstance(seed, (tuple, list)) else [int(seed)]


def _run_single_state(plan, strat, n0, max_steps, stream, seed):
    m = plan.model
    state = m.states[0].name
    selected = strat.choice(state, 0)
    current = np.full(m.dimension, n0, dtype=np.int64)
    peak = current.copy()
    counts = np.zeros(len(m.transitions), dtype=np.int64)
    steps = 0
    while steps < max_steps:
        u = stream.block()[: max_steps - steps]
        chosen = plan.pick_many(state, u, selected)
        path = current + np.cumsum(plan.updates[chosen], axis=0)
        negative = (path < 0).any(axis=1)
        if negative.any():
            first = int(np.argmax(negative))
            if first:
                peak = np.maximum(peak, path[:first].max(axis=0))
            counts += np.bincount(chosen[: first + 1], minlength=len(m.transitions))
            return TrajectoryStats(steps + first + 1, tuple(int(v) for v in peak),
                                   tuple(int(v) for v in counts), steps + first + 1, seed)
        peak = np.maximum(peak, path.max(axis=0))
        counts += np.bincount(chosen, minlength=len(m.transitions))
        current = path[-1]
        steps += len(u)
    return TrajectoryStats(None, tuple(int(v) for v in peak), tuple(int(v) for v in counts), steps, seed)


def run_trajectory(m, strat, n0, max_steps, seed, start=None, plan=None):
    """Simulate from ``start`` (default: the first state) with every counter at ``n0``."""
    if max_steps < 1:
        raise PreconditionError("max_steps must be at least 1")
    plan = plan or _Plan(m)
    stream = _UniformStream(np.random.default_rng(_trajectory_seed(seed)))
    if n0 < 0:
        zeros = tuple(0 for _ in m.transitions)
        return TrajectoryStats(0, tuple(n0 for _ in m.counters), zeros, 0, seed)
    if len(m.states) == 1 and strat.stationary and m.dimension > 0 and start in (None, m.states[0].name):
        return _run_single_state(plan, strat, n0, max_steps, stream, seed)

    state = start or m.states[0].name
    if state not in m.state_index:
        raise PreconditionError(f"unknown start state {state!r}")
    values = [n0] * m.dimension
    peak = list(values)
    counts = [0] * len(m.transitions)
    updates = plan.updates.tolist()
    transitions = m.transitions
    for step in range(max_steps):
        u = stream.next()
        selected = None if m.is_probabilistic(state) else strat.choice(state, step)
        j = plan.pick(state, u, selected)
        counts[j] += 1
        values = [v + delta for v, delta in zip(values, updates[j])]
        state = transitions[j].target
        if any(v < 0 for v in values):
            # the terminal configuration does not count toward the peak
            return TrajectoryStats(step + 1, tuple(peak), tuple(counts), step + 1, seed)
        peak = [max(p, v) for p, v in zip(peak, values)]
    return TrajectoryStats(None, tuple(peak), tuple(counts), max_steps, seed)


def observable_value(m, stats, observable):
    """Observed L, C[c] or T[t]; censored trajectories give +inf."""
    if stats.censored:
        return math.inf
    if observable.kind == ObservableKind.LENGTH:
        return float(stats.term_step)
    if observable.kind == ObservableKind.COUNTER:
        return float(stats.max_counter[m.counter_index[observable.name]])
    return float(stats.trans_count[m.transition_index[observable.name]])


# =============================================================================
# FIXED-PROBABILITY BOUNDS
# =============================================================================

@dataclass
class FpEstimate:
    observable: str
    strategy: str
    p: float
    n_list: list
    values: list
    censored: list
    trials: int
    slope: float = None
    stderr: float = None

    def as_dict(self):
        return {
            "observable": self.observable,
            "strategy": self.strategy,
            "p": self.p,
            "trials": self.trials,
            "points": [
                {"n": n, "quantile": None if math.isinf(v) else v, "censored": c}
                for n, v, c in zip(self.n_list, self.values, self.censored)
            ],
            "slope": self.slope,
            "stderr": self.stderr,
        }


def order_statistic(values, p):
    """The ceil(p * len)-th smallest value."""
    ordered = np.sort(np.asarray(values, dtype=float))
    rank = max(1, math.ceil(p * len(ordered)))
    return float(ordered[rank - 1])


def _strategy_for(strat, n):
    if hasattr(strat, "choice"):
        return strat
    return strat(n)


def _run_batch(args):
    m, strat, observable, n, trial_ids, max_steps, seed, start = args
    plan = _Plan(m)
    return [
        observable_value(m, run_trajectory(m, strat, n, max_steps, (seed, n, trial), start=start, plan=plan), observable)
        for trial in trial_ids
    ]


def sample_observable(m, strat, observable, n, trials, max_steps, seed, workers=1, start=None):
    """Observable values of ``trials`` trajectories from n, ordered by trial index."""
    strat = _strategy_for(strat, n)
    if workers <= 1:
        return _run_batch((m, strat, observable, n, range(trials), max_steps, seed, start))
    chunks = [list(range(trials))[i::workers] for i in range(workers)]
    jobs = [(m, strat, observable, n, chunk, max_steps, seed, start) for chunk in chunks if chunk]
    by_trial = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for chunk, values in zip(jobs, pool.map(_run_batch, jobs)):
            by_trial.update(zip(chunk[4], values))
    return [by_trial[trial] for trial in range(trials)]


def _quantiles(m, strat, observable, p, n_list, trials, max_steps, seed, workers, start=None):
    values = []
    censored = []
    for n in n_list:
        sample = sample_observable(m, strat, observable, n, trials, max_steps, seed, workers, start)
        lost = sum(1 for v in sample if math.isinf(v))
        if lost:
            logger.warning("%d of %d trials censored at n=%d (max_steps %d)", lost, trials, n, max_steps)
        values.append(order_statistic(sample, p))
        censored.append(lost)
    return values, censored


def estimate_fp(m, strat, observable, p, n_list, trials, max_steps, seed=0, workers=1, start=None):
    """Empirical f_p(n) per n plus a log-log exponent fit over the finite points."""
    if not 0 < p < 1:
        raise SimulationError(f"p must lie strictly between 0 and 1, got {p}")
    if trials < MIN_TRIALS:
        raise SimulationError(f"at least {MIN_TRIALS} trials are needed, got {trials}")
    if isinstance(observable, str):
        observable = parse_observable(observable, m)
    check_observable(m, observable)
    if hasattr(strat, "choice"):
        check_strategy(m, strat)
    if start is not None and start not in m.state_index:
        raise PreconditionError(f"unknown start state {start!r}")

    values, censored = _quantiles(m, strat, observable, p, n_list, trials, max_steps, seed, workers, start)
    for n, lost in zip(n_list, censored):
        if lost == trials:
            raise SimulationError(f"every trial censored at n={n}; increase max_steps")

    points = [(n, v) for n, v in zip(n_list, values) if math.isfinite(v) and v > 0]
    slope = stderr = None
    if len(points) >= 3:
        slope, stderr = fit_exponent(points)
    label = strat.label if hasattr(strat, "label") else getattr(strat, "__name__", "schedule")
    return FpEstimate(observable.label, label, p, list(n_list), values, censored, trials, slope, stderr)


def fit_exponent(points):
    """Least-squares slope of log(value) against log(n), with its standard error."""
    points = list(points)
    if len(points) < 3:
        raise SimulationError("exponent fit needs at least 3 points")
    ns = np.array([float(n) for n, _ in points])
    vs = np.array([float(v) for _, v in points])
    if len(set(ns.tolist())) != len(ns):
        raise SimulationError("exponent fit needs distinct n values")
    if np.any(ns <= 0) or np.any(vs <= 0) or not np.all(np.isfinite(vs)):
        raise SimulationError("exponent fit needs finite positive values")

    x, y = np.log(ns), np.log(vs)
    design = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - (slope * x + intercept)
    spread = float(np.sum((x - x.mean()) ** 2))
    variance = float(np.sum(residuals ** 2)) / (len(x) - 2)
    return float(slope), float(math.sqrt(variance / spread))


# =============================================================================
# VALIDATION OF CLASSIFIER REPORTS
# =============================================================================

@dataclass
class ValidationBudget:
    p: float = 0.9
    n_list: tuple = (32, 64, 128, 256, 512, 1024)
    trials: int = 500
    max_steps: int = 5_000_000
    seed: int = 0
    max_strategies: int = 16
    tolerance: float = DEFAULT_TOLERANCE
    workers: int = 1
    extra_strategies: tuple = ()

    @classmethod
    def from_config(cls, config, **overrides):
        sim = config.get("simulation", {})
        values = {
            "p": sim.get("p", cls.p),
            "n_list": tuple(sim.get("n_list", cls.n_list)),
            "trials": sim.get("trials", cls.trials),
            "max_steps": sim.get("max_steps", cls.max_steps),
            "seed": sim.get("seed", cls.seed),
            "max_strategies": sim.get("max_strategies", cls.max_strategies),
            "workers": sim.get("workers", cls.workers),
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass
class ItemValidation:
    label: str
    verdict: str
    status: str
    slope: float = None
    strategy: str = None
    detail: str = ""
    estimates: list = field(default_factory=list)


def _two_point_slope(points):
    if len(points) < 2:
        return None
    x = np.log([float(n) for n, _ in points])
    y = np.log([float(v) for _, v in points])
    return float(np.polyfit(x, y, 1)[0])


def _looks_exponential(n_list, values, censored):
    finite = [(n, v) for n, v in zip(n_list, values) if math.isfinite(v) and v > 0]
    half = len(finite) // 2
    first, second = _two_point_slope(finite[:half]), _two_point_slope(finite[half:])
    if first is not None and second is not None and second - first >= EXPONENTIAL_SLOPE_GAIN:
        return True, f"slope rises from {first:.2f} to {second:.2f}"
    monotone = all(a <= b for a, b in zip(censored, censored[1:]))
    if monotone and censored and censored[-1] > censored[0]:
        return True, f"censoring grows with n: {censored}"
    return False, "no superpolynomial growth observed"


def validate_report(m, report, budget=None):
    """
    Check tight polynomial verdicts against fitted exponents and exponential
    verdicts against superpolynomial growth, maximizing over the uniform
    strategy and up to ``max_strategies`` cMD strategies.
    """
    budget = budget or ValidationBudget()
    strategies = [UniformRandom()] + enumerate_cmd_strategies(m, budget.max_strategies)
    strategies += list(budget.extra_strategies)
    results = []
    for label, estimate in report.items():
        observable = parse_observable(label, m)
        degree = estimate.polynomial_degree
        kind = getattr(estimate.kind, "value", str(estimate.kind))
        if degree is None and kind != "exponential-lower":
            results.append(ItemValidation(label, estimate.describe(), "inconclusive", detail="not simulated"))
            continue

        best = None
        estimates = []
        exponential = None
        for strat in strategies:
            try:
                values, censored = _quantiles(
                    m, strat, observable, budget.p, budget.n_list, budget.trials,
                    budget.max_steps, budget.seed, budget.workers,
                )
            except SimulationError as exc:
                logger.info("%s under %s: %s", label, getattr(strat, "label", strat), exc)
                continue
            name = getattr(strat, "label", getattr(strat, "__name__", "schedule"))
            if degree is None:
                passed, detail = _looks_exponential(budget.n_list, values, censored)
                if passed:
                    exponential = (name, detail)
                    break
                continue
            points = [(n, v) for n, v in zip(budget.n_list, values) if math.isfinite(v) and v > 0]
            if len(points) < 3:
                continue
            slope, stderr = fit_exponent(points)
            estimates.append({"strategy": name, "slope": slope, "stderr": stderr})
            if best is None or slope > best[0]:
                best = (slope, name)

        if degree is None:
            if exponential:
                results.append(ItemValidation(label, estimate.describe(), "pass", strategy=exponential[0], detail=exponential[1]))
            else:
                results.append(ItemValidation(label, estimate.describe(), "inconclusive", detail="no strategy showed exponential growth"))
            continue
        if best is None:
            results.append(ItemValidation(label, estimate.describe(), "inconclusive", detail="too few finite quantiles", estimates=estimates))
            continue
        slope, name = best
        status = "pass" if abs(slope - degree) <= budget.tolerance else "fail"
        results.append(ItemValidation(
            label, estimate.describe(), status, slope, name,
            f"|{slope:.3f} - {degree}| {'<=' if status == 'pass' else '>'} {budget.tolerance}",
            estimates,
        ))
    return results


# =============================================================================
# RETURN EFFECTS
# =============================================================================

def sample_return_effects(y, returns, seed=0):
    """
    Mean and standard error of the counter effect accumulated between
    consecutive visits of the component's center, over ``returns`` returns.
    """
    if returns < 2:
        raise SimulationError("at least 2 returns are needed")
    chain = component_model(y)
    plan = _Plan(chain)
    stream = _UniformStream(np.random.default_rng(_trajectory_seed(seed)))
    updates = plan.updates
    effects = np.zeros((returns, chain.dimension), dtype=np.int64)
    for r in range(returns):
        state = y.center
        total = np.zeros(chain.dimension, dtype=np.int64)
        while True:
            j = plan.pick(state, stream.next(), None)
            total += updates[j]
            state = chain.transitions[j].target
            if state == y.center:
                break
        effects[r] = total
    mean = effects.mean(axis=0)
    stderr = effects.std(axis=0, ddof=1) / math.sqrt(returns)
    return mean, stderr
