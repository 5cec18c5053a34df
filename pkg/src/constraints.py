"""
Flow system (I) and ranking system (II) over a VASS MDP.

Maximal solutions are built one strict inequality at a time: every candidate
inequality is tightened to ``>= 1`` on its own, feasible points are summed and
the sum is scaled to integers. Both systems are closed under addition and
positive scaling, so the sum achieves every individually achievable
strictness.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction

from src.errors import PreconditionError
from src.ratlp import EQ, GE, LE, LinearProgram, feasible_point, scale_to_integers


logger = logging.getLogger(__name__)

ZERO = Fraction(0)


@dataclass(frozen=True)
class SolutionI:
    x: tuple
    strict_counters: frozenset
    strict_transitions: frozenset
    transitions: tuple
    counters: tuple
    effect: tuple

    def flow(self, tid):
        return self.x[self.transitions.index(tid)]

    def effect_of(self, counter):
        return self.effect[self.counters.index(counter)]


@dataclass(frozen=True)
class SolutionII:
    y: tuple
    z: tuple
    strict_counters: frozenset
    strict_nondet_transitions: frozenset
    strict_prob_states: frozenset
    counters: tuple
    states: tuple


@dataclass(frozen=True)
class RankFunction:
    """rank(p, v) = z(p) + sum_c y(c) * v(c) on the model it was solved on."""

    y: dict
    z: dict
    model: object

    def rank(self, state, values):
        return self.z[state] + sum(
            (self.y[c] * v for c, v in zip(self.model.counters, values)), ZERO
        )


def counter_effect(m, flow):
    """Sum of flow(t) * u_t per counter, ``flow`` indexed by transition order."""
    totals = [ZERO] * m.dimension
    for amount, t in zip(flow, m.transitions):
        if amount:
            for i, value in enumerate(t.update):
                if value:
                    totals[i] += amount * value
    return totals


# ---------------------------------------------------------------------------
# System (I)
# ---------------------------------------------------------------------------

def flow_constraints(m, lp, offset=0):
    """Conservation at every state and proportionality at probabilistic states."""
    index = m.transition_index
    for state in m.states:
        terms = {}
        for t in m.incoming[state.name]:
            terms[offset + index[t.id]] = terms.get(offset + index[t.id], 0) + 1
        for t in m.outgoing[state.name]:
            terms[offset + index[t.id]] = terms.get(offset + index[t.id], 0) - 1
        terms = {k: v for k, v in terms.items() if v}
        if terms:
            lp.add(terms, EQ, 0)
        if state.is_probabilistic:
            outgoing = m.outgoing[state.name]
            for t in outgoing:
                terms = {offset + index[u.id]: -t.probability for u in outgoing}
                terms[offset + index[t.id]] += 1
                lp.add(terms, EQ, 0)


def build_system_i(m):
    lp = LinearProgram(variables=[f"x[{tid}]" for tid in m.transition_ids])
    flow_constraints(m, lp)
    for c in range(m.dimension):
        terms = {j: t.update[c] for j, t in enumerate(m.transitions) if t.update[c]}
        lp.add(terms, GE, 0)
    return lp


def _system_i_candidates(m):
    candidates = []
    for c, name in enumerate(m.counters):
        terms = {j: t.update[c] for j, t in enumerate(m.transitions) if t.update[c]}
        candidates.append((("counter", name), terms))
    for j, tid in enumerate(m.transition_ids):
        candidates.append((("transition", tid), {j: 1}))
    return candidates


def _achieved_i(m, point):
    effect = counter_effect(m, point)
    achieved = {("counter", name) for name, value in zip(m.counters, effect) if value > 0}
    achieved |= {("transition", tid) for tid, value in zip(m.transition_ids, point) if value > 0}
    return achieved


def maximal_solution_i(m, stats=None):
    """Maximal solution of system (I); ``x = 0`` when nothing is achievable."""
    base = build_system_i(m)
    total = [ZERO] * len(m.transitions)
    achieved = set()
    for key, terms in _system_i_candidates(m):
        if key in achieved:
            continue
        lp = base.copy()
        lp.add(terms, GE, 1)
        point = feasible_point(lp, stats=stats)
        if point is None:
            continue
        total = [a + b for a, b in zip(total, point)]
        achieved |= _achieved_i(m, point)
    x = tuple(scale_to_integers(total))
    effect = counter_effect(m, x)
    solution = SolutionI(
        x=x,
        strict_counters=frozenset(name for name, value in zip(m.counters, effect) if value > 0),
        strict_transitions=frozenset(tid for tid, value in zip(m.transition_ids, x) if value > 0),
        transitions=m.transition_ids,
        counters=m.counters,
        effect=tuple(effect),
    )
    logger.debug(
        "system I: strict counters %s, strict transitions %s",
        sorted(solution.strict_counters),
        sorted(solution.strict_transitions),
    )
    return solution


# ---------------------------------------------------------------------------
# System (II)
# ---------------------------------------------------------------------------

def _rank_terms(m, t, scale=1):
    """Terms of z(target) - z(source) + u_t . y; y first, then z."""
    d = m.dimension
    terms = {}
    for c, value in enumerate(t.update):
        if value:
            terms[c] = terms.get(c, 0) + scale * value
    target = d + m.state_index[t.target]
    source = d + m.state_index[t.source]
    terms[target] = terms.get(target, 0) + scale
    terms[source] = terms.get(source, 0) - scale
    return {k: v for k, v in terms.items() if v}


def _expected_rank_terms(m, state):
    terms = {}
    for t in m.outgoing[state]:
        for k, v in _rank_terms(m, t, t.probability).items():
            terms[k] = terms.get(k, 0) + v
    return {k: v for k, v in terms.items() if v}


def build_system_ii(m):
    variables = [f"y[{c}]" for c in m.counters] + [f"z[{s}]" for s in m.state_names]
    lp = LinearProgram(variables=variables)
    for state in m.states:
        if state.is_probabilistic:
            if m.outgoing[state.name]:
                lp.add(_expected_rank_terms(m, state.name), LE, 0)
        else:
            for t in m.outgoing[state.name]:
                lp.add(_rank_terms(m, t), LE, 0)
    return lp


def _system_ii_candidates(m):
    candidates = []
    for c, name in enumerate(m.counters):
        candidates.append((("counter", name), {c: 1}, GE, 1))
    for state in m.states:
        if state.is_probabilistic:
            if m.outgoing[state.name]:
                candidates.append(
                    (("state", state.name), _expected_rank_terms(m, state.name), LE, -1)
                )
        else:
            for t in m.outgoing[state.name]:
                candidates.append((("transition", t.id), _rank_terms(m, t), LE, -1))
    return candidates


def _evaluate(terms, point):
    return sum((Fraction(v) * point[k] for k, v in terms.items()), ZERO)


def maximal_solution_ii(m, stats=None):
    """Maximal solution of system (II); ``(y, z) = 0`` when nothing is achievable."""
    base = build_system_ii(m)
    candidates = _system_ii_candidates(m)
    total = [ZERO] * (m.dimension + len(m.states))
    achieved = set()
    for key, terms, relation, rhs in candidates:
        if key in achieved:
            continue
        lp = base.copy()
        lp.add(terms, relation, rhs)
        point = feasible_point(lp, stats=stats)
        if point is None:
            continue
        total = [a + b for a, b in zip(total, point)]
        for other_key, other_terms, other_relation, _ in candidates:
            value = _evaluate(other_terms, point)
            if (other_relation == GE and value > 0) or (other_relation == LE and value < 0):
                achieved.add(other_key)
    scaled = scale_to_integers(total)
    y = tuple(scaled[: m.dimension])
    z = tuple(scaled[m.dimension:])
    rf = RankFunction(dict(zip(m.counters, y)), dict(zip(m.state_names, z)), m)
    strict_transitions = set()
    strict_states = set()
    for state in m.states:
        if state.is_probabilistic:
            if m.outgoing[state.name] and expected_rank_effect(rf, state.name) < 0:
                strict_states.add(state.name)
        else:
            for t in m.outgoing[state.name]:
                if rank_effect(rf, t.id) < 0:
                    strict_transitions.add(t.id)
    solution = SolutionII(
        y=y,
        z=z,
        strict_counters=frozenset(name for name, value in zip(m.counters, y) if value > 0),
        strict_nondet_transitions=frozenset(strict_transitions),
        strict_prob_states=frozenset(strict_states),
        counters=m.counters,
        states=m.state_names,
    )
    logger.debug(
        "system II: strict counters %s, decreasing transitions %s, decreasing states %s",
        sorted(solution.strict_counters),
        sorted(strict_transitions),
        sorted(strict_states),
    )
    return solution


# ---------------------------------------------------------------------------
# Rank functions and the dichotomy
# ---------------------------------------------------------------------------

def rank_function(m, solution):
    return RankFunction(
        dict(zip(m.counters, (Fraction(v) for v in solution.y))),
        dict(zip(m.state_names, (Fraction(v) for v in solution.z))),
        m,
    )


def rank_of(rf, configuration):
    return rf.rank(configuration.state, configuration.values)


def rank_effect(rf, tid):
    t = rf.model.transition(tid)
    change = rf.z[t.target] - rf.z[t.source]
    for name, value in zip(rf.model.counters, t.update):
        if value:
            change += value * rf.y[name]
    return Fraction(change)


def expected_rank_effect(rf, state):
    if not rf.model.is_probabilistic(state):
        raise PreconditionError(f"state {state!r} is not probabilistic")
    return sum(
        (t.probability * rank_effect(rf, t.id) for t in rf.model.outgoing[state]),
        ZERO,
    )


def dichotomy_failures(m, solution_i, solution_ii):
    """Items covered by neither maximal solution."""
    failures = []
    for name in m.counters:
        if name not in solution_ii.strict_counters and name not in solution_i.strict_counters:
            failures.append(("counter", name))
    for t in m.transitions:
        if t.id in solution_i.strict_transitions:
            continue
        if m.is_probabilistic(t.source):
            if t.source in solution_ii.strict_prob_states:
                continue
        elif t.id in solution_ii.strict_nondet_transitions:
            continue
        failures.append(("transition", t.id))
    return failures


def check_dichotomy(m, solution_i, solution_ii):
    return not dichotomy_failures(m, solution_i, solution_ii)
