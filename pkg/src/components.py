"""
Multi-components, components and their algebra.

A multi-component is a nonnegative transition flow that is conserved at every
state and proportional to the branching probabilities at probabilistic
states. Components are multi-components centered in a state (unit outgoing
flow there) whose support is a MEC of the chain induced by a memoryless
deterministic selection.
"""

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from src.constraints import counter_effect
from src.errors import DecompositionError, PreconditionError, SelectionLimitError, SingularSystemError
from src.graph import mec_decomposition
from src.model import submodel, with_updates
from src.ratlp import EQ, LinearProgram, feasible_point, solve_linear_system


logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)
DEFAULT_SELECTION_CAP = 1_000_000

LITERAL = "literal"
BOUNDED = "bounded"
ZB_MODES = (LITERAL, BOUNDED)


class Behavior(str, Enum):
    INCREASING = "increasing"
    DECREASING = "decreasing"
    ZERO_BOUNDED = "zero-bounded"
    ZERO_UNBOUNDED = "zero-unbounded"


@dataclass(frozen=True)
class MultiComponent:
    model: object
    flow: tuple

    @property
    def support(self):
        return tuple(tid for tid, value in zip(self.model.transition_ids, self.flow) if value > 0)

    def __getitem__(self, tid):
        return self.flow[self.model.transition_index[tid]]

    def outflow(self, state):
        return sum((self[t.id] for t in self.model.outgoing[state]), ZERO)

    def is_zero(self):
        return not any(self.flow)


@dataclass(frozen=True)
class Component:
    flow: MultiComponent
    center: str
    selection: tuple
    mec: object

    @property
    def model(self):
        return self.flow.model

    @property
    def support(self):
        return self.flow.support

    @property
    def selection_map(self):
        return dict(self.selection)


@dataclass(frozen=True)
class CounterBehavior:
    verdict: Behavior
    expected_effect: Fraction


def multicomponent_violations(model, flow):
    problems = []
    flow = tuple(Fraction(v) for v in flow)
    if len(flow) != len(model.transitions):
        return ["flow length does not match transition count"]
    if any(v < 0 for v in flow):
        problems.append("negative flow")
    index = model.transition_index
    for state in model.states:
        inflow = sum((flow[index[t.id]] for t in model.incoming[state.name]), ZERO)
        outflow = sum((flow[index[t.id]] for t in model.outgoing[state.name]), ZERO)
        if inflow != outflow:
            problems.append(f"flow not conserved at {state.name}")
        if state.is_probabilistic:
            for t in model.outgoing[state.name]:
                if flow[index[t.id]] != t.probability * outflow:
                    problems.append(f"flow not proportional at {state.name}")
                    break
    return problems


def make_multicomponent(model, flow):
    flow = tuple(Fraction(v) for v in flow)
    problems = multicomponent_violations(model, flow)
    if problems:
        raise ValueError(f"not a multi-component: {problems[0]}")
    return MultiComponent(model, flow)


def zero_multicomponent(model):
    return MultiComponent(model, tuple(ZERO for _ in model.transitions))


def _same_model(a, b):
    if a.model is not b.model and a.model != b.model:
        raise ValueError("multi-components belong to different models")


def mc_add(a, b):
    _same_model(a, b)
    return MultiComponent(a.model, tuple(x + y for x, y in zip(a.flow, b.flow)))


def mc_scale(factor, x):
    factor = Fraction(factor)
    if factor < 0:
        raise ValueError("scaling factor must be nonnegative")
    return MultiComponent(x.model, tuple(factor * v for v in x.flow))


def mc_sub(a, b):
    _same_model(a, b)
    flow = tuple(x - y for x, y in zip(a.flow, b.flow))
    if any(v < 0 for v in flow):
        raise ValueError("subtraction leaves a negative flow entry")
    return MultiComponent(a.model, flow)


def effect(x):
    """Delta(x) as a tuple of Fractions over the model's counters."""
    return tuple(counter_effect(x.model, x.flow))


def restrict_to_support(x):
    """The sub-model A_x spanned by the support of ``x``."""
    support = set(x.support)
    states = set()
    for tid in support:
        t = x.model.transition(tid)
        states.add(t.source)
        states.add(t.target)
    return submodel(x.model, states, support)


def lift(component, model):
    """Re-index a component of a sub-model onto ``model``'s transitions."""
    flow = tuple(
        component.flow[tid] if tid in component.model.transition_index else ZERO
        for tid in model.transition_ids
    )
    return Component(MultiComponent(model, flow), component.center, component.selection, component.mec)


# ---------------------------------------------------------------------------
# Components
# ---------------------------------------------------------------------------

def centered_flow(m, selection, mec, center):
    """
    The unique flow on ``mec`` conserved, proportional and with unit outgoing
    flow at ``center``. ``mec`` must be a MEC of the chain induced by ``selection``.
    """
    selection = dict(selection)
    if center not in mec.states:
        raise PreconditionError(f"center {center!r} is not in the MEC")
    inside = set(mec.transitions)
    for name in mec.states:
        if m.is_nondeterministic(name):
            chosen = [t.id for t in m.outgoing[name] if t.id in inside]
            if len(chosen) != 1 or selection.get(name) != chosen[0]:
                raise PreconditionError(f"selection does not induce the MEC at state {name!r}")

    columns = list(mec.transitions)
    position = {tid: i for i, tid in enumerate(columns)}
    rows = []
    rhs = []
    for name in mec.states:
        row = [ZERO] * len(columns)
        for t in m.incoming[name]:
            if t.id in position:
                row[position[t.id]] += 1
        for t in m.outgoing[name]:
            if t.id in position:
                row[position[t.id]] -= 1
        rows.append(row)
        rhs.append(ZERO)
        if m.is_probabilistic(name):
            outgoing = [t for t in m.outgoing[name] if t.id in position]
            for t in outgoing:
                row = [ZERO] * len(columns)
                for u in outgoing:
                    row[position[u.id]] -= t.probability
                row[position[t.id]] += 1
                rows.append(row)
                rhs.append(ZERO)
    row = [ZERO] * len(columns)
    for t in m.outgoing[center]:
        if t.id in position:
            row[position[t.id]] = ONE
    rows.append(row)
    rhs.append(ONE)

    solution = solve_linear_system(rows, rhs)
    if solution is None or any(v <= 0 for v in solution):
        raise SingularSystemError(f"no unique positive centered flow on MEC {list(mec.states)}")
    flow = tuple(solution[position[tid]] if tid in position else ZERO for tid in m.transition_ids)
    chosen = tuple((name, selection[name]) for name in mec.states if m.is_nondeterministic(name))
    return Component(MultiComponent(m, flow), center, chosen, mec)


def _component_key(component):
    index = component.model.transition_index
    support = component.support
    return (len(support), tuple(sorted(index[tid] for tid in support)), component.flow.flow)


def enumerate_components(m, cap=DEFAULT_SELECTION_CAP):
    """
    Every component of ``m``: per MEC of ``m``, every memoryless deterministic
    selection, every MEC of the induced chain, centered at its first state.
    """
    found = {}
    for mec in mec_decomposition(m).mecs:
        inside = set(mec.transitions)
        nondet = [name for name in mec.states if m.is_nondeterministic(name)]
        choices = [[t.id for t in m.outgoing[name] if t.id in inside] for name in nondet]
        count = 1
        for options in choices:
            count *= len(options)
        if count > cap:
            logger.warning(
                "component enumeration needs %d selections on a MEC of %d states (cap %d)",
                count,
                len(mec.states),
                cap,
            )
            raise SelectionLimitError(f"{count} selections exceed the cap of {cap}")
        probabilistic = [tid for tid in mec.transitions if m.is_probabilistic(m.transition(tid).source)]
        for combo in itertools.product(*choices):
            chain = submodel(m, mec.states, set(combo) | set(probabilistic))
            selection = dict(zip(nondet, combo))
            for bottom in mec_decomposition(chain).mecs:
                component = centered_flow(m, selection, bottom, bottom.states[0])
                key = (component.support, component.flow.flow)
                found.setdefault(key, component)
    ordered = sorted(found.values(), key=_component_key)
    logger.debug("enumerated %d component(s)", len(ordered))
    return ordered


def components_of(x, cap=DEFAULT_SELECTION_CAP):
    """Components of A_x, indexed over ``x.model``."""
    if x.is_zero():
        return []
    sub = restrict_to_support(x)
    return [lift(component, x.model) for component in enumerate_components(sub, cap=cap)]


def expected_return_effect(y):
    """E[E_y]: for a centered flow the expected effect per return equals Delta(y)."""
    return effect(y.flow)


def recenter(y, state):
    if state not in y.mec.states:
        raise PreconditionError(f"state {state!r} is outside the component's MEC")
    out = y.flow.outflow(state)
    flow = tuple(v / out for v in y.flow.flow)
    return Component(MultiComponent(y.model, flow), state, y.selection, y.mec)


def component_model(y):
    """A_y: the Markov chain spanned by the component's support."""
    return submodel(y.model, y.mec.states, y.support)


def _restricted_component(y, model):
    flow = tuple(y.flow[tid] for tid in model.transition_ids)
    return Component(MultiComponent(model, flow), y.center, y.selection, y.mec)


def hat_component(y):
    """A_y with Delta(y) subtracted on every edge entering the center, and y-hat."""
    chain = component_model(y)
    delta = effect(y.flow)
    updates = {}
    for t in chain.transitions:
        if t.target == y.center:
            updates[t.id] = tuple(Fraction(u) - d for u, d in zip(t.update, delta))
    hat_model = with_updates(chain, updates)
    return hat_model, _restricted_component(y, hat_model)


def co_hat_component(y):
    """A_y carrying exactly Delta(y) on edges entering the center, zero elsewhere."""
    chain = component_model(y)
    delta = effect(y.flow)
    zero = tuple(ZERO for _ in delta)
    updates = {t.id: (delta if t.target == y.center else zero) for t in chain.transitions}
    return with_updates(chain, updates)


# ---------------------------------------------------------------------------
# Counter behavior
# ---------------------------------------------------------------------------

def _has_potential(model, states, transitions, weight):
    """True iff phi exists with phi(target) - phi(source) == weight(t) on every edge."""
    transitions = [model.transition(tid) for tid in transitions]
    if not states:
        return True
    adjacency = {name: [] for name in states}
    for t in transitions:
        w = weight(t)
        adjacency[t.source].append((t.target, w))
        adjacency[t.target].append((t.source, -w))
    potential = {}
    for root in states:
        if root in potential:
            continue
        potential[root] = ZERO
        queue = [root]
        while queue:
            current = queue.pop()
            for neighbour, w in adjacency[current]:
                if neighbour not in potential:
                    potential[neighbour] = potential[current] + w
                    queue.append(neighbour)
    return all(potential[t.target] - potential[t.source] == weight(t) for t in transitions)


def zero_bounded_on_vector(y, weights):
    """Zero-boundedness of y on the linear functional ``sum_c weights[c] * c``."""
    counters = y.model.counters

    def weight(t):
        return sum((Fraction(weights.get(c, 0)) * u for c, u in zip(counters, t.update)), ZERO)

    return _has_potential(y.model, y.mec.states, y.support, weight)


def classify_counter_behavior(y, counter):
    position = y.model.counter_index.get(counter)
    if position is None:
        raise PreconditionError(f"unknown counter {counter!r}")
    expected = effect(y.flow)[position]
    if expected > 0:
        return CounterBehavior(Behavior.INCREASING, expected)
    if expected < 0:
        return CounterBehavior(Behavior.DECREASING, expected)
    bounded = _has_potential(
        y.model, y.mec.states, y.support, lambda t: Fraction(t.update[position])
    )
    verdict = Behavior.ZERO_BOUNDED if bounded else Behavior.ZERO_UNBOUNDED
    return CounterBehavior(verdict, expected)


def counter_behaviors(y):
    return {c: classify_counter_behavior(y, c) for c in y.model.counters}


def hat_behavior(y, counter):
    _, y_hat = hat_component(y)
    return classify_counter_behavior(y_hat, counter).verdict


# ---------------------------------------------------------------------------
# Decomposition
# ---------------------------------------------------------------------------

def _greedy(x, components):
    residue = list(x.flow)
    index = x.model.transition_index
    terms = []
    for y in components:
        support = y.support
        if not support or any(residue[index[tid]] <= 0 for tid in support):
            continue
        a = min(residue[index[tid]] / y.flow[tid] for tid in support)
        for tid in support:
            residue[index[tid]] -= a * y.flow[tid]
        terms.append((a, y))
    return terms, residue


def conical_decomposition(x, components=None, cap=DEFAULT_SELECTION_CAP):
    """
    Write ``x`` as a conical sum of components of A_x.

    One greedy pass over the ordered components subtracts
    ``a = min_t residue(t) / y(t)`` whenever y's support lies inside the
    residue's support; the residue must end at zero.
    """
    if components is None:
        components = components_of(x, cap=cap)
    terms, residue = _greedy(x, components)
    if any(residue):
        raise DecompositionError(
            f"nonzero residue after decomposition on {[tid for tid, v in zip(x.model.transition_ids, residue) if v]}"
        )
    return terms


def reconstruct(model, terms):
    total = zero_multicomponent(model)
    for a, y in terms:
        total = mc_add(total, mc_scale(a, y.flow))
    return total


def _cone_member(x, components):
    lp = LinearProgram(variables=[f"a{i}" for i in range(len(components))])
    for j, tid in enumerate(x.model.transition_ids):
        terms = {i: y.flow.flow[j] for i, y in enumerate(components) if y.flow.flow[j]}
        if not terms:
            if x.flow[j]:
                return False
            continue
        lp.add(terms, EQ, x.flow[j])
    return feasible_point(lp) is not None


def zero_bounded_multicomponent(x, counter, mode=LITERAL, cap=DEFAULT_SELECTION_CAP):
    """
    Delta(x)(c) == 0 and x is a conical sum of components y whose y-hat is
    zero-unbounded on c (``literal``) or zero-bounded on c (``bounded``).
    """
    if mode not in ZB_MODES:
        raise PreconditionError(f"unknown zero-boundedness mode {mode!r}")
    position = x.model.counter_index[counter]
    if effect(x)[position] != 0:
        return False
    if x.is_zero():
        return True
    wanted = Behavior.ZERO_UNBOUNDED if mode == LITERAL else Behavior.ZERO_BOUNDED
    qualifying = [y for y in components_of(x, cap=cap) if hat_behavior(y, counter) == wanted]
    if not qualifying:
        return False
    _, residue = _greedy(x, qualifying)
    if not any(residue):
        return True
    return _cone_member(x, qualifying)
