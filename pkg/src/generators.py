"""
Seeded random models, linear programs and conical sums for the property suites.

Every generator takes a ``numpy.random.Generator`` so suites are reproducible
from one seed.
"""

from fractions import Fraction

from src.components import enumerate_components, mc_add, mc_scale, zero_multicomponent
from src.model import State, StateKind, Transition, VassMdp
from src.ratlp import GE, LE, LinearProgram


PROBABILITY_WEIGHTS = (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(3, 4))


def _pick(rng, items):
    return items[int(rng.integers(0, len(items)))]


def random_model(rng, max_counters=3, max_states=4, max_transitions=8, strongly_connected=True,
                 max_update=2, probabilistic_share=0.5):
    """
    A valid VASS MDP. Strongly connected models start from a Hamiltonian
    cycle over the states and add random extra edges.
    """
    d = int(rng.integers(1, max_counters + 1))
    n = int(rng.integers(1, max_states + 1))
    counters = tuple(f"c{i}" for i in range(d))
    kinds = [
        StateKind.PROBABILISTIC if rng.random() < probabilistic_share else StateKind.NONDETERMINISTIC
        for _ in range(n)
    ]
    states = tuple(State(f"s{i}", kind) for i, kind in enumerate(kinds))

    edges = []
    if strongly_connected:
        edges = [(i, (i + 1) % n) for i in range(n)]
    else:
        edges = [(i, int(rng.integers(0, n))) for i in range(n)]
    extra = int(rng.integers(0, max(0, max_transitions - len(edges)) + 1))
    for _ in range(extra):
        edges.append((int(rng.integers(0, n)), int(rng.integers(0, n))))

    weights = [_pick(rng, PROBABILITY_WEIGHTS) for _ in edges]
    totals = {}
    for (source, _), weight in zip(edges, weights):
        totals[source] = totals.get(source, Fraction(0)) + weight

    transitions = []
    for j, ((source, target), weight) in enumerate(zip(edges, weights)):
        update = tuple(int(v) for v in rng.integers(-max_update, max_update + 1, size=d))
        probability = None
        if kinds[source] == StateKind.PROBABILISTIC:
            probability = weight / totals[source]
        transitions.append(Transition(f"t{j}", f"s{source}", f"s{target}", update, probability))
    return VassMdp(counters, states, tuple(transitions))


def random_lp(rng, max_vars=4, max_constraints=6, max_coefficient=3, box=5):
    """
    A maximization LP over nonnegative variables, each also bounded by ``box``,
    so the feasible region is a polytope and vertex enumeration is complete.
    The bound rows count toward ``max_constraints``.
    """
    if max_constraints < max_vars:
        raise ValueError("max_constraints must leave room for one bound row per variable")
    width = int(rng.integers(1, max_vars + 1))
    objective = [int(v) for v in rng.integers(-max_coefficient, max_coefficient + 1, size=width)]
    lp = LinearProgram(variables=[f"x{i}" for i in range(width)], objective=objective, maximize=True)
    for i in range(width):
        lp.add({i: 1}, LE, box)
    for _ in range(int(rng.integers(0, max_constraints - width + 1))):
        row = [int(v) for v in rng.integers(-max_coefficient, max_coefficient + 1, size=width)]
        relation = LE if rng.random() < 0.7 else GE
        rhs = int(rng.integers(-box, 2 * box + 1))
        lp.add_row(row, relation, rhs)
    return lp


def random_conical_sum(rng, m, max_terms=3, max_coefficient=5):
    """
    An integer combination of components of ``m`` with coefficients drawn
    from ``0..max_coefficient``, and its nonzero terms.
    """
    components = enumerate_components(m)
    total = zero_multicomponent(m)
    terms = []
    if not components:
        return total, terms
    for _ in range(int(rng.integers(1, max_terms + 1))):
        y = _pick(rng, components)
        a = Fraction(int(rng.integers(0, max_coefficient + 1)))
        if not a:
            continue
        total = mc_add(total, mc_scale(a, y.flow))
        terms.append((a, y))
    return total, terms
