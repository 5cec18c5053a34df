"""
Asymptotic classification of termination, counter and transition complexity.

``full_classification`` runs the per-degree procedure on a strongly connected
VASS MDP: layered models with local counter copies, rank-zero-unboundedness
sets, the two constraint systems per degree and, once no candidate degree is
left, the exponential iterative scheme check. ``classify_markov_chain`` gives
the three-way classification of VASS Markov chains.
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from src.components import (
    DEFAULT_SELECTION_CAP,
    LITERAL,
    Behavior,
    MultiComponent,
    classify_counter_behavior,
    effect,
    enumerate_components,
    restrict_to_support,
    zero_bounded_multicomponent,
)
from src.constraints import (
    dichotomy_failures,
    expected_rank_effect,
    maximal_solution_i,
    maximal_solution_ii,
    rank_effect,
    rank_function,
)
from src.errors import DichotomyError, PreconditionError
from src.graph import mec_decomposition
from src.model import (
    ObservableKind,
    add_step_counter,
    add_transition_counter,
    check_observable,
    effective_markov_chain,
    model_digest,
    project_counters,
    restrict_transitions,
    submodel,
    validate_strongly_connected,
    with_updates,
)
from src.ratlp import SolverStats


logger = logging.getLogger(__name__)

DEFAULT_MAX_K = 16


class EstimateKind(str, Enum):
    TIGHT_POLY = "tight-poly"
    LOWER_POLY = "lower-poly"
    EXPONENTIAL_LOWER = "exponential-lower"
    UNBOUNDED = "unbounded"
    THETA_N = "theta-n"
    THETA_N2 = "theta-n2"
    CONSTANT = "constant"
    CAP_REACHED = "cap-reached"
    UNRESOLVED = "unresolved"


UNFINISHED = (EstimateKind.CAP_REACHED, EstimateKind.UNRESOLVED)
CHAIN_ORDER = {
    EstimateKind.CONSTANT: 0,
    EstimateKind.THETA_N: 1,
    EstimateKind.THETA_N2: 2,
    EstimateKind.UNBOUNDED: 3,
}


@dataclass(frozen=True)
class Estimate:
    kind: EstimateKind
    degree: int = None
    provenance: str = ""

    def describe(self):
        if self.kind == EstimateKind.TIGHT_POLY:
            return "Θ(n)" if self.degree == 1 else f"Θ(n^{self.degree})"
        if self.kind == EstimateKind.LOWER_POLY:
            return f"≥ n^{self.degree}"
        if self.kind == EstimateKind.EXPONENTIAL_LOWER:
            return "≥ 2^n"
        if self.kind == EstimateKind.UNBOUNDED:
            return "unbounded"
        if self.kind == EstimateKind.THETA_N:
            return "Θ(n)"
        if self.kind == EstimateKind.THETA_N2:
            return "Θ(n^2)"
        if self.kind == EstimateKind.CONSTANT:
            return "asymptotically constant"
        if self.kind == EstimateKind.CAP_REACHED:
            return f"≥ n^{self.degree} (cap reached)"
        return "unresolved"

    @property
    def polynomial_degree(self):
        """Degree of a tight polynomial verdict, else None."""
        if self.kind == EstimateKind.TIGHT_POLY:
            return self.degree
        if self.kind == EstimateKind.THETA_N:
            return 1
        if self.kind == EstimateKind.THETA_N2:
            return 2
        return None


def tight(k, provenance):
    return Estimate(EstimateKind.TIGHT_POLY, k, provenance)


def lower(k, provenance):
    return Estimate(EstimateKind.LOWER_POLY, k, provenance)


# ---------------------------------------------------------------------------
# Classifier state and layered models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LayerCounter:
    name: str
    original: str
    level: int = None
    mec: int = None
    mec_transitions: frozenset = None

    @property
    def is_local(self):
        return self.level is not None


@dataclass(frozen=True)
class LayeredVass:
    base: object
    index: int
    model: object
    counter_table: tuple

    @property
    def global_counters(self):
        return tuple(entry.name for entry in self.counter_table if not entry.is_local)

    def counters_tight_upto(self, l, st):
        """Layer counters (global or local) whose original is tight at n^m, m <= l."""
        names = []
        for entry in self.counter_table:
            level = st.counter_level(entry.original)
            if level is not None and level <= l:
                names.append(entry.name)
        return tuple(names)


@dataclass
class ClassifierState:
    model: object
    zb_mode: str = LITERAL
    selection_cap: int = DEFAULT_SELECTION_CAP
    counter_est: dict = field(default_factory=dict)
    trans_est: dict = field(default_factory=dict)
    layer_cache: dict = field(default_factory=dict)
    r_cache: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    stats: SolverStats = field(default_factory=SolverStats)

    def __post_init__(self):
        for c in self.model.counters:
            self.counter_est.setdefault(c, lower(1, "trivial lower estimate"))
        for tid in self.model.transition_ids:
            self.trans_est.setdefault(tid, lower(1, "trivial lower estimate"))

    @staticmethod
    def _level(est):
        return est.degree if est.kind == EstimateKind.TIGHT_POLY else None

    def counter_level(self, c):
        return self._level(self.counter_est[c])

    def transition_level(self, tid):
        return self._level(self.trans_est[tid])

    def unclassified_counters(self):
        return [c for c in self.model.counters if self.counter_est[c].kind == EstimateKind.LOWER_POLY]

    def unclassified_transitions(self):
        return [t for t in self.model.transition_ids if self.trans_est[t].kind == EstimateKind.LOWER_POLY]

    def transitions_in(self, i):
        """T_i: transitions whose complexity has a lower estimate n^i."""
        chosen = []
        for tid in self.model.transition_ids:
            est = self.trans_est[tid]
            if est.kind == EstimateKind.LOWER_POLY:
                chosen.append(tid)
            elif est.kind == EstimateKind.TIGHT_POLY and est.degree >= i:
                chosen.append(tid)
        return tuple(chosen)

    def counters_tight_at(self, j):
        return [c for c in self.model.counters if self.counter_level(c) == j]

    def aset(self):
        return sorted({self.counter_level(c) for c in self.model.counters} - {None})

    def bset(self):
        return sorted({self.transition_level(t) for t in self.model.transition_ids} - {None})

    def c_plus(self, k):
        """Counters with a lower estimate n^j, j >= k, and no tight estimate."""
        return [
            c for c in self.model.counters
            if self.counter_est[c].kind == EstimateKind.LOWER_POLY and self.counter_est[c].degree >= k
        ]

    def max_level(self):
        levels = [self.counter_level(c) for c in self.model.counters]
        levels += [self.transition_level(t) for t in self.model.transition_ids]
        return max([level for level in levels if level is not None], default=0)

    def all_classified(self):
        return not self.unclassified_counters() and not self.unclassified_transitions()

    def set_counter(self, c, est):
        current = self.counter_est[c]
        if current.kind == EstimateKind.TIGHT_POLY:
            raise AssertionError(f"counter {c} already tight at n^{current.degree}")
        self.counter_est[c] = est

    def set_transition(self, tid, est):
        current = self.trans_est[tid]
        if current.kind == EstimateKind.TIGHT_POLY:
            raise AssertionError(f"transition {tid} already tight at n^{current.degree}")
        self.trans_est[tid] = est


def build_layer(m, i, st):
    """
    A_i: ``m`` restricted to T_i, where every counter tight at n^j (j < i) is
    replaced by one local copy per MEC of m restricted to T_{i-j}.
    """
    if i < 1:
        raise PreconditionError("layer index must be at least 1")
    t_i = st.transitions_in(i)
    tight_before = {}
    for c in m.counters:
        level = st.counter_level(c)
        if level is not None and level < i:
            tight_before[c] = level
    key = (
        t_i,
        tuple((c, j, st.transitions_in(i - j)) for c, j in tight_before.items()),
    )
    cached = st.layer_cache.get(key)
    if cached is not None:
        logger.debug("reusing layer for index %d (built as index %d)", i, cached.index)
        return dataclasses.replace(cached, index=i)

    restricted = restrict_transitions(m, t_i)
    decompositions = {}
    table = []
    for c in m.counters:
        j = tight_before.get(c)
        if j is None:
            table.append(LayerCounter(c, c))
            continue
        if j not in decompositions:
            decompositions[j] = mec_decomposition(m, transitions=st.transitions_in(i - j))
        for x, mec in enumerate(decompositions[j].mecs):
            table.append(LayerCounter(f"{c}[B{x + 1}]", c, j, x, frozenset(mec.transitions)))

    position = m.counter_index
    updates = {}
    for t in restricted.transitions:
        row = []
        for entry in table:
            value = t.update[position[entry.original]]
            if entry.is_local and t.id not in entry.mec_transitions:
                value = 0
            row.append(value)
        updates[t.id] = tuple(row)
    model = with_updates(restricted, updates, counters=[entry.name for entry in table])
    layer = LayeredVass(m, i, model, tuple(table))
    st.layer_cache[key] = layer
    return layer


def stabilized_layer(m, st):
    """A layer past every classified degree; all later layers coincide with it."""
    return build_layer(m, 2 * st.max_level() + 1, st)


def compute_r_set(layer, l, k, st):
    """
    Transitions with nonzero effect on the rank function of the maximal
    system (II) solution for the layer A_{k-l} restricted to T_{k-l+1} and
    projected onto copies of counters tight at n^m, m <= l. A probabilistic
    state contributes all of its transitions or none.
    """
    if not 1 <= l <= k // 2:
        raise PreconditionError(f"l={l} outside 1..{k // 2}")
    if layer.index != k - l:
        raise PreconditionError(f"expected layer {k - l}, got {layer.index}")
    restricted = restrict_transitions(layer.model, st.transitions_in(k - l + 1))
    projected = project_counters(restricted, layer.counters_tight_upto(l, st))
    cached = st.r_cache.get(projected)
    if cached is not None:
        return cached
    solution = maximal_solution_ii(projected, stats=st.stats)
    rf = rank_function(projected, solution)
    chosen = set()
    for state in projected.states:
        outgoing = projected.outgoing[state.name]
        changing = [t.id for t in outgoing if rank_effect(rf, t.id) != 0]
        if state.is_probabilistic:
            if changing:
                chosen.update(t.id for t in outgoing)
        else:
            chosen.update(changing)
    result = frozenset(chosen)
    st.r_cache[projected] = result
    return result


def candidate_sets(st):
    aset = st.aset()
    bset = st.bset()
    sums = {a + b for a in aset for b in bset}
    x1 = set(bset) | sums | {1}
    s_r = {r: set(bset) | {a + b for a in aset for b in bset if a <= r} for r in aset}
    x2 = {max(s + r, 2 * r) for r in aset for s in s_r[r]}
    x0 = {2 * r for r in aset}
    return {
        "A": aset,
        "B": bset,
        "X0": sorted(x0),
        "X1": sorted(x1),
        "X2": sorted(x2),
        "S": {r: sorted(values) for r, values in s_r.items()},
    }


def candidate_ks(st, cap=None):
    """
    Ascending degrees at which a new upper estimate can appear.

    X1 and X2 as defined by the set arithmetic on A and B, plus 2r for every
    r in A (the degree at which the rank sets of the first layer can change).
    """
    sets = candidate_sets(st)
    values = sorted(set(sets["X0"]) | set(sets["X1"]) | set(sets["X2"]))
    if cap is not None:
        values = [k for k in values if k <= cap]
    return values


def _t_star(k, t_prime, aset, bset):
    if k == 1:
        return 1
    if t_prime:
        return k
    sums = [a + b for a in aset for b in bset if a + b <= k]
    return max(sums) if sums else None


def _decreasing_transitions(model, rf):
    chosen = []
    for state in model.states:
        outgoing = model.outgoing[state.name]
        if state.is_probabilistic:
            if outgoing and expected_rank_effect(rf, state.name) < 0:
                chosen.extend(t.id for t in outgoing)
        else:
            chosen.extend(t.id for t in outgoing if rank_effect(rf, t.id) < 0)
    return chosen


def classify_step_k(m, k, st):
    """Classify ``m`` up to degree k, given a classification up to k-1."""
    aset = st.aset()
    bset = st.bset()
    sets = candidate_sets(st)
    x_set = sorted(
        ({a for a in aset} | {k - b for b in bset} | {k - b - a for a in aset for b in bset})
        & set(range(1, k // 2 + 1))
    )
    r_sets = {}
    for l in x_set:
        layer = build_layer(m, k - l, st)
        r_sets[l] = compute_r_set(layer, l, k, st)
    union = frozenset().union(*r_sets.values()) if r_sets else frozenset()

    unclassified = set(st.unclassified_transitions())
    layer_k = build_layer(m, k, st)
    t_prime = [tid for tid in m.transition_ids if tid in union and tid in unclassified]
    for tid in t_prime:
        l = min(level for level, chosen in r_sets.items() if tid in chosen)
        st.set_transition(tid, tight(k, f"rank-zero-unbounded components (layer {k - l}, l={l})"))

    t_hat = [tid for tid in m.transition_ids if tid in unclassified and tid not in union]
    restricted = restrict_transitions(layer_k.model, t_hat)
    solution_i = maximal_solution_i(restricted, stats=st.stats)
    solution_ii = maximal_solution_ii(restricted, stats=st.stats)
    rf = rank_function(restricted, solution_ii)

    in_scope = set(layer_k.global_counters) | set(t_hat)
    failures = [
        item for item in dichotomy_failures(restricted, solution_i, solution_ii)
        if item[1] in in_scope
    ]
    if failures:
        raise DichotomyError(f"degree {k}: no estimate derivable for {failures}")

    t_star = _t_star(k, union, aset, bset)
    upper_counters = [c for c in layer_k.global_counters if c in solution_ii.strict_counters]
    upper_transitions = _decreasing_transitions(restricted, rf)
    if t_star is None:
        skipped = sorted(upper_counters + upper_transitions)
        st.notes.append(
            f"degree {k}: no a+b <= {k} with a in A, b in B; no ranking upper estimate"
            + (f" (skipped for {skipped})" if skipped else "")
        )
    else:
        if t_star < k and (upper_counters or upper_transitions):
            logger.warning("degree %d: ranking upper estimate n^%d below the known lower n^%d", k, t_star, k)
            st.notes.append(f"degree {k}: upper estimate n^{t_star} below lower n^{k}; reported as n^{k}")
        for c in upper_counters:
            st.set_counter(c, tight(k, f"ranking function at degree {k} (upper n^{t_star})"))
        for tid in upper_transitions:
            st.set_transition(tid, tight(k, f"rank-decreasing at degree {k} (upper n^{t_star})"))

    for c, value in zip(restricted.counters, solution_i.effect):
        if value > 0 and c in st.counter_est and st.counter_est[c].kind == EstimateKind.LOWER_POLY:
            st.set_counter(c, lower(k + 1, f"positive flow effect at degree {k}"))
    for tid in solution_i.strict_transitions:
        if st.trans_est[tid].kind == EstimateKind.LOWER_POLY:
            st.set_transition(tid, lower(k + 1, f"positive flow at degree {k}"))

    st.trace.append({
        "k": k,
        "A": aset,
        "B": bset,
        "X": x_set,
        "X0": sets["X0"],
        "X1": sets["X1"],
        "X2": sets["X2"],
        "R": {str(l): sorted(chosen, key=m.transition_index.__getitem__) for l, chosen in r_sets.items()},
        "T_prime": t_prime,
        "t_star": t_star,
    })
    logger.info("degree %d classified: T'=%s t*=%s", k, t_prime, t_star)
    return st


# ---------------------------------------------------------------------------
# Exponential iterative scheme
# ---------------------------------------------------------------------------

def exponential_scheme_check(m, x, mode=LITERAL, cap=DEFAULT_SELECTION_CAP):
    """
    True iff for every counter c either Delta(x)(c) > 0 or the restriction of
    x to every MEC of A_x is zero-bounded on c.
    """
    delta = effect(x)
    if x.is_zero():
        parts = []
    else:
        mecs = mec_decomposition(restrict_to_support(x)).mecs
        parts = []
        for mec in mecs:
            inside = set(mec.transitions)
            flow = tuple(v if tid in inside else Fraction(0) for tid, v in zip(m.transition_ids, x.flow))
            parts.append(MultiComponent(m, flow))
    for c, value in zip(m.counters, delta):
        if value > 0:
            continue
        if not all(zero_bounded_multicomponent(part, c, mode, cap=cap) for part in parts):
            logger.info("exponential scheme fails on counter %s", c)
            return False
    return True


def _exponential_phase(m, st):
    layer = stabilized_layer(m, st)
    solution = maximal_solution_i(layer.model, stats=st.stats)
    x = MultiComponent(layer.model, tuple(Fraction(v) for v in solution.x))
    passed = exponential_scheme_check(layer.model, x, st.zb_mode, cap=st.selection_cap)
    delta = dict(zip(layer.model.counters, effect(x)))
    st.trace.append({
        "phase": "exponential",
        "layer": layer.index,
        "x": {tid: int(v) for tid, v in zip(layer.model.transition_ids, solution.x)},
        "scheme": passed,
        "zb_mode": st.zb_mode,
    })
    if passed:
        for c in st.unclassified_counters():
            if delta.get(c, 0) > 0:
                st.set_counter(c, Estimate(EstimateKind.EXPONENTIAL_LOWER, None, "exponential iterative scheme"))
        for tid in st.unclassified_transitions():
            if solution.flow(tid) > 0:
                st.set_transition(tid, Estimate(EstimateKind.EXPONENTIAL_LOWER, None, "exponential iterative scheme"))
    reason = "scheme covers no flow here" if passed else f"no exponential iterative scheme ({st.zb_mode} mode)"
    for c in st.unclassified_counters():
        st.set_counter(c, Estimate(EstimateKind.UNRESOLVED, None, reason))
    for tid in st.unclassified_transitions():
        st.set_transition(tid, Estimate(EstimateKind.UNRESOLVED, None, reason))


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class EstimateReport:
    model_digest: str
    counters: dict
    transitions: dict
    length: Estimate = None
    trace: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    cap: int = None
    zb_mode: str = None
    kind: str = "mdp"

    def items(self):
        out = []
        if self.length is not None:
            out.append(("length", self.length))
        out.extend((f"counter:{c}", est) for c, est in self.counters.items())
        out.extend((f"transition:{t}", est) for t, est in self.transitions.items())
        return out

    @property
    def exit_status(self):
        return 3 if any(est.kind in UNFINISHED for _, est in self.items()) else 0


def degree_bound(m):
    return 2 ** m.dimension * 3 ** len(m.transitions)


def full_classification(
    m,
    cap=DEFAULT_MAX_K,
    include_length=True,
    zb_mode=LITERAL,
    selection_cap=DEFAULT_SELECTION_CAP,
):
    """Classify every counter, transition and (optionally) the length of ``m``."""
    if cap < 1:
        raise PreconditionError("cap must be at least 1")
    if not validate_strongly_connected(m):
        raise PreconditionError("model is not strongly connected")

    analysed = m
    length_counter = None
    if include_length:
        analysed, length_counter = add_step_counter(m)
    st = ClassifierState(analysed, zb_mode=zb_mode, selection_cap=selection_cap)
    bound = degree_bound(analysed)

    done = 0
    while not st.all_classified():
        upcoming = [k for k in candidate_ks(st) if k > done]
        if not upcoming:
            _exponential_phase(analysed, st)
            break
        k = upcoming[0]
        if k > cap:
            st.notes.append(f"next candidate degree {k} exceeds the cap {cap}")
            for c in st.unclassified_counters():
                st.set_counter(c, Estimate(EstimateKind.CAP_REACHED, cap, f"lower n^{cap} at the cap"))
            for tid in st.unclassified_transitions():
                st.set_transition(tid, Estimate(EstimateKind.CAP_REACHED, cap, f"lower n^{cap} at the cap"))
            break
        if k > bound:
            raise AssertionError(f"degree {k} exceeds 2^d*3^|T| = {bound}")
        classify_step_k(analysed, k, st)
        done = k

    for label, est in list(st.counter_est.items()) + list(st.trans_est.items()):
        if est.kind == EstimateKind.TIGHT_POLY and est.degree > bound:
            raise AssertionError(f"{label}: n^{est.degree} exceeds 2^d*3^|T| = {bound}")
        if est.kind == EstimateKind.LOWER_POLY:
            raise AssertionError(f"{label} left with a working lower estimate")

    counters = {c: st.counter_est[c] for c in m.counters}
    transitions = {tid: st.trans_est[tid] for tid in m.transition_ids}
    return EstimateReport(
        model_digest=model_digest(m),
        counters=counters,
        transitions=transitions,
        length=st.counter_est[length_counter] if length_counter else None,
        trace=st.trace,
        notes=st.notes,
        stats=st.stats.as_dict(),
        cap=cap,
        zb_mode=zb_mode,
    )


def classify_observable(m, observable, cap=DEFAULT_MAX_K, zb_mode=LITERAL, selection_cap=DEFAULT_SELECTION_CAP):
    check_observable(m, observable)
    if observable.kind == ObservableKind.LENGTH:
        extended, step_counter = add_step_counter(m)
        report = full_classification(extended, cap, False, zb_mode, selection_cap)
        return report.counters[step_counter]
    report = full_classification(m, cap, False, zb_mode, selection_cap)
    if observable.kind == ObservableKind.COUNTER:
        return report.counters[observable.name]
    return report.transitions[observable.name]


# ---------------------------------------------------------------------------
# VASS Markov chains
# ---------------------------------------------------------------------------

@dataclass
class McVerdict:
    model_digest: str
    counters: dict
    transitions: dict
    length: Estimate
    witnesses: list = field(default_factory=list)
    kind: str = "markov-chain"

    def items(self):
        out = [("length", self.length)]
        out.extend((f"counter:{c}", est) for c, est in self.counters.items())
        out.extend((f"transition:{t}", est) for t, est in self.transitions.items())
        return out

    @property
    def exit_status(self):
        return 0


def _chain_counter_verdict(y, counter, delta):
    position = y.model.counter_index[counter]
    if delta[position] <= 0:
        return Estimate(EstimateKind.THETA_N, 1, f"{counter} not increasing on the component")
    negative = [c for c, d in zip(y.model.counters, delta) if d < 0]
    if negative:
        return Estimate(EstimateKind.THETA_N, 1, f"negative expected effect on {negative[0]}")
    unbounded_on = [
        c for c, d in zip(y.model.counters, delta)
        if d == 0 and classify_counter_behavior(y, c).verdict == Behavior.ZERO_UNBOUNDED
    ]
    if unbounded_on:
        return Estimate(EstimateKind.THETA_N2, 2, f"component zero-unbounded on {unbounded_on[0]}")
    return Estimate(EstimateKind.UNBOUNDED, None, "increasing, zero-bounded elsewhere")


def _worst(estimates):
    return max(estimates, key=lambda est: CHAIN_ORDER[est.kind])


def classify_markov_chain(m):
    """Three-way classification per MEC; transient transitions are asymptotically constant."""
    nondeterministic = [
        s.name for s in m.states if not s.is_probabilistic and len(m.outgoing[s.name]) != 1
    ]
    if not effective_markov_chain(m):
        raise PreconditionError(f"genuine nondeterminism at states {nondeterministic}")

    per_counter = {c: [] for c in m.counters}
    per_length = []
    transitions = {}
    witnesses = []
    for mec in mec_decomposition(m).mecs:
        chain = submodel(m, mec.states, mec.transitions)
        extended, step_counter = add_step_counter(chain)
        transition_counters = {}
        for tid in chain.transition_ids:
            extended, name = add_transition_counter(extended, tid)
            transition_counters[tid] = name
        found = enumerate_components(extended)
        if len(found) != 1:
            raise AssertionError(f"chain MEC {list(mec.states)} has {len(found)} components")
        y = found[0]
        delta = effect(y.flow)
        for c in m.counters:
            per_counter[c].append(_chain_counter_verdict(y, c, delta))
        per_length.append(_chain_counter_verdict(y, step_counter, delta))
        for tid, name in transition_counters.items():
            transitions[tid] = _chain_counter_verdict(y, name, delta)
        witnesses.append({
            "mec": list(mec.states),
            "center": y.center,
            "flow": {tid: y.flow[tid] for tid in chain.transition_ids},
            "c_plus": [c for c, d in zip(m.counters, delta) if d > 0],
        })

    for tid in m.transition_ids:
        transitions.setdefault(tid, Estimate(EstimateKind.CONSTANT, None, "transient transition"))
    return McVerdict(
        model_digest=model_digest(m),
        counters={c: _worst(per_counter[c]) for c in m.counters},
        transitions={tid: transitions[tid] for tid in m.transition_ids},
        length=_worst(per_length),
        witnesses=witnesses,
    )
