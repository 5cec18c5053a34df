"""
Graph algorithms over VASS MDPs: strongly connected components, end components
and the maximal end component decomposition.
"""

import logging
from dataclasses import dataclass


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EndComponent:
    states: tuple
    transitions: tuple

    @property
    def state_set(self):
        return frozenset(self.states)

    @property
    def transition_set(self):
        return frozenset(self.transitions)


@dataclass(frozen=True)
class MecDecomposition:
    mecs: tuple
    membership: dict

    def mec_of(self, state):
        index = self.membership.get(state)
        return None if index is None else self.mecs[index]

    def mec_of_transition(self, tid):
        for index, mec in enumerate(self.mecs):
            if tid in mec.transitions:
                return index
        return None


def strongly_connected_components(nodes, successors):
    """
    Nonrecursive Tarjan (Nuutila's variant).

    ``successors`` maps a node to an iterable of neighbours. Components are
    returned as lists ordered like ``nodes``, and the component list is sorted
    by the position of each component's first node.
    """
    nodes = list(nodes)
    order = {node: i for i, node in enumerate(nodes)}
    preorder = {}
    lowlink = {}
    found = set()
    scc_queue = []
    components = []
    counter = 0
    for source in nodes:
        if source in found:
            continue
        queue = [source]
        while queue:
            v = queue[-1]
            if v not in preorder:
                counter += 1
                preorder[v] = counter
            done = True
            neighbours = [w for w in successors(v) if w in order]
            for w in neighbours:
                if w not in preorder:
                    queue.append(w)
                    done = False
                    break
            if not done:
                continue
            lowlink[v] = preorder[v]
            for w in neighbours:
                if w in found:
                    continue
                if preorder[w] > preorder[v]:
                    lowlink[v] = min(lowlink[v], lowlink[w])
                else:
                    lowlink[v] = min(lowlink[v], preorder[w])
            queue.pop()
            if lowlink[v] == preorder[v]:
                found.add(v)
                component = [v]
                while scc_queue and preorder[scc_queue[-1]] > preorder[v]:
                    w = scc_queue.pop()
                    found.add(w)
                    component.append(w)
                components.append(sorted(component, key=order.__getitem__))
            else:
                scc_queue.append(v)
    components.sort(key=lambda component: order[component[0]])
    return components


def _successor_map(m, states, transitions):
    table = {name: [] for name in states}
    for t in m.transitions:
        if t.id in transitions and t.source in table and t.target in table:
            table[t.source].append(t.target)
    return table


def _is_strongly_connected(m, states, transitions):
    if not states:
        return False
    table = _successor_map(m, states, transitions)
    return len(strongly_connected_components(states, table.__getitem__)) == 1


def end_component_violations(m, states, transitions):
    """Names of the end-component conditions that ``(states, transitions)`` fails."""
    states = set(states)
    transitions = set(transitions)
    failed = []
    if not states:
        return ["empty"]
    for name in m.state_names:
        if name not in states:
            continue
        outgoing = {t.id for t in m.outgoing[name]}
        if m.is_probabilistic(name):
            if not outgoing <= transitions:
                failed.append("prob_partial")
                break
        elif not outgoing & transitions:
            failed.append("nondet_no_exit")
            break
    for tid in transitions:
        t = m.transition(tid)
        if t.source not in states or t.target not in states:
            failed.append("not_closed")
            break
    ordered = [name for name in m.state_names if name in states]
    if not _is_strongly_connected(m, ordered, transitions):
        failed.append("not_strongly_connected")
    return failed


def is_end_component(m, states, transitions):
    return not end_component_violations(m, states, transitions)


def mec_decomposition(m, transitions=None):
    """
    Maximal end components by iterated SCC computation and pruning.

    Probabilistic states with an edge leaving their SCC are removed together
    with their transitions, nondeterministic states lose leaving edges, and
    states without remaining outgoing edges are removed, until stable.
    """
    alive_transitions = set(m.transition_ids if transitions is None else transitions)
    alive_states = list(m.state_names)

    while True:
        table = _successor_map(m, alive_states, alive_transitions)
        components = strongly_connected_components(alive_states, table.__getitem__)
        component_of = {}
        for index, component in enumerate(components):
            for name in component:
                component_of[name] = index

        changed = False
        removed_states = set()
        for tid in sorted(alive_transitions, key=m.transition_index.__getitem__):
            t = m.transition(tid)
            if t.source not in component_of or t.target not in component_of:
                alive_transitions.discard(tid)
                changed = True
                continue
            if component_of[t.source] != component_of[t.target]:
                alive_transitions.discard(tid)
                changed = True
                if m.is_probabilistic(t.source):
                    removed_states.add(t.source)
        for name in alive_states:
            if m.is_probabilistic(name):
                outgoing = {t.id for t in m.outgoing[name]}
                if not outgoing or not outgoing <= alive_transitions:
                    removed_states.add(name)
            elif not any(t.id in alive_transitions for t in m.outgoing[name]):
                removed_states.add(name)
        if removed_states:
            changed = True
            alive_states = [name for name in alive_states if name not in removed_states]
            alive_transitions = {
                tid
                for tid in alive_transitions
                if m.transition(tid).source not in removed_states
                and m.transition(tid).target not in removed_states
            }
        if not changed:
            break

    table = _successor_map(m, alive_states, alive_transitions)
    components = strongly_connected_components(alive_states, table.__getitem__)
    mecs = []
    membership = {name: None for name in m.state_names}
    for component in components:
        members = set(component)
        inside = tuple(
            tid for tid in m.transition_ids
            if tid in alive_transitions
            and m.transition(tid).source in members
            and m.transition(tid).target in members
        )
        if not inside:
            continue
        for name in component:
            membership[name] = len(mecs)
        mecs.append(EndComponent(tuple(component), inside))
    logger.debug("MEC decomposition: %d MEC(s)", len(mecs))
    return MecDecomposition(tuple(mecs), membership)


def simple_cycles(m, transitions=None):
    """
    Every simple cycle as a list of transition ids (brute force, small models).

    Each cycle is reported once, rooted at its lowest-index state.
    """
    allowed = set(m.transition_ids if transitions is None else transitions)
    index = m.state_index
    cycles = []
    for root in m.state_names:
        root_index = index[root]
        stack = [(root, [], {root})]
        while stack:
            current, path, visited = stack.pop()
            for t in reversed(m.outgoing[current]):
                if t.id not in allowed:
                    continue
                if t.target == root:
                    cycles.append(path + [t.id])
                elif index[t.target] > root_index and t.target not in visited:
                    stack.append((t.target, path + [t.id], visited | {t.target}))
    return cycles
