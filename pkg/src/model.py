"""
VASS MDP domain types, the ``.vass`` text format and structural transformations.

Models are immutable. Every transformation returns a new model whose
declaration order follows the source model, so indices stay deterministic.
"""

import hashlib
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property

from src.errors import ModelError


logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"

NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.'\[\]-]*$")
COUNTERS_RE = re.compile(r"^counters\s*:(.*)$")
STATE_RE = re.compile(r"^state\s+(\S+)\s+(\S+)$")
TRANS_RE = re.compile(r"^trans\s+(\S+)\s+(\S+)\s+(\S+)\s*:([^@]*?)(?:@\s*(\S+))?$")
NUMBER_RE = re.compile(r"^[+-]?\d+(?:/\d+)?$")
PROBABILITY_RE = re.compile(r"^\d+(?:/\d+)?$")


class StateKind(str, Enum):
    NONDETERMINISTIC = "n"
    PROBABILISTIC = "p"


@dataclass(frozen=True)
class State:
    name: str
    kind: StateKind

    @property
    def is_probabilistic(self):
        return self.kind == StateKind.PROBABILISTIC


@dataclass(frozen=True)
class Transition:
    id: str
    source: str
    target: str
    update: tuple
    probability: Fraction = None


@dataclass(frozen=True)
class Configuration:
    state: str
    values: tuple

    @property
    def is_terminal(self):
        return any(value < 0 for value in self.values)


class ObservableKind(str, Enum):
    LENGTH = "length"
    COUNTER = "counter"
    TRANSITION = "transition"


@dataclass(frozen=True)
class Observable:
    kind: ObservableKind
    name: str = None

    @property
    def label(self):
        if self.kind == ObservableKind.LENGTH:
            return "length"
        return f"{self.kind.value}:{self.name}"


LENGTH = Observable(ObservableKind.LENGTH)


@dataclass(frozen=True)
class VassMdp:
    counters: tuple
    states: tuple
    transitions: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "counters", tuple(self.counters))
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        _check_structure(self)

    @cached_property
    def counter_index(self):
        return {name: i for i, name in enumerate(self.counters)}

    @cached_property
    def state_index(self):
        return {state.name: i for i, state in enumerate(self.states)}

    @cached_property
    def transition_index(self):
        return {t.id: i for i, t in enumerate(self.transitions)}

    @cached_property
    def state_names(self):
        return tuple(state.name for state in self.states)

    @cached_property
    def transition_ids(self):
        return tuple(t.id for t in self.transitions)

    @cached_property
    def outgoing(self):
        table = {state.name: [] for state in self.states}
        for t in self.transitions:
            table[t.source].append(t)
        return {name: tuple(items) for name, items in table.items()}

    @cached_property
    def incoming(self):
        table = {state.name: [] for state in self.states}
        for t in self.transitions:
            table[t.target].append(t)
        return {name: tuple(items) for name, items in table.items()}

    @property
    def dimension(self):
        return len(self.counters)

    @cached_property
    def dangling_states(self):
        """States left without an outgoing transition, typically by a restriction."""
        return tuple(name for name in self.state_names if not self.outgoing[name])

    def state(self, name):
        return self.states[self.state_index[name]]

    def transition(self, tid):
        try:
            return self.transitions[self.transition_index[tid]]
        except KeyError:
            raise ModelError(f"unknown transition {tid!r}") from None

    def is_probabilistic(self, name):
        return self.state(name).is_probabilistic

    def is_nondeterministic(self, name):
        return not self.state(name).is_probabilistic


def _check_structure(m):
    seen = set()
    for name in m.counters:
        if name in seen:
            raise ModelError(f"duplicate counter {name!r}")
        seen.add(name)
    seen = set()
    for state in m.states:
        if state.name in seen:
            raise ModelError(f"duplicate state {state.name!r}")
        seen.add(state.name)
    states = seen
    seen = set()
    for t in m.transitions:
        if t.id in seen:
            raise ModelError(f"duplicate transition {t.id!r}")
        seen.add(t.id)
        if t.source not in states or t.target not in states:
            missing = t.source if t.source not in states else t.target
            raise ModelError(f"transition {t.id!r} references unknown state {missing!r}")
        if len(t.update) != len(m.counters):
            raise ModelError(
                f"transition {t.id!r} has {len(t.update)} update entries, expected {len(m.counters)}"
            )


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

def _parse_number(token, line_no):
    if not NUMBER_RE.match(token):
        raise ModelError(f"invalid number {token!r}", line=line_no)
    value = Fraction(token)
    return int(value) if value.denominator == 1 else value


def _parse_probability(token, line_no):
    if not PROBABILITY_RE.match(token):
        raise ModelError(f"invalid probability {token!r}", line=line_no)
    try:
        return Fraction(token)
    except ZeroDivisionError:
        raise ModelError(f"invalid probability {token!r}", line=line_no) from None


def _check_name(name, line_no):
    if not NAME_RE.match(name):
        raise ModelError(f"invalid identifier {name!r}", line=line_no)


def parse_model(text):
    """Parse a ``.vass`` document into a validated ``VassMdp``."""
    counters = None
    states = []
    state_kinds = {}
    transitions = []
    lines = {}

    for line_no, raw in enumerate((text or "").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        counters_match = COUNTERS_RE.match(line)
        if counters_match:
            if counters is not None:
                raise ModelError("counters declared twice", line=line_no)
            if states or transitions:
                raise ModelError("counters must be declared first", line=line_no)
            counters = counters_match.group(1).split()
            for name in counters:
                _check_name(name, line_no)
            if len(set(counters)) != len(counters):
                raise ModelError("duplicate counter name", line=line_no)
            continue

        state_match = STATE_RE.match(line)
        if state_match:
            name, kind = state_match.groups()
            _check_name(name, line_no)
            if kind not in ("n", "p"):
                raise ModelError(f"state kind must be n or p, got {kind!r}", line=line_no)
            if name in state_kinds:
                raise ModelError(f"duplicate state {name!r}", line=line_no)
            state_kinds[name] = StateKind(kind)
            states.append(State(name, StateKind(kind)))
            lines[("state", name)] = line_no
            continue

        trans_match = TRANS_RE.match(line)
        if trans_match:
            if counters is None:
                raise ModelError("transition before counters declaration", line=line_no)
            tid, source, target, update_text, probability = trans_match.groups()
            _check_name(tid, line_no)
            if ("trans", tid) in lines:
                raise ModelError(f"duplicate transition {tid!r}", line=line_no)
            for name in (source, target):
                if name not in state_kinds:
                    raise ModelError(f"unknown state {name!r}", line=line_no)
            update = tuple(_parse_number(token, line_no) for token in update_text.split())
            if len(update) != len(counters):
                raise ModelError(
                    f"expected {len(counters)} update entries, got {len(update)}",
                    line=line_no,
                )
            if state_kinds[source] == StateKind.PROBABILISTIC:
                if probability is None:
                    raise ModelError(
                        f"transition {tid!r} leaves probabilistic state {source!r} without a probability",
                        line=line_no,
                    )
                probability = _parse_probability(probability, line_no)
            elif probability is not None:
                raise ModelError(
                    f"transition {tid!r} leaves nondeterministic state {source!r} but has a probability",
                    line=line_no,
                )
            transitions.append(Transition(tid, source, target, update, probability))
            lines[("trans", tid)] = line_no
            continue

        raise ModelError(f"syntax error: {line!r}", line=line_no)

    if counters is None:
        raise ModelError("missing counters declaration")
    if not states:
        raise ModelError("model declares no states")

    model = VassMdp(tuple(counters), tuple(states), tuple(transitions))
    violations = _semantic_violations(model, lines)
    if violations:
        first = violations[0]
        raise ModelError(first["message"], line=first["line"], violations=violations)
    return model


def load_model(path):
    with open(path, "r", encoding="utf-8") as handle:
        return parse_model(handle.read())


def format_number(value):
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_probability(value):
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def serialize_model(m):
    """Canonical text form; ``parse_model(serialize_model(m)) == m``."""
    out = ["counters: " + " ".join(m.counters) if m.counters else "counters:"]
    for state in m.states:
        out.append(f"state {state.name} {state.kind.value}")
    for t in m.transitions:
        update = " ".join(format_number(value) for value in t.update)
        line = f"trans {t.id} {t.source} {t.target} :"
        if update:
            line += f" {update}"
        if t.probability is not None:
            line += f" @ {format_probability(t.probability)}"
        out.append(line)
    return "\n".join(out) + "\n"


def model_digest(m):
    return hashlib.sha256(serialize_model(m).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _violation(violations, code, message, line=None):
    violations.append({"code": code, "message": message, "line": line})


def _semantic_violations(m, lines=None, allow_dangling=False):
    lines = lines or {}
    violations = []
    for state in m.states:
        outgoing = m.outgoing[state.name]
        line = lines.get(("state", state.name))
        if not outgoing:
            if not allow_dangling:
                _violation(
                    violations,
                    "no_outgoing",
                    f"state {state.name!r} has no outgoing transition",
                    line,
                )
            continue
        if state.is_probabilistic:
            total = Fraction(0)
            for t in outgoing:
                if t.probability is None:
                    _violation(
                        violations,
                        "probability_missing",
                        f"transition {t.id!r} has no probability",
                        lines.get(("trans", t.id)),
                    )
                    continue
                if t.probability <= 0:
                    _violation(
                        violations,
                        "probability_nonpositive",
                        f"transition {t.id!r} has nonpositive probability {format_probability(t.probability)}",
                        lines.get(("trans", t.id)),
                    )
                total += t.probability
            if total != 1:
                _violation(
                    violations,
                    "probability_sum",
                    f"probabilities sum to {format_number(total)} at state {state.name!r}",
                    lines.get(("trans", outgoing[-1].id), line),
                )
        else:
            for t in outgoing:
                if t.probability is not None:
                    _violation(
                        violations,
                        "probability_unexpected",
                        f"transition {t.id!r} leaves a nondeterministic state but has a probability",
                        lines.get(("trans", t.id)),
                    )
    return violations


def validate_model(m, allow_dangling=False):
    """Non-raising invariant check; returns every violation found."""
    violations = _semantic_violations(m, allow_dangling=allow_dangling)
    if violations:
        summary = f"{len(violations)} violation(s)"
    else:
        summary = (
            f"valid: {len(m.counters)} counter(s), {len(m.states)} state(s), "
            f"{len(m.transitions)} transition(s)"
        )
    return {"violations": violations, "summary": summary}


def _reachable(m, start, reverse=False, transitions=None):
    allowed = None if transitions is None else set(transitions)
    edges = m.incoming if reverse else m.outgoing
    seen = {start}
    stack = [start]
    while stack:
        current = stack.pop()
        for t in edges[current]:
            if allowed is not None and t.id not in allowed:
                continue
            nxt = t.source if reverse else t.target
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def validate_strongly_connected(m):
    """True iff every state reaches every other state."""
    if not m.states:
        return False
    start = m.states[0].name
    everything = set(m.state_names)
    return _reachable(m, start) == everything and _reachable(m, start, reverse=True) == everything


def effective_markov_chain(m):
    return all(len(m.outgoing[s.name]) == 1 for s in m.states if not s.is_probabilistic)


# ---------------------------------------------------------------------------
# Transformations
# ---------------------------------------------------------------------------

def restrict_transitions(m, keep):
    """
    Keep only the transitions in ``keep``.

    Probabilistic states are all-or-nothing: keeping a proper, nonempty subset
    of their outgoing transitions is rejected. States that lose every outgoing
    transition stay in the model and are listed in ``dangling_states``.
    """
    keep = set(keep)
    unknown = keep - set(m.transition_ids)
    if unknown:
        raise ModelError(f"unknown transitions {sorted(unknown)}")
    for state in m.states:
        if not state.is_probabilistic:
            continue
        outgoing = {t.id for t in m.outgoing[state.name]}
        kept = outgoing & keep
        if kept and kept != outgoing:
            raise ModelError(
                f"restriction keeps {len(kept)} of {len(outgoing)} transitions "
                f"of probabilistic state {state.name!r}"
            )
    restricted = VassMdp(
        m.counters,
        m.states,
        tuple(t for t in m.transitions if t.id in keep),
    )
    if restricted.dangling_states:
        logger.debug("restriction leaves dangling states %s", list(restricted.dangling_states))
    return restricted


def submodel(m, states, transitions):
    """The model on ``states`` with the given transitions (all inside ``states``)."""
    restricted = restrict_transitions(m, transitions)
    states = set(states)
    for t in restricted.transitions:
        if t.source not in states or t.target not in states:
            raise ModelError(f"transition {t.id!r} leaves the state set")
    return VassMdp(
        m.counters,
        tuple(s for s in m.states if s.name in states),
        restricted.transitions,
    )


def project_counters(m, keep):
    """Drop every counter not in ``keep``; structure is unchanged."""
    keep = set(keep)
    unknown = keep - set(m.counters)
    if unknown:
        raise ModelError(f"unknown counters {sorted(unknown)}")
    positions = [i for i, name in enumerate(m.counters) if name in keep]
    return VassMdp(
        tuple(m.counters[i] for i in positions),
        m.states,
        tuple(
            Transition(t.id, t.source, t.target, tuple(t.update[i] for i in positions), t.probability)
            for t in m.transitions
        ),
    )


def with_updates(m, updates, counters=None):
    """Same structure with update rows replaced per transition id."""
    counters = tuple(m.counters if counters is None else counters)
    return VassMdp(
        counters,
        m.states,
        tuple(
            Transition(t.id, t.source, t.target, tuple(updates.get(t.id, t.update)), t.probability)
            for t in m.transitions
        ),
    )


def fresh_counter_name(m, base):
    taken = set(m.counters)
    if base not in taken:
        return base
    suffix = 1
    while f"{base}_{suffix}" in taken:
        suffix += 1
    return f"{base}_{suffix}"


def _append_counter(m, name, values):
    return VassMdp(
        m.counters + (name,),
        m.states,
        tuple(
            Transition(t.id, t.source, t.target, t.update + (values(t),), t.probability)
            for t in m.transitions
        ),
    )


def add_step_counter(m):
    """Fresh counter incremented by every transition."""
    name = fresh_counter_name(m, "sc")
    return _append_counter(m, name, lambda t: 1), name


def add_transition_counter(m, tid):
    """Fresh counter incremented only by transition ``tid``."""
    m.transition(tid)
    name = fresh_counter_name(m, f"tc_{tid}")
    return _append_counter(m, name, lambda t: 1 if t.id == tid else 0), name


def parse_observable(text, m=None):
    """``length``, ``counter:<name>`` or ``transition:<id>``."""
    text = (text or "").strip()
    if text == "length":
        observable = LENGTH
    elif text.startswith("counter:"):
        observable = Observable(ObservableKind.COUNTER, text.split(":", 1)[1])
    elif text.startswith("transition:"):
        observable = Observable(ObservableKind.TRANSITION, text.split(":", 1)[1])
    else:
        raise ModelError(f"unknown target {text!r}")
    if m is not None:
        check_observable(m, observable)
    return observable


def check_observable(m, observable):
    if observable.kind == ObservableKind.COUNTER and observable.name not in m.counter_index:
        raise ModelError(f"unknown counter {observable.name!r}")
    if observable.kind == ObservableKind.TRANSITION and observable.name not in m.transition_index:
        raise ModelError(f"unknown transition {observable.name!r}")
    return observable
