import itertools
import os
import unittest

import numpy as np

from src.generators import random_model
from src.graph import (
    end_component_violations,
    is_end_component,
    mec_decomposition,
    simple_cycles,
    strongly_connected_components,
)
from src.model import load_model, parse_model


MODELS_DIR = os.path.join(os.path.dirname(__file__), "..", "models")

# p can leave to the sink region {r}; q is probabilistic and leaks to r.
LEAKY = """counters: c
state p n
state q p
state r n
trans a p q : 0
trans b q p : 1 @ 1/2
trans c q r : 0 @ 1/2
trans d r r : -1
trans e p p : 1
"""


def _load(name):
    return load_model(os.path.join(MODELS_DIR, name))


def _end_components(m):
    """Every end component, by brute force over transition subsets."""
    found = []
    for size in range(1, len(m.transitions) + 1):
        for subset in itertools.combinations(m.transition_ids, size):
            states = frozenset(m.transition(tid).source for tid in subset)
            if is_end_component(m, states, subset):
                found.append((states, frozenset(subset)))
    return found


class SccTests(unittest.TestCase):
    def test_components_follow_node_order(self):
        edges = {1: [2], 2: [1, 3], 3: [4], 4: [3], 5: []}
        components = strongly_connected_components([1, 2, 3, 4, 5], edges.__getitem__)
        self.assertEqual(components, [[1, 2], [3, 4], [5]])

    def test_ignores_edges_leaving_node_set(self):
        edges = {"a": ["b", "z"], "b": ["a"]}
        self.assertEqual(strongly_connected_components(["a", "b"], edges.__getitem__), [["a", "b"]])

    def test_long_chain_does_not_recurse(self):
        n = 5000
        edges = {i: [i + 1] for i in range(n)}
        edges[n] = [0]
        components = strongly_connected_components(range(n + 1), edges.__getitem__)
        self.assertEqual(len(components), 1)


class MecTests(unittest.TestCase):
    def test_strongly_connected_model_is_one_mec(self):
        expo1 = _load("expo1.vass")
        decomposition = mec_decomposition(expo1)
        self.assertEqual(len(decomposition.mecs), 1)
        self.assertEqual(decomposition.mecs[0].transitions, ("t1", "t2", "t3", "t4"))

    def test_probabilistic_leak_breaks_the_cycle(self):
        m = parse_model(LEAKY)
        decomposition = mec_decomposition(m)
        self.assertEqual([mec.states for mec in decomposition.mecs], [("p",), ("r",)])
        self.assertEqual(decomposition.mecs[0].transitions, ("e",))
        self.assertIsNone(decomposition.mec_of("q"))
        self.assertEqual(decomposition.mec_of_transition("d"), 1)

    def test_disconnected_fixture(self):
        m = _load("disconnected.vass")
        decomposition = mec_decomposition(m)
        self.assertEqual([mec.states for mec in decomposition.mecs], [("a",), ("b",)])
        self.assertIsNone(decomposition.membership["s"])

    def test_restricted_transition_set(self):
        expo1 = _load("expo1.vass")
        decomposition = mec_decomposition(expo1, transitions=["t1", "t3"])
        self.assertEqual([mec.transitions for mec in decomposition.mecs], [("t1",), ("t3",)])

    def test_every_mec_is_an_end_component(self):
        for name in ("rw1.vass", "expo1.vass", "disconnected.vass", "twocycle.vass"):
            m = _load(name)
            for mec in mec_decomposition(m).mecs:
                with self.subTest(model=name, mec=mec.states):
                    self.assertTrue(is_end_component(m, mec.states, mec.transitions))


class EndComponentTests(unittest.TestCase):
    def test_violation_codes(self):
        m = parse_model(LEAKY)
        self.assertEqual(end_component_violations(m, [], []), ["empty"])
        self.assertIn("prob_partial", end_component_violations(m, ["p", "q"], ["a", "b"]))
        self.assertIn("nondet_no_exit", end_component_violations(m, ["r"], []))
        self.assertIn("not_closed", end_component_violations(m, ["p"], ["a", "e"]))
        self.assertIn("not_strongly_connected", end_component_violations(m, ["p", "r"], ["e", "d"]))
        self.assertTrue(is_end_component(m, ["r"], ["d"]))


class EndComponentAlgebraTests(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        rng = np.random.default_rng(17)
        cls.cases = []
        for _ in range(40):
            m = random_model(rng, max_counters=1, max_states=6, max_transitions=8, strongly_connected=False)
            cls.cases.append((m, _end_components(m)))

    def test_overlapping_union_in_expo1(self):
        m = _load("expo1.vass")
        self.assertTrue(is_end_component(m, ["p"], ["t1"]))
        self.assertTrue(is_end_component(m, ["p", "q"], ["t2", "t4"]))
        self.assertTrue(is_end_component(m, ["p", "q"], ["t1", "t2", "t4"]))

    def test_union_of_overlapping_end_components(self):
        for case, (m, ecs) in enumerate(self.cases):
            for (s1, l1), (s2, l2) in itertools.combinations(ecs, 2):
                if not s1 & s2:
                    continue
                with self.subTest(case=case, first=sorted(l1), second=sorted(l2)):
                    self.assertTrue(is_end_component(m, s1 | s2, l1 | l2))

    def test_mecs_are_maximal(self):
        for case, (m, ecs) in enumerate(self.cases):
            mecs = [(frozenset(mec.states), frozenset(mec.transitions)) for mec in mec_decomposition(m).mecs]
            with self.subTest(case=case):
                for states, transitions in mecs:
                    self.assertIn((states, transitions), ecs)
                    for other_states, other_transitions in ecs:
                        if states <= other_states and transitions <= other_transitions:
                            self.assertEqual((states, transitions), (other_states, other_transitions))
                for states, transitions in ecs:
                    self.assertTrue(any(states <= s and transitions <= l for s, l in mecs))


class SimpleCycleTests(unittest.TestCase):
    def test_expo1_cycles(self):
        cycles = simple_cycles(_load("expo1.vass"))
        self.assertEqual(sorted(map(tuple, cycles)), [("t1",), ("t2", "t4"), ("t3",)])

    def test_restricted_cycles(self):
        cycles = simple_cycles(_load("expo1.vass"), transitions=["t2", "t4"])
        self.assertEqual(cycles, [["t2", "t4"]])


if __name__ == "__main__":
    unittest.main()
