import json
import os
import unittest

from src import __version__
from src.classifier import classify_markov_chain, full_classification
from src.components import conical_decomposition, make_multicomponent
from src.graph import mec_decomposition
from src.model import load_model, parse_observable
from src.reporting import (
    decomposition_to_dict,
    estimate_to_dict,
    mec_to_dict,
    model_check_to_dict,
    render_json,
    render_text,
    report_to_dict,
    validation_to_dict,
)
from src.simulator import ItemValidation


MODELS_DIR = os.path.join(os.path.dirname(__file__), "..", "models")


def _load(name):
    return load_model(os.path.join(MODELS_DIR, name))


class ReportDictTests(unittest.TestCase):
    def test_mdp_report(self):
        report = full_classification(_load("rw1.vass"))
        data = report_to_dict(report)
        self.assertEqual(data["tool"], "vassclass")
        self.assertEqual(data["version"], __version__)
        self.assertEqual(data["kind"], "mdp")
        self.assertEqual(data["model_sha256"], report.model_digest)
        self.assertEqual(data["length"]["verdict"], "tight-poly")
        self.assertEqual(data["length"]["degree"], 2)
        self.assertEqual(data["counters"]["c"]["estimate"], "Θ(n)")
        self.assertEqual(data["exit_status"], 0)
        self.assertEqual(data["zb_mode"], "literal")
        self.assertIn("lp_solves", data["solver"])

    def test_markov_chain_report(self):
        data = report_to_dict(classify_markov_chain(_load("rw1.vass")))
        self.assertEqual(data["kind"], "markov-chain")
        self.assertEqual(data["witnesses"][0]["flow"], {"t_plus": "1/2", "t_minus": "1/2"})
        self.assertNotIn("trace", data)

    def test_json_is_canonical(self):
        report = full_classification(_load("countdown.vass"))
        text = render_json(report)
        self.assertTrue(text.endswith("}\n"))
        self.assertEqual(text, render_json(json.loads(text)))
        self.assertEqual(json.loads(text)["counters"]["c"]["degree"], 1)

    def test_decomposition(self):
        m = _load("expo1.vass")
        x = make_multicomponent(m, (2, 1, 1, 1))
        data = decomposition_to_dict(x, conical_decomposition(x))
        self.assertEqual(data["x"], {"t1": "2", "t2": "1", "t3": "1", "t4": "1"})
        self.assertEqual([term["coefficient"] for term in data["terms"]], ["2", "1", "1"])
        self.assertEqual(data["terms"][2]["selection"], {"p": "t2", "q": "t4"})

    def test_mec(self):
        m = _load("disconnected.vass")
        data = mec_to_dict(m, mec_decomposition(m))
        self.assertEqual([mec["states"] for mec in data["mecs"]], [["a"], ["b"]])
        self.assertEqual(data["transient_states"], ["s"])


class RenderTextTests(unittest.TestCase):
    def test_mdp_table_and_trace(self):
        text = render_text(full_classification(_load("twocycle.vass")))
        self.assertIn("counter:c", text)
        self.assertIn("Θ(n)", text)
        self.assertIn("unresolved", text)
        self.assertIn("k=2:", text)
        self.assertIn("exponential phase on layer 3: scheme=False (literal)", text)
        self.assertIn("note: degree 2", text)

    def test_markov_chain(self):
        text = render_text(classify_markov_chain(_load("disconnected.vass")))
        self.assertIn("asymptotically constant", text)
        self.assertIn("component on ['b'] centered at b", text)

    def test_observable(self):
        m = _load("rw1.vass")
        report = full_classification(m)
        data = estimate_to_dict(parse_observable("length", m), report.length)
        self.assertTrue(render_text(data).startswith("length: Θ(n^2)"))

    def test_validation(self):
        results = [
            ItemValidation("length", "Θ(n)", "pass", 1.02, "uniform", "|1.020 - 1| <= 0.35"),
            ItemValidation("transition:t", "unresolved", "inconclusive", detail="not simulated"),
        ]
        text = render_text(validation_to_dict(results))
        self.assertIn("1.020", text)
        self.assertIn("not simulated", text)

    def test_model_check(self):
        result = {
            "violations": [{"code": "probability_sum", "message": "probabilities sum to 2/3", "line": 4}],
            "summary": "1 violation(s)",
        }
        text = render_text(model_check_to_dict(result, "bad.vass"))
        self.assertIn("bad.vass: 1 violation(s)", text)
        self.assertIn("line 4: probabilities sum to 2/3 [probability_sum]", text)

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            render_text({"kind": "spreadsheet"})


if __name__ == "__main__":
    unittest.main()
