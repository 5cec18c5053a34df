import os
import tempfile
import unittest
from unittest import mock

from src import settings
from src.errors import ConfigError


def _clean_env(**extra):
    env = {k: v for k, v in os.environ.items() if not k.startswith("VASSCLASS_")}
    env.update(extra)
    return mock.patch.dict(os.environ, env, clear=True)


class LoadConfigTests(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def _write(self, text):
        path = os.path.join(self.tmp.name, "config.yaml")
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text)
        return path

    def test_partial_file_keeps_defaults(self):
        path = self._write("analysis:\n  max_k: 4\n")
        with _clean_env():
            config = settings.load_config(path)
        self.assertEqual(config["analysis"]["max_k"], 4)
        self.assertEqual(config["analysis"]["zb_mode"], "literal")
        self.assertEqual(config["simulation"]["n_list"], [32, 64, 128, 256, 512, 1024])

    def test_repository_config_matches_defaults(self):
        with _clean_env():
            config = settings.load_config(settings.DEFAULT_CONFIG_PATH)
        self.assertEqual(config, settings.DEFAULTS)

    def test_environment_overrides(self):
        path = self._write("analysis:\n  max_k: 4\n")
        with _clean_env(VASSCLASS_MAX_K="7", VASSCLASS_ZB_MODE="bounded", VASSCLASS_SEED="11"):
            config = settings.load_config(path)
        self.assertEqual(config["analysis"]["max_k"], 7)
        self.assertEqual(config["analysis"]["zb_mode"], "bounded")
        self.assertEqual(config["simulation"]["seed"], 11)

    def test_config_path_from_environment(self):
        path = self._write("output:\n  format: json\n")
        with _clean_env(VASSCLASS_CONFIG=path):
            config = settings.load_config()
        self.assertEqual(config["output"]["format"], "json")

    def test_invalid_values(self):
        cases = {
            "bad mode": "analysis:\n  zb_mode: sometimes\n",
            "zero cap": "analysis:\n  max_k: 0\n",
            "bad p": "simulation:\n  p: 1.0\n",
            "bad format": "output:\n  format: xml\n",
            "not a mapping": "- analysis\n",
            "broken yaml": "analysis: [unclosed\n",
        }
        for name, text in cases.items():
            with self.subTest(case=name):
                path = self._write(text)
                with _clean_env():
                    with self.assertRaises(ConfigError):
                        settings.load_config(path)

    def test_bad_environment_value(self):
        with _clean_env(VASSCLASS_SEED="abc"):
            with self.assertRaises(ConfigError):
                settings.load_config(self._write(""))

    def test_missing_explicit_file(self):
        with _clean_env():
            with self.assertRaises(ConfigError):
                settings.load_config(os.path.join(self.tmp.name, "nope.yaml"))

    def test_get_config_is_cached(self):
        settings.reset_config()
        self.addCleanup(settings.reset_config)
        with _clean_env():
            first = settings.get_config()
            self.assertIs(settings.get_config(), first)
            settings.reset_config()
            self.assertIsNot(settings.get_config(), first)


if __name__ == "__main__":
    unittest.main()
