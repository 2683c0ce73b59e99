"""
Confirming the validity of configuration files in the configs directory
"""

import os
import tempfile
import unittest

from dtlbench.config import Config, load_config


class TestConfigValidity(unittest.TestCase):
    """Tests that all config files in the configs/ directory are valid"""

    def collect_files(self):
        """Collect all configs/*config*.yaml files"""
        config_dir = os.path.join(os.path.dirname(__file__), "../configs")
        config_files = []
        for root, _, files in os.walk(config_dir):
            for file in files:
                if "config" in file and file.endswith(".yaml"):
                    config_files.append(os.path.join(root, file))
        return config_files

    def test_import_config_files(self):
        """Attempt to import all config files"""
        config_files = self.collect_files()
        self.assertGreater(len(config_files), 0)
        for config_file in config_files:
            config = load_config(config_file)
            self.assertIsInstance(
                config, Config, f"Config file {config_file} did not load correctly"
            )
            self.assertIn(config.semantics.tangle_method, ("clusters", "gfp"))
            self.assertGreater(config.sampling.cont_samples, 0)


class TestConfig(unittest.TestCase):
    """Tests for loading and saving configuration"""

    def test_defaults(self):
        """A missing path gives the defaults"""
        config = load_config(None)
        self.assertEqual(config.random_seed, 42)
        self.assertEqual(config.sampling.agreement_trials, 300)
        self.assertEqual(config.oracle.max_points, 12)
        self.assertEqual(config.kernel.taut_max_atoms, 16)

    def test_partial_sections(self):
        """Unset keys keep their defaults"""
        config = Config.from_dict({"random_seed": 3, "sampling": {"cont_samples": 9}})
        self.assertEqual(config.random_seed, 3)
        self.assertEqual(config.sampling.cont_samples, 9)
        self.assertEqual(config.sampling.schema_samples, 20)

    def test_unknown_keys_rejected(self):
        """Misspelled options are errors"""
        with self.assertRaises(TypeError):
            Config.from_dict({"sampling": {"cont_sample": 9}})
        with self.assertRaises(ValueError):
            Config.from_dict({"semantics": {"tangle_method": "magic"}})

    def test_yaml_roundtrip(self):
        """to_yaml then from_yaml preserves every value"""
        config = Config.from_dict({"max_workers": 2, "oracle": {"max_points": 10}})
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "config.yaml")
            config.to_yaml(path)
            loaded = Config.from_yaml(path)
        self.assertEqual(loaded.to_dict(), config.to_dict())


if __name__ == "__main__":
    unittest.main()
