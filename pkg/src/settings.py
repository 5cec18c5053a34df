"""
Configuration loading for vassclass.

Defaults live in ``config.yaml`` at the repository root. A ``.env`` file is
honoured through python-dotenv, so ``VASSCLASS_CONFIG`` and the override
variables below can be set there as well.
"""

import copy
import logging
import os

import yaml
from dotenv import load_dotenv

from src.errors import ConfigError


logger = logging.getLogger(__name__)

ROOT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DEFAULT_CONFIG_PATH = os.path.join(ROOT_DIR, "config.yaml")
CONFIG_ENV = "VASSCLASS_CONFIG"

DEFAULTS = {
    "analysis": {
        "max_k": 16,
        "zb_mode": "literal",
        "selection_cap": 1_000_000,
    },
    "simulation": {
        "p": 0.9,
        "n_list": [32, 64, 128, 256, 512, 1024],
        "trials": 500,
        "max_steps": 5_000_000,
        "seed": 0,
        "max_strategies": 16,
        "workers": 1,
    },
    "output": {
        "folder": "output",
        "format": "text",
    },
    "logging": {
        "level": "WARNING",
    },
}

# env var -> (section, key, parser)
ENV_OVERRIDES = {
    "VASSCLASS_MAX_K": ("analysis", "max_k", int),
    "VASSCLASS_ZB_MODE": ("analysis", "zb_mode", str),
    "VASSCLASS_SEED": ("simulation", "seed", int),
}

_cached = None


def _deep_merge(base, extra):
    merged = copy.deepcopy(base)
    for key, value in (extra or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _check(config):
    analysis = config["analysis"]
    if analysis["zb_mode"] not in ("literal", "bounded"):
        raise ConfigError(f"analysis.zb_mode must be literal or bounded, got {analysis['zb_mode']!r}")
    if int(analysis["max_k"]) < 1:
        raise ConfigError("analysis.max_k must be at least 1")
    simulation = config["simulation"]
    if not 0 < float(simulation["p"]) < 1:
        raise ConfigError("simulation.p must lie strictly between 0 and 1")
    if int(simulation["workers"]) < 1:
        raise ConfigError("simulation.workers must be at least 1")
    if config["output"]["format"] not in ("text", "json"):
        raise ConfigError(f"output.format must be text or json, got {config['output']['format']!r}")


def load_config(path=None):
    """Load configuration from config.yaml merged onto the built-in defaults."""
    load_dotenv()
    explicit = path or os.getenv(CONFIG_ENV)
    config_path = explicit or DEFAULT_CONFIG_PATH

    data = {}
    if os.path.exists(config_path):
        try:
            with open(config_path, "r", encoding="utf-8") as handle:
                data = yaml.safe_load(handle) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{config_path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{config_path}: top level must be a mapping")
    elif explicit:
        raise ConfigError(f"config file not found: {config_path}")
    else:
        logger.debug("no config.yaml found, using built-in defaults")

    config = _deep_merge(DEFAULTS, data)
    for name, (section, key, parse) in ENV_OVERRIDES.items():
        raw = os.getenv(name)
        if raw is None or raw == "":
            continue
        try:
            config[section][key] = parse(raw)
        except ValueError as exc:
            raise ConfigError(f"{name}={raw!r}: {exc}") from exc

    _check(config)
    return config


def get_config():
    global _cached
    if _cached is None:
        _cached = load_config()
    return _cached


def reset_config():
    global _cached
    _cached = None
