"""Python access to the umm harness. Structured results come back as dicts."""

import json as _json

from . import _core
from ._core import UmmError, cosine, diff_configs, make_edit_score, registered, schema_reference

__all__ = [
    "UmmError",
    "aggregate",
    "analyze",
    "config_fingerprint",
    "cosine",
    "diff_configs",
    "evaluate",
    "extract_choice",
    "leaderboard",
    "load_config",
    "load_config_text",
    "make_edit_score",
    "parse_report",
    "registered",
    "schema_reference",
    "train",
    "validate_request",
]


def validate_request(request: dict) -> dict:
    return _json.loads(_core.validate_request(_json.dumps(request)))


def load_config(path, overrides=()) -> dict:
    return _json.loads(_core.load_config(str(path), list(overrides)))


def load_config_text(yaml: str, overrides=()) -> dict:
    return _json.loads(_core.load_config_text(yaml, list(overrides)))


def config_fingerprint(path, overrides=()) -> str:
    return _core.config_fingerprint(str(path), list(overrides))


def aggregate(rule: str, categories: list, weights: dict | None = None) -> float:
    """categories: [{"category": str, "n": int, "value": float}, ...]"""
    return _core.aggregate(rule, _json.dumps(categories), weights or {})


def extract_choice(response: str, options) -> str | None:
    """options: {"A": "text", ...} or ["text", ...]"""
    return _core.extract_choice(response, _json.dumps(options))


def evaluate(config, overrides=(), run_id: str = "", workers: int = 1) -> dict:
    return _json.loads(_core.evaluate(str(config), list(overrides), run_id, workers))


def train(config, overrides=(), run_id: str = "") -> dict:
    return _json.loads(_core.train(str(config), list(overrides), run_id))


def analyze(config, overrides=(), run_id: str = "") -> dict:
    return _json.loads(_core.analyze(str(config), list(overrides), run_id))


def parse_report(path) -> dict:
    return _json.loads(_core.parse_report(str(path)))


def leaderboard(report_paths, metric: str = "overall", labels=()) -> str:
    return _core.leaderboard([str(p) for p in report_paths], metric, list(labels))
