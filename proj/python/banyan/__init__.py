"""Python front end for the Banyan / ICC simulator."""

import json
import os

from ._banyan import ScenarioError, config_info, replay

__all__ = ["ScenarioError", "config_info", "replay", "run", "sweep"]


def _text(scenario):
    if isinstance(scenario, dict):
        return json.dumps(scenario)
    with open(os.fspath(scenario), encoding="utf-8") as f:
        return f.read()


def run(scenario, seed=None, mode=None, out=None):
    """Run one seed; `scenario` is a path or an already-parsed dict."""
    from ._banyan import run_text

    return run_text(_text(scenario), seed, mode, None if out is None else os.fspath(out))


def sweep(scenario, seeds=None, parallel=1, compare=False, mode=None):
    """Sweep a seed range ("A..B"); returns the summary plus per-run digests."""
    from ._banyan import sweep_text

    return sweep_text(_text(scenario), seeds, parallel, compare, mode)
