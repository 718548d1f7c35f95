"""Python bindings for the guiagent task-automation core."""

import json as _json

from . import _core
from ._core import DeviceError, ParseError, action_equal, complexity_bucket, parse_choice, parse_edit_text

__all__ = [
    "DeviceError",
    "ParseError",
    "Simulator",
    "action_equal",
    "choice_prompt",
    "completion_progress",
    "complexity_bucket",
    "describe_state",
    "edit_prompt",
    "faithful_oracle_rules",
    "parse_choice",
    "parse_edit_text",
]


def _load_trace(ndjson):
    lines = [_json.loads(line) for line in ndjson.splitlines() if line]
    return {"header": lines[0], "steps": lines[1:]}


def describe_state(state, max_words=20):
    return _json.loads(_core.describe_state(_json.dumps(state), max_words))


def choice_prompt(task, state, history=()):
    return _core.choice_prompt(task, _json.dumps(state), list(history))


def edit_prompt(task, state, element_key, history=()):
    return _core.edit_prompt(task, _json.dumps(state), element_key, list(history))


def completion_progress(reference, predicted):
    """Returns (matched, total); progress is matched / total."""
    return tuple(_core.completion_progress(list(reference), list(predicted)))


def faithful_oracle_rules(suite):
    return _json.loads(_core.faithful_oracle_rules(_json.dumps(suite)))


class Simulator:
    """A simulated device over app models loaded from a file or directory."""

    def __init__(self, models):
        self._sim = _core.Simulator(str(models))

    def app_ids(self):
        return self._sim.app_ids()

    def state(self):
        return _json.loads(self._sim.state())

    def perform(self, action):
        return _json.loads(self._sim.perform(_json.dumps(action)))

    def open_screen(self, app_id, screen_id):
        self._sim.open_screen(app_id, screen_id)

    def run_task(self, task, app_id, rules, config=None):
        """Runs one task against a scripted oracle in a fresh session."""
        out = self._sim.run_task(task, app_id, _json.dumps(rules), _json.dumps(config or {}))
        return _load_trace(out)

    def run_suite(self, suite, rules, config=None, jobs=1):
        out = _json.loads(self._sim.run_suite(_json.dumps(suite), _json.dumps(rules), _json.dumps(config or {}), jobs))
        out["traces"] = [_load_trace(t) for t in out["traces"]]
        return out
