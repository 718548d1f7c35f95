import json
import os
import pathlib
import random

import jsonschema
import pytest

import guiagent

DATA = pathlib.Path(os.environ.get("GUIAGENT_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))
DOCS = pathlib.Path(os.environ.get("GUIAGENT_DOCS_DIR", DATA.parent / "docs"))
SUITE = json.loads((DATA / "suites" / "sample.json").read_text())


@pytest.fixture
def sim():
    return guiagent.Simulator(DATA / "apps")


def test_bundled_apps(sim):
    assert sorted(sim.app_ids()) == ["Noice", "Simple Contacts Pro", "World Weather"]


def test_state_description_and_prompt(sim):
    sim.perform({"kind": "start_app", "app_id": "World Weather"})
    state = sim.state()
    sd = guiagent.describe_state(state)
    assert sd["text"].startswith(
        "The current state has the following UI views and corresponding actions, with action id in parentheses"
    )
    assert [b["action_id"] for b in sd["bindings"]] == list(range(len(sd["bindings"])))
    prompt = guiagent.choice_prompt("Check London", state, ["start the app World Weather"])
    assert prompt.startswith("Task: Check London\n\n")
    assert "Previous actions:\nstart the app World Weather\n" in prompt


def test_edit_prompt_ending(sim):
    sim.open_screen("World Weather", "add_city")
    p = guiagent.edit_prompt("Add Beijing", sim.state(), "city_field")
    assert p.endswith("What should I enter to the view with the text 'city, country'? Just return the text and nothing else.")
    with pytest.raises(KeyError):
        guiagent.edit_prompt("x", sim.state(), "nope")


def test_parsers():
    assert guiagent.parse_choice("I pick 3.", 5) == 3
    assert guiagent.parse_choice("-1", 5) == -1
    with pytest.raises(guiagent.ParseError):
        guiagent.parse_choice("7", 5)
    assert guiagent.parse_edit_text('Text: "Beijing China"') == "Beijing China"
    with pytest.raises(guiagent.ParseError):
        guiagent.parse_edit_text('  ""  ')


def test_progress_matches_python_prefix():
    rng = random.Random(3)
    for _ in range(500):
        ref = [rng.choice("abcde") for _ in range(rng.randint(1, 13))]
        pred = [rng.choice("abcde") for _ in range(rng.randint(0, 13))]
        lcp = 0
        while lcp < min(len(ref), len(pred)) and ref[lcp] == pred[lcp]:
            lcp += 1
        assert guiagent.completion_progress(ref, pred) == (lcp, len(ref))
    assert guiagent.action_equal("Click view 'Extras'", "click  view 'Extras'")
    assert guiagent.complexity_bucket(7) == "6~13 steps"


def test_device_errors(sim):
    with pytest.raises(guiagent.DeviceError):
        sim.state()
    with pytest.raises(guiagent.DeviceError):
        sim.perform({"kind": "start_app", "app_id": "Nope"})


def test_run_task_follows_reference(sim):
    rules = guiagent.faithful_oracle_rules(SUITE)
    task = SUITE["tasks"][1]
    trace = sim.run_task(task["description"], task["app_id"], rules)
    assert trace["header"]["termination"] == "ModelDeclaredComplete"
    assert [s["action"] for s in trace["steps"]] == task["reference_actions"]


def test_suite_report_matches_golden_and_schema(sim):
    rules = json.loads((DATA / "oracles" / "divergent.json").read_text())
    out = sim.run_suite(SUITE, rules, jobs=2)
    assert out["report"] == json.loads((DATA / "golden" / "divergent_report.json").read_text())
    assert out["text"] == (DATA / "golden" / "divergent_report.txt").read_text()
    assert len(out["traces"]) == len(SUITE["tasks"])
    schema = json.loads((DOCS / "report.schema.json").read_text())
    jsonschema.validate(out["report"], schema)


def test_bad_config_is_rejected(sim):
    with pytest.raises(ValueError):
        sim.run_task("t", "Noice", [], {"max_steps": 0})
