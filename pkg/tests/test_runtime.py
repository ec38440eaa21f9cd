from __future__ import annotations

import numpy as np
import pytest
from demohelp import DEMOS, abstraction_artifact, demo_cases, record_case, replay_matches
from simhelp import uvvis_scan

from aurakit.cli import read_feed
from aurakit.dsl import check_program, format_program, parse_program
from aurakit.dsl.ast import Literal, Name, SetValue, WaitUntil
from aurakit.registry import make_resolver
from aurakit.runtime import (DemonstrationTrace, ExecutionLimits, ExecutionTrace, FeedError, MixedModels,
                             Unalignable, abstract_traces, execute_skill, record_session, run_skill, trace_digest)
from aurakit.sim import Click, SelectOption, TypeText, create_sim, load_descriptor
from aurakit.skill.model import ParamSpec, SkillArtifact, SkillManifest, bind_parameters
from aurakit.skills import builtin_skill, builtin_skills


def bound(src, model="uvvis", params=(), args=None, name="t"):
    art = SkillArtifact(SkillManifest(name, "1.0.0", "type1", parameters=tuple(params), environment=model),
                        parse_program(src))
    return bind_parameters(art, args or {})


def run(src, model="uvvis", seed=0, **kw):
    return execute_skill(bound(src, model), create_sim(model, seed), **kw)


# -- executor --------------------------------------------------------------------

def test_empty_program():
    tr = run("")
    assert tr.ok and tr.events == () and tr.total_time == 0


def test_wait_timeout_poll_count():
    tr = run('wait_until widget(status) == "never" timeout 1000 poll 100\n')
    assert tr.status == "error" and tr.error["cause"] == "Timeout" and tr.error["step"] == "0"
    assert len(tr.events) == 10
    assert [e.detail["poll"] for e in tr.events] == list(range(1, 11))
    tr = run('wait_until widget(status) == "never" timeout 1000 poll 300\n')
    assert len(tr.events) == 4      # ceil(1000 / 300)
    assert tr.total_time == 1000


def test_assertion_failure_message():
    tr = run("click tab_settings\nassert widget(lamp) == true\nclick tab_acquire\n")
    assert tr.error["cause"] == "AssertionFailed" and tr.error["step"] == "1"
    assert "widget(lamp) == true" in tr.error["message"]
    assert [e.step for e in tr.events] == ["0", "1"]


def test_sim_error_is_embedded():
    tr = run('click tab_settings\nset wavelength_start = 5\n')
    assert tr.error["cause"] == "SimError" and tr.error["message"].startswith("ValueOutOfRange")
    assert len(tr.events) == 1


def test_eval_error_for_unknown_widget():
    tr = run("if widget(nope) == 1 {\n  click tab_settings\n}\n")
    assert tr.error["cause"] == "EvalError"


def test_branch_repeat_and_read():
    src = ("click tab_settings\nread lamp into was\nif was {\n  click tab_acquire\n} else {\n  set lamp = true\n}\n"
           "repeat until widget(lamp) max 3 {\n  set lamp = true\n}\n")
    tr = run(src)
    assert tr.ok, tr.error
    kinds = [(e.step, e.kind) for e in tr.events]
    assert ("1", "read") in kinds and ("2.else.0", "set") in kinds
    assert tr.events[1].bindings == {"was": False}
    rep = [e for e in tr.events if e.kind == "repeat"]
    assert rep[-1].detail["iteration"] == 1 and rep[-1].detail["result"] is True


def test_repeat_exhausts_without_error():
    tr = run("click tab_settings\nrepeat until false max 3 {\n  click tab_acquire\n}\n")
    rep = [e for e in tr.events if e.kind == "repeat"]
    assert tr.ok and len(rep) == 3 and rep[-1].detail["exhausted"]
    tr = run("click tab_settings\nrepeat until false max 3 {\n  click tab_acquire\n}\n",
             limits=ExecutionLimits(max_iter=2))
    assert len([e for e in tr.events if e.kind == "repeat"]) == 2


def test_digest_chain():
    tr = execute_skill(bind_parameters(builtin_skill("uvvis-acquire"), {}), create_sim("uvvis", 1))
    for a, b in zip(tr.events, tr.events[1:]):
        if b.clock == a.clock:
            assert b.pre == a.post
    assert tr.events[-1].post == tr.terminal_digest


def test_limits():
    tr = run('wait_until widget(status) == "never" timeout 100000 poll 100\n', limits=ExecutionLimits(max_steps=5))
    assert tr.error["cause"] == "LimitExceeded" and len(tr.events) == 5
    tr = run('wait_until widget(status) == "never" timeout 100000 poll 100\n',
             limits=ExecutionLimits(max_time_ms=1000))
    assert tr.error["cause"] == "LimitExceeded" and tr.total_time <= 1000 + 100
    with pytest.raises(ValueError):
        ExecutionLimits(max_steps=0)


def test_uvvis_skill_matches_hand_scripting():
    art = builtin_skill("uvvis-acquire")
    args = {"wavelength_start": 300.0, "wavelength_end": 400.0, "step_nm": 1.0, "integration_ms": 100}
    tr, datasets = run_skill(bind_parameters(art, args), create_sim("uvvis", 42))
    assert tr.ok and len(tr.exports) == 1
    got = datasets[tr.exports[0]]
    sim = uvvis_scan(42, 300, 400, 1, 100)
    sim.apply_action(Click("export_spectrum"))
    want = sim.export_dataset("spectrum")
    assert np.array_equal(got.data, want.data) and np.array_equal(got.x, want.x)


def test_export_writes_files(tmp_path):
    tr = execute_skill(bind_parameters(builtin_skill("uvvis-acquire"), {}), create_sim("uvvis", 1), workdir=tmp_path)
    (rel,) = tr.exports
    assert rel.startswith("uvvis-acquire/") and (tmp_path / rel).is_file()


def test_export_path_escape_rejected():
    src = ('click tab_settings\nset lamp = true\nclick tab_acquire\nclick start_scan\n'
           'wait_until widget(status) == "complete" timeout 100000 poll 100\nclick export_spectrum\n'
           'export spectrum to "../outside.csv"\n')
    tr = run(src)
    assert tr.error["cause"] == "ExportError"


def test_call_errors():
    assert run("call nothing()\n").error["cause"] == "CallError"
    tr = execute_skill(bound("call nothing()\n"), create_sim("uvvis", 0), resolver=make_resolver(None))
    assert tr.error["cause"] == "CallError"
    tr = execute_skill(bound("call eds-snr()\n"), create_sim("uvvis", 0), resolver=make_resolver(None))
    assert tr.error["cause"] == "CallError" and "type2" in tr.error["message"]


def test_calls_run_callee():
    tr = execute_skill(bound("call sem-pump()\n", "sem-eds"), create_sim("sem-eds", 0), resolver=make_resolver(None))
    assert tr.ok and tr.events[0].kind == "call"
    assert any(e.step.startswith("0.call.") for e in tr.events)


# -- determinism ---------------------------------------------------------------

TYPE1 = sorted(n for n, a in builtin_skills().items() if a.manifest.skill_kind == "type1")


def test_ten_type1_fixture_skills():
    assert len(TYPE1) == 10


@pytest.mark.parametrize("name", TYPE1)
def test_replay_determinism(name):
    art = builtin_skill(name)
    res = make_resolver(None)
    for seed in (0, 1, 2):
        a = execute_skill(bind_parameters(art, {}), create_sim(art.manifest.environment, seed), resolver=res)
        b = execute_skill(bind_parameters(art, {}), create_sim(art.manifest.environment, seed), resolver=res)
        assert a.ok and trace_digest(a) == trace_digest(b)


def test_seed_and_params_change_digest():
    art = builtin_skill("uvvis-acquire")
    d = [trace_digest(execute_skill(bind_parameters(art, {}), create_sim("uvvis", s))) for s in (1, 2)]
    assert d[0] != d[1]
    img = builtin_skill("sem-imaging")
    k = [trace_digest(execute_skill(bind_parameters(img, {"kv": kv}), create_sim("sem-eds", 1),
                                    resolver=make_resolver(None))) for kv in (15, 20)]
    assert k[0] != k[1]


def test_trace_jsonl_round_trip():
    tr = run("click tab_settings\nassert false\n")
    back = ExecutionTrace.from_jsonl(tr.to_jsonl())
    assert back == tr and trace_digest(back) == trace_digest(tr)
    assert all(line.startswith("{") for line in tr.to_jsonl().splitlines())
    with pytest.raises(ValueError):
        ExecutionTrace.from_jsonl("")


# -- recorder --------------------------------------------------------------------

def test_record_empty_feed():
    sim = create_sim("uvvis", 0)
    before = sim.observe().digest()
    t = record_session(sim, [])
    assert len(t) == 0 and sim.clock == 0 and sim.observe().digest() == before
    assert t.terminal_digest == before


def test_record_six_actions_double_replay():
    feed = read_feed(DEMOS / "uvvis_settings" / "demo1.csv")
    t = record_session(create_sim("uvvis", 3), feed)
    assert len(t) == 6
    assert [s.clock for s in t.steps] == [c for c, _ in feed]
    sim = create_sim("uvvis", 3)
    for clock, action in feed:
        sim.advance(clock - sim.clock)
        sim.apply_action(action)
    assert sim.observe().digest() == t.terminal_digest
    again = DemonstrationTrace.from_jsonl(t.to_jsonl())
    assert again.terminal_digest == t.terminal_digest and len(again) == 6


def test_record_rejects_bad_clocks():
    with pytest.raises(FeedError):
        record_session(create_sim("uvvis", 0), [(100, Click("tab_settings")), (50, Click("tab_acquire"))])
    with pytest.raises(FeedError):
        record_session(create_sim("uvvis", 0), [(0, Click("tab_settings")), (20, Click("tab_acquire"))])


def test_record_reports_feed_index():
    from aurakit.sim.base import SimError

    with pytest.raises(SimError) as ei:
        record_session(create_sim("uvvis", 0), [(0, Click("tab_settings")), (100, TypeText("wavelength_start", "5"))])
    assert ei.value.feed_index == 1


# -- abstraction -----------------------------------------------------------------

@pytest.mark.parametrize("case", demo_cases())
def test_abstraction_soundness(case):
    assert all(replay_matches(case))


@pytest.mark.parametrize("case", demo_cases())
def test_abstraction_passes_checker(case):
    model, traces = record_case(case)
    ab = abstract_traces(traces)
    diags = check_program(ab.program, load_descriptor(model), ab.params, None)
    assert [d for d in diags if d.severity == "error"] == []


def test_single_trace_is_literal_transcription():
    model, (t,) = record_case("uvvis_settings")
    ab = abstract_traces([t])
    assert ab.params == ()
    assert format_program(ab.program) == (
        'click tab_settings\nselect mode = "absorbance"\nset wavelength_start = 350.0\n'
        "set wavelength_end = 650.0\nset step_nm = 2.0\nclick lamp\n")


def test_two_demos_one_parameter():
    model, traces = record_case("uvvis_two")
    ab = abstract_traces(traces)
    assert [(p.name, p.value_type) for p in ab.params] == [("wavelength_start", "real")]
    assert ab.params[0].default == 300.0
    assert [a["wavelength_start"] for a in ab.arguments] == [300.0, 400.0]
    single = abstract_traces(traces[:1]).program
    diff = [(a, b) for a, b in zip(ab.program.steps, single.steps) if a != b]
    assert len(ab.program.steps) == len(single.steps)
    assert diff == [(SetValue("wavelength_start", Name("wavelength_start")),
                     SetValue("wavelength_start", Literal("real", 300.0)))]


def test_wait_inference():
    model, traces = record_case("uvvis_wait")
    waits = [s for s in abstract_traces(traces).program.steps if isinstance(s, WaitUntil)]
    assert len(waits) == 1
    assert format_program(parse_program("").__class__((waits[0],))) == (
        'wait_until widget(status) == "complete" timeout 6000 poll 100\n')


def test_abstraction_errors():
    _, ut = record_case("uvvis_settings")
    _, st = record_case("microct_angles")
    with pytest.raises(MixedModels):
        abstract_traces(ut + st[:1])
    other = record_session(create_sim("uvvis", 3), [(0, Click("tab_acquire")), (100, Click("tab_settings")),
                                                     (200, SelectOption("mode", "emission"))])
    with pytest.raises(Unalignable):
        abstract_traces(ut + [other])
    with pytest.raises(ValueError):
        abstract_traces([])


def test_abstraction_artifact_helper_round_trip():
    model, traces = record_case("semeds_dwell")
    ab = abstract_traces(traces)
    art = abstraction_artifact(model, ab)
    assert isinstance(ab.params[0], ParamSpec) and art.manifest.environment == "sem-eds"
