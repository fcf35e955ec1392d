import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from descontrol.errors import AlphabetError, CapExceeded, ControllabilityBreach, ModelError
from descontrol.fsa import Alphabet, Automaton, accepts
from descontrol.simulator import (
    FIRED,
    REJECTED,
    Adversary,
    ClosedLoop,
    Script,
    disabled_by,
    dump_traces,
    enabled,
    exhaustive_reach,
    parse_traces,
    run,
    step,
)
from descontrol.synthesis import Supervisor, plant_image, supcon
from oracles import random_instance


@pytest.fixture
def identity(g_toy):
    return Supervisor.from_realization(g_toy, g_toy)


@pytest.fixture
def toy_sup(g_toy, k_toy):
    return supcon(g_toy, k_toy)


def test_enabled_and_step(g_toy, toy_sup):
    loop = ClosedLoop(g_toy, [toy_sup])
    assert enabled(loop) == (frozenset(), frozenset())
    assert loop.disabled() == {"a"}
    assert step(loop, "a") == disabled_by(0)
    assert step(loop, "u") == REJECTED
    assert loop.state == (0, 0)
    with pytest.raises(AlphabetError):
        step(loop, "zz")


def test_identity_loop_alternates(g_toy, identity):
    loop = ClosedLoop(g_toy, [identity])
    assert enabled(loop) == ({"a"}, frozenset())
    assert step(loop, "a") == FIRED
    assert enabled(loop) == (frozenset(), {"u"})
    log = run(ClosedLoop(g_toy, [identity]), Adversary(3), max_steps=10)
    assert log.fired == ("a", "u") * 5
    assert log.exhausted and not log.deadlocked and log.reached_marked


def test_breach_raised(g_toy, ab):
    bad = Automaton.build(ab, ["r0", "r1"], [("r0", "a", "r1")], "r0", ["r0", "r1"])
    loop = ClosedLoop(g_toy, [Supervisor(bad, {})])
    loop.step("a")
    with pytest.raises(ControllabilityBreach):
        loop.step("u")


def test_closed_loop_validation(g_toy, ab, toy_sup):
    with pytest.raises(ModelError):
        ClosedLoop(g_toy, [])
    with pytest.raises(ModelError):
        ClosedLoop(g_toy, [Supervisor(Automaton.empty(ab), {})])
    other = Automaton.build(Alphabet.of(["a"]), ["x"], [], "x")
    with pytest.raises(AlphabetError):
        ClosedLoop(g_toy, [Supervisor(other, {})])


def test_script_run_and_log(g_toy, identity):
    log = run(ClosedLoop(g_toy, [identity]), Script(("a", "a", "u"), "t"))
    assert [e.verdict for e in log.entries] == [FIRED, REJECTED, FIRED]
    assert log.fired == ("a", "u")
    assert log.reached_marked and not log.exhausted
    assert log.to_text() == (
        "# source=t\n"
        "step=0 ev=a verdict=fired state=(1,1) disabled={}\n"
        "step=1 ev=a verdict=plant-rejected state=(1,1) disabled={}\n"
        "step=2 ev=u verdict=fired state=(0,0) disabled={}\n"
        "# end marked=1 deadlocked=0 exhausted=0\n"
    )
    body = json.loads(log.to_json())
    assert body["source"] == "t" and len(body["entries"]) == 3


def test_supervised_toy_deadlocks(g_toy, toy_sup):
    log = run(ClosedLoop(g_toy, [toy_sup]), Adversary(0))
    assert log.entries == [] and log.deadlocked and log.reached_marked


def test_replay_is_deterministic(g_toy, identity):
    def go(seed):
        return run(ClosedLoop(g_toy, [identity]), Adversary(seed), max_steps=50).to_text()

    assert go(11) == go(11)
    rng = random.Random(5)
    for _ in range(10):
        plant, spec = random_instance(rng)
        sup = supcon(plant, spec)
        if sup.is_empty:
            continue
        texts = {run(ClosedLoop(plant, [sup]), Adversary(9), 100).to_text() for _ in range(3)}
        assert len(texts) == 1


def test_adversary_weights(g_toy):
    al = Alphabet.of(["a", "b"])
    plant = Automaton.build(al, ["p"], [("p", "a", "p"), ("p", "b", "p")], "p", ["p"])
    sup = Supervisor.from_realization(plant, plant)
    log = run(ClosedLoop(plant, [sup]), Adversary(1, {"a": 0.0}), 30)
    assert set(log.fired) == {"b"}


def test_exhaustive_reach_examples(g_toy, identity, toy_sup):
    report = exhaustive_reach(g_toy, [identity])
    assert report.states == [(0, 0), (1, 1)] and report.ok
    assert exhaustive_reach(g_toy, [toy_sup]).states == [(0, 0)]
    flagged = exhaustive_reach(g_toy, [identity], forbid_state=lambda names: names[0] == "q1")
    assert flagged.violations == [((1, 1), None)]
    edges = exhaustive_reach(g_toy, [identity], forbid_edge=lambda names, ev: ev == "u")
    assert edges.violations == [((1, 1), "u")]
    with pytest.raises(CapExceeded):
        exhaustive_reach(g_toy, [identity], cap=1)


def test_trace_file_round_trip():
    text = "# header\na u\n\nb  c # tail\n"
    traces = parse_traces(text)
    assert traces == [("a", "u"), ("b", "c")]
    assert parse_traces(dump_traces(traces)) == traces


def in_vivo(plant, sup, seed, steps):
    loop = ClosedLoop(plant, [sup])
    image = plant_image(plant, sup.realization)
    log = run(loop, Adversary(seed), steps)
    assert accepts(sup.realization, log.fired).in_language
    assert accepts(plant, log.fired).in_language
    # the supervisor's state always tracks the plant state it was built on
    assert image[loop.sup_states[0]] == loop.plant_state
    for entry in log.entries:
        assert entry.verdict == FIRED
    return log


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_supervised_runs_stay_sound(seed):
    rng = random.Random(seed)
    plant, spec = random_instance(rng)
    sup = supcon(plant, spec)
    if sup.is_empty:
        return
    log = in_vivo(plant, sup, seed, 200)
    if log.deadlocked:
        assert log.reached_marked
