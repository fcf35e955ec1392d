import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from descontrol.errors import AlphabetError, CapExceeded, ModelError, ParseError
from descontrol.fsa import (
    Alphabet,
    Automaton,
    Event,
    Status,
    accepts,
    accessible,
    coaccessible,
    dump_fsa,
    enumerate_language,
    is_isomorphic,
    meet,
    parse_fsa,
    sync,
    trim,
)
from oracles import shuffle_languages, words
from strategies import alphabets, automata, automaton_pairs


def chain(alphabet, word, marked_last=True):
    states = [f"x{i}" for i in range(len(word) + 1)]
    trans = [(states[i], ev, states[i + 1]) for i, ev in enumerate(word)]
    return Automaton.build(alphabet, states, trans, states[0], [states[-1]] if marked_last else [])


# -- parse / dump -------------------------------------------------------------

TWO_STATE = """\
event a c
state q0 initial marked
state q1
trans q0 a q1
"""


def test_parse_two_state():
    a = parse_fsa(TWO_STATE)
    assert a.num_states == 2
    assert len(a.delta) == 1
    assert a.names == ("q0", "q1")
    assert a.initial == 0 and a.marked == {0}


def test_parse_rejects_nondeterminism():
    text = "event a c\nstate q0 initial\nstate q1\nstate q2\ntrans q0 a q1\ntrans q0 a q2\n"
    with pytest.raises(ParseError, match="nondeterministic") as err:
        parse_fsa(text)
    assert err.value.line == 6


def test_parse_without_initial_is_empty():
    a = parse_fsa("event a c\n# no states\n")
    assert a.is_empty and a.num_states == 0
    assert a.alphabet.names == ("a",)


@pytest.mark.parametrize(
    "text, message",
    [
        ("event a c\nstate q0 initial\nstate q0\n", "duplicate state"),
        ("event a c\nstate q0 initial\ntrans q0 a q9\n", "unknown state"),
        ("event a c\nstate q0 initial\ntrans q0 b q0\n", "unknown event"),
        ("event a c\nevent a u\n", "controllability conflict"),
        ("event a x\n", "expected"),
        ("state q0 initial\nevent a c\n", "after a later section"),
        ("event a c\nstate q0 initial\nstate q1 initial\n", "more than one initial"),
        ("bogus\n", "unknown directive"),
    ],
)
def test_parse_errors(text, message):
    with pytest.raises(ParseError, match=message):
        parse_fsa(text)


def test_dump_is_canonical_and_round_trips(g_toy):
    text = dump_fsa(g_toy)
    assert text == (
        "event a c\nevent u u\nstate q0 initial marked\nstate q1\n"
        "trans q0 a q1\ntrans q1 u q0\n"
    )
    assert dump_fsa(parse_fsa(text)) == text


@settings(max_examples=80, deadline=None)
@given(automata(allow_empty=True))
def test_round_trip_isomorphic(a):
    back = parse_fsa(dump_fsa(a))
    assert is_isomorphic(accessible(back), accessible(a))
    assert dump_fsa(back) == dump_fsa(a)


def test_event_names_validated():
    with pytest.raises(ModelError):
        Event("has space")
    with pytest.raises(ModelError):
        Event("hash#tag")
    with pytest.raises(AlphabetError):
        Alphabet([Event("a", True), Event("a", False)])


# -- accessible / coaccessible / trim -----------------------------------------


def test_accessible_drops_unreachable(ab):
    a = Automaton.build(ab, ["q0", "q1", "q2"], [("q0", "a", "q1")], "q0")
    acc = accessible(a)
    assert acc.names == ("q0", "q1")


def test_accessible_fixpoint_and_empty(g_toy, ab):
    assert is_isomorphic(accessible(g_toy), g_toy)
    assert accessible(Automaton.empty(ab)).is_empty


def test_accessible_numbers_breadth_first():
    al = Alphabet.of(["a", "b"])
    a = Automaton.build(
        al, ["z", "y", "x"], [("x", "b", "z"), ("x", "a", "y"), ("y", "a", "z")], "x"
    )
    assert accessible(a).names == ("x", "y", "z")


def test_coaccessible_prunes_deadlock(ab):
    a = Automaton.build(ab, ["q0", "q1"], [("q0", "a", "q1")], "q0", ["q0"])
    co = coaccessible(a)
    assert co.names == ("q0",) and co.delta == {}


def test_coaccessible_all_marked_and_none_marked(g_toy, ab):
    all_marked = Automaton.build(ab, ["q0", "q1"], [("q0", "a", "q1"), ("q1", "u", "q0")], "q0", ["q0", "q1"])
    assert is_isomorphic(coaccessible(all_marked), all_marked)
    none_marked = Automaton.build(ab, ["q0", "q1"], [("q0", "a", "q1")], "q0")
    assert coaccessible(none_marked).is_empty


def test_trim_examples(g_toy, ab):
    assert is_isomorphic(trim(g_toy), g_toy)
    unreachable_marked = Automaton.build(ab, ["q0", "q1"], [], "q0", ["q1"])
    assert trim(unreachable_marked).is_empty


@settings(max_examples=100, deadline=None)
@given(automata(allow_empty=True))
def test_trim_idempotent(a):
    t = trim(a)
    assert is_isomorphic(trim(t), t)


@settings(max_examples=100, deadline=None)
@given(automata(), st.integers(0, 6))
def test_accessible_and_coaccessible_keep_marked_language(a, k):
    lm = words(a, k, marked=True)
    assert words(accessible(a), k, marked=True) == lm
    assert words(coaccessible(a), k, marked=True) == lm
    assert words(trim(a), k, marked=True) == lm


# -- meet / sync --------------------------------------------------------------


def test_meet_prefix_example():
    al = Alphabet.of(["a", "b", "c"])
    ab_only = chain(al, "ab")
    both = Automaton.build(
        al, ["y0", "y1", "y2", "y3"], [("y0", "a", "y1"), ("y1", "b", "y2"), ("y1", "c", "y3")], "y0"
    )
    m = meet(ab_only, both)
    expected = words(ab_only, 3) & words(both, 3)
    assert expected == {(), ("a",), ("a", "b")}
    assert set(enumerate_language(m, 3)) == expected


def test_meet_idempotent_and_absorbing(g_toy, ab):
    assert set(enumerate_language(meet(g_toy, g_toy), 6)) == set(enumerate_language(g_toy, 6))
    assert meet(g_toy, Automaton.empty(ab)).is_empty


def test_meet_alphabet_mismatch(g_toy):
    other = Automaton.build(Alphabet.of(["a"]), ["x"], [], "x")
    with pytest.raises(AlphabetError):
        meet(g_toy, other)


def test_meet_cap(g_toy):
    with pytest.raises(CapExceeded):
        meet(g_toy, g_toy, cap=1)


def test_sync_disjoint_example():
    ax = Alphabet.of(["x"])
    ay = Alphabet.of(["y"])
    a = Automaton.build(ax, ["s0", "s1"], [("s0", "x", "s1")], "s0", ["s1"])
    b = Automaton.build(ay, ["t0", "t1"], [("t0", "y", "t1")], "t0", ["t1"])
    lm = set(enumerate_language(sync(a, b), 4, marked=True))
    assert lm == {("x", "y"), ("y", "x")}
    assert lm == shuffle_languages({("x",)}, {("y",)}, 4)


def test_sync_neutral_element(g_toy):
    unit = Automaton.build(Alphabet(), ["e"], [], "e", ["e"])
    s = sync(g_toy, unit)
    assert set(enumerate_language(s, 6)) == set(enumerate_language(g_toy, 6))
    assert set(enumerate_language(s, 6, True)) == set(enumerate_language(g_toy, 6, True))


def test_sync_controllability_conflict():
    a = Automaton.build(Alphabet.of(["e"]), ["s"], [], "s")
    b = Automaton.build(Alphabet.of([], ["e"]), ["t"], [], "t")
    with pytest.raises(AlphabetError):
        sync(a, b)


def test_product_names():
    al = Alphabet.of(["a"])
    a = Automaton.build(al, ["p"], [("p", "a", "p")], "p")
    assert meet(a, a).names == ("(p,p)",)


@settings(max_examples=150, deadline=None)
@given(automaton_pairs(), st.integers(0, 8))
def test_meet_intersects_languages(pair, k):
    a, b = pair
    m = meet(a, b)
    assert words(m, k) == words(a, k) & words(b, k)
    assert words(m, k, True) == words(a, k, True) & words(b, k, True)


@settings(max_examples=100, deadline=None)
@given(automaton_pairs(max_states=4), st.integers(0, 6))
def test_sync_full_alphabet_is_meet(pair, k):
    a, b = pair
    assert words(sync(a, b), k) == words(meet(a, b), k)
    assert is_isomorphic(sync(a, b), meet(a, b))


@settings(max_examples=100, deadline=None)
@given(automata(max_states=4), automata(max_states=4), automata(max_states=3))
def test_sync_commutative_associative(a, b, c):
    assert is_isomorphic(sync(a, b), sync(b, a))
    assert is_isomorphic(sync(sync(a, b), c), sync(a, sync(b, c)))


@st.composite
def disjoint_pair(draw):
    a = draw(automata(Alphabet.of(["a", "b"], ["u"]), max_states=4))
    b = draw(automata(Alphabet.of(["c"], ["v"]), max_states=4))
    return a, b


@settings(max_examples=100, deadline=None)
@given(disjoint_pair(), st.integers(0, 6))
def test_sync_disjoint_is_shuffle(pair, k):
    a, b = pair
    expected = shuffle_languages(words(a, k, True), words(b, k, True), k)
    assert set(enumerate_language(sync(a, b), k, marked=True)) == expected


# -- accepts / enumerate / isomorphism ----------------------------------------


def test_accepts_examples(g_toy):
    assert accepts(g_toy, []).status is Status.MARKED
    assert accepts(g_toy, ["a"]).status is Status.IN_LANGUAGE
    r = accepts(g_toy, ["u"])
    assert r.status is Status.REJECTED and r.rejected_at == 0
    assert accepts(g_toy, ["a", "u", "u"]).rejected_at == 2
    with pytest.raises(AlphabetError):
        accepts(g_toy, ["zz"])


def test_enumerate_examples(g_toy, ab):
    assert enumerate_language(g_toy, 3) == [(), ("a",), ("a", "u"), ("a", "u", "a")]
    assert enumerate_language(Automaton.empty(ab), 4) == []
    assert enumerate_language(g_toy, 0, marked=True) == [()]
    with pytest.raises(CapExceeded):
        enumerate_language(g_toy, 13)


@settings(max_examples=100, deadline=None)
@given(automata(), st.integers(0, 6), st.booleans())
def test_enumerate_matches_unrolling(a, k, marked):
    listed = enumerate_language(a, k, marked)
    assert set(listed) == words(a, k, marked)
    assert listed == sorted(listed, key=lambda w: (len(w), w))


def test_isomorphism_examples(g_toy, ab):
    assert is_isomorphic(g_toy, g_toy)
    renamed = g_toy.renamed(["x", "y"])
    assert is_isomorphic(g_toy, renamed)
    remarked = Automaton.build(ab, ["q0", "q1"], [("q0", "a", "q1"), ("q1", "u", "q0")], "q0", ["q0", "q1"])
    assert not is_isomorphic(g_toy, remarked)


@given(alphabets())
def test_alphabet_sorted(al):
    assert list(al.names) == sorted(al.names)
