"""Deterministic finite automata and their language-level operations.

States are dense integers ``0..n-1`` with display names. Every operation
returns a fresh value; automata are never mutated after construction.
Outputs of ``accessible``, ``meet``, ``sync`` and ``trim`` are numbered
canonically: breadth-first from the initial state, successors visited in
event-name order.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from descontrol.errors import AlphabetError, CapExceeded, ModelError, ParseError

NAME_CAP = 256
ENUMERATION_CAP = 12


def check_name(name: str, what: str = "name") -> str:
    if not isinstance(name, str) or not name:
        raise ModelError(f"empty {what}")
    if "#" in name or any(ch.isspace() for ch in name):
        raise ModelError(f"invalid {what} {name!r}: no whitespace or '#' allowed")
    return name


@dataclass(frozen=True, order=True)
class Event:
    name: str
    controllable: bool = True

    def __post_init__(self):
        check_name(self.name, "event name")


class Alphabet:
    """Finite event set, iterated in sorted-name order."""

    __slots__ = ("events", "_by_name")

    def __init__(self, events: Iterable[Event] = ()):
        by_name: dict[str, Event] = {}
        for ev in events:
            prev = by_name.get(ev.name)
            if prev is not None and prev.controllable != ev.controllable:
                raise AlphabetError(f"controllability conflict on event {ev.name!r}")
            by_name[ev.name] = ev
        self.events = tuple(sorted(by_name.values()))
        self._by_name = {ev.name: ev for ev in self.events}

    @classmethod
    def of(cls, controllable: Iterable[str] = (), uncontrollable: Iterable[str] = ()):
        return cls(
            [Event(n, True) for n in controllable] + [Event(n, False) for n in uncontrollable]
        )

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._by_name)

    @property
    def controllable(self) -> frozenset[str]:
        return frozenset(ev.name for ev in self.events if ev.controllable)

    @property
    def uncontrollable(self) -> frozenset[str]:
        return frozenset(ev.name for ev in self.events if not ev.controllable)

    def is_controllable(self, name: str) -> bool:
        return self._by_name[name].controllable

    def __getitem__(self, name: str) -> Event:
        return self._by_name[name]

    def __contains__(self, name) -> bool:
        return name in self._by_name

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.events == other.events

    def __hash__(self):
        return hash(self.events)

    def __repr__(self):
        body = " ".join(f"{e.name}:{'c' if e.controllable else 'u'}" for e in self.events)
        return f"Alphabet({body})"

    def union(self, other: Alphabet) -> Alphabet:
        return Alphabet(self.events + other.events)

    def issubset(self, other: Alphabet) -> bool:
        return all(ev.name in other and other[ev.name] == ev for ev in self.events)


@dataclass(frozen=True, eq=True)
class Automaton:
    """Deterministic generator ``(states, initial, marked, delta)``.

    ``trans[s]`` maps event names to the successor of state ``s``; the
    per-state dicts are kept in sorted key order and must not be mutated.
    An automaton without an initial state has no states and generates the
    empty language.
    """

    alphabet: Alphabet
    names: tuple
    initial: int | None
    marked: frozenset
    trans: tuple

    __hash__ = None

    def __post_init__(self):
        n = len(self.names)
        if self.initial is None:
            if n:
                raise ModelError("automaton without initial state must have no states")
        elif not 0 <= self.initial < n:
            raise ModelError(f"initial state {self.initial} out of range")
        if len(self.trans) != n:
            raise ModelError("transition table size does not match state count")
        if len(set(self.names)) != n:
            raise ModelError("duplicate state names")
        for name in self.names:
            check_name(name, "state name")
        for s in self.marked:
            if not 0 <= s < n:
                raise ModelError(f"marked state {s} out of range")
        for row in self.trans:
            for ev, t in row.items():
                if ev not in self.alphabet:
                    raise AlphabetError(f"event {ev!r} not in alphabet")
                if not 0 <= t < n:
                    raise ModelError(f"transition target {t} out of range")
        object.__setattr__(self, "marked", frozenset(self.marked))
        object.__setattr__(
            self, "trans", tuple(dict(sorted(row.items())) for row in self.trans)
        )

    @classmethod
    def empty(cls, alphabet: Alphabet | None = None) -> Automaton:
        return cls(alphabet or Alphabet(), (), None, frozenset(), ())

    @classmethod
    def build(
        cls,
        alphabet: Alphabet,
        states: Sequence[str],
        transitions: Iterable[tuple[str, str, str]] = (),
        initial: str | None = None,
        marked: Iterable[str] = (),
    ) -> Automaton:
        """Assemble an automaton from state names; ids follow ``states`` order."""
        if initial is None:
            return cls.empty(alphabet)
        index = {name: i for i, name in enumerate(states)}
        if len(index) != len(states):
            raise ModelError("duplicate state names")
        trans: list[dict[str, int]] = [{} for _ in states]
        for src, ev, dst in transitions:
            if src not in index or dst not in index:
                raise ModelError(f"unknown state in transition {src} {ev} {dst}")
            if ev in trans[index[src]]:
                raise ModelError(f"nondeterministic transition on {ev!r} from {src!r}")
            trans[index[src]][ev] = index[dst]
        return cls(
            alphabet,
            tuple(states),
            index[initial],
            frozenset(index[m] for m in marked),
            tuple(trans),
        )

    @property
    def num_states(self) -> int:
        return len(self.names)

    @property
    def delta(self) -> dict[tuple[int, str], int]:
        return {(s, ev): t for s, row in enumerate(self.trans) for ev, t in row.items()}

    @property
    def is_empty(self) -> bool:
        return self.initial is None

    def state_id(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(name) from None

    def enabled(self, state: int) -> frozenset[str]:
        return frozenset(self.trans[state])

    def renamed(self, names: Sequence[str]) -> Automaton:
        return Automaton(self.alphabet, tuple(names), self.initial, self.marked, self.trans)

    def __repr__(self):
        return (
            f"Automaton(states={self.num_states}, transitions="
            f"{sum(len(r) for r in self.trans)}, events={list(self.alphabet.names)})"
        )


def _dedupe(names: list[str]) -> list[str]:
    seen: set[str] = set()
    out = []
    for i, name in enumerate(names):
        if len(name) > NAME_CAP:
            suffix = f"~{i}"
            name = name[: NAME_CAP - len(suffix)] + suffix
        while name in seen:
            name = f"{name}~{i}"
        seen.add(name)
        out.append(name)
    return out


def _restrict(a: Automaton, keep) -> Automaton:
    """Sub-automaton on ``keep``, relative state order preserved."""
    if a.initial is None or a.initial not in keep:
        return Automaton.empty(a.alphabet)
    order = [s for s in range(a.num_states) if s in keep]
    index = {s: i for i, s in enumerate(order)}
    trans = tuple(
        {ev: index[t] for ev, t in a.trans[s].items() if t in index} for s in order
    )
    return Automaton(
        a.alphabet,
        tuple(a.names[s] for s in order),
        index[a.initial],
        frozenset(index[s] for s in a.marked if s in index),
        trans,
    )


def bfs_order(a: Automaton) -> list[int]:
    """Reachable states in canonical order."""
    if a.initial is None:
        return []
    order = [a.initial]
    seen = {a.initial}
    i = 0
    while i < len(order):
        for t in a.trans[order[i]].values():
            if t not in seen:
                seen.add(t)
                order.append(t)
        i += 1
    return order


def accessible(a: Automaton) -> Automaton:
    order = bfs_order(a)
    if not order:
        return Automaton.empty(a.alphabet)
    index = {s: i for i, s in enumerate(order)}
    return Automaton(
        a.alphabet,
        tuple(a.names[s] for s in order),
        0,
        frozenset(index[s] for s in a.marked if s in index),
        tuple({ev: index[t] for ev, t in a.trans[s].items()} for s in order),
    )


def coaccessible_states(a: Automaton, within=None) -> set[int]:
    """States that reach a marked state, optionally staying inside ``within``."""
    preds: list[list[int]] = [[] for _ in range(a.num_states)]
    for s, row in enumerate(a.trans):
        if within is not None and s not in within:
            continue
        for t in row.values():
            preds[t].append(s)
    stack = [s for s in a.marked if within is None or s in within]
    good = set(stack)
    while stack:
        for p in preds[stack.pop()]:
            if p not in good:
                good.add(p)
                stack.append(p)
    return good


def coaccessible(a: Automaton) -> Automaton:
    return _restrict(a, coaccessible_states(a))


def trim(a: Automaton) -> Automaton:
    return accessible(coaccessible(a))


def _compose(a: Automaton, b: Automaton, alphabet: Alphabet, cap: int | None):
    """Accessible parallel product; returns the automaton and its state pairs."""
    if a.initial is None or b.initial is None:
        return Automaton.empty(alphabet), []
    a_only = frozenset(a.alphabet.names) - frozenset(b.alphabet.names)
    b_only = frozenset(b.alphabet.names) - frozenset(a.alphabet.names)
    start = (a.initial, b.initial)
    index = {start: 0}
    pairs = [start]
    trans = []
    i = 0
    while i < len(pairs):
        x, y = pairs[i]
        tx, ty = a.trans[x], b.trans[y]
        moves = []
        for ev, nx in tx.items():
            if ev in a_only:
                moves.append((ev, (nx, y)))
            else:
                ny = ty.get(ev)
                if ny is not None:
                    moves.append((ev, (nx, ny)))
        if b_only:
            for ev, ny in ty.items():
                if ev in b_only:
                    moves.append((ev, (x, ny)))
            moves.sort()
        row = {}
        for ev, pair in moves:
            j = index.get(pair)
            if j is None:
                j = index[pair] = len(pairs)
                pairs.append(pair)
                if cap is not None and len(pairs) > cap:
                    raise CapExceeded(f"product exceeds {cap} states")
            row[ev] = j
        trans.append(row)
        i += 1
    names = _dedupe([f"({a.names[x]},{b.names[y]})" for x, y in pairs])
    marked = frozenset(
        i for i, (x, y) in enumerate(pairs) if x in a.marked and y in b.marked
    )
    return Automaton(alphabet, tuple(names), 0, marked, tuple(trans)), pairs


def meet(a: Automaton, b: Automaton, cap: int | None = None) -> Automaton:
    """Product over a common alphabet: L = L(a) & L(b), Lm = Lm(a) & Lm(b)."""
    if a.alphabet != b.alphabet:
        raise AlphabetError(f"meet needs identical alphabets: {a.alphabet} vs {b.alphabet}")
    return _compose(a, b, a.alphabet, cap)[0]


def sync(a: Automaton, b: Automaton, cap: int | None = None) -> Automaton:
    """Synchronous composition: shared events jointly, private ones interleaved."""
    alphabet = a.alphabet.union(b.alphabet)
    return _compose(a, b, alphabet, cap)[0]


def sync_all(automata: Sequence[Automaton], cap: int | None = None) -> Automaton:
    if not automata:
        raise ModelError("sync_all needs at least one automaton")
    result = automata[0]
    for other in automata[1:]:
        result = sync(result, other, cap)
    return result


class Status(enum.Enum):
    MARKED = "marked"
    IN_LANGUAGE = "in_language"
    REJECTED = "rejected"


@dataclass(frozen=True)
class RunResult:
    status: Status
    rejected_at: int | None = None
    state: int | None = None

    @property
    def in_language(self) -> bool:
        return self.status is not Status.REJECTED

    @property
    def marked(self) -> bool:
        return self.status is Status.MARKED


def run(a: Automaton, trace: Iterable[str]) -> int | None:
    """State reached by ``trace``, or None when it cannot be run."""
    return accepts(a, trace).state


def accepts(a: Automaton, trace: Iterable[str]) -> RunResult:
    trace = tuple(trace)
    for ev in trace:
        if ev not in a.alphabet:
            raise AlphabetError(f"unknown event {ev!r}")
    if a.initial is None:
        return RunResult(Status.REJECTED, 0)
    s = a.initial
    for i, ev in enumerate(trace):
        nxt = a.trans[s].get(ev)
        if nxt is None:
            return RunResult(Status.REJECTED, i)
        s = nxt
    status = Status.MARKED if s in a.marked else Status.IN_LANGUAGE
    return RunResult(status, None, s)


def enumerate_language(
    a: Automaton, max_len: int, marked: bool = False, cap: int = ENUMERATION_CAP
) -> list[tuple[str, ...]]:
    """All words of L(a) (or Lm(a)) up to ``max_len``, length-then-lex ordered."""
    if max_len > cap:
        raise CapExceeded(f"max_len {max_len} exceeds enumeration cap {cap}")
    if a.initial is None:
        return []
    words = []
    frontier = [((), a.initial)]
    for length in range(max_len + 1):
        words.extend(w for w, s in frontier if not marked or s in a.marked)
        if length == max_len:
            break
        frontier = [(w + (ev,), t) for w, s in frontier for ev, t in a.trans[s].items()]
    return words


def is_isomorphic(a: Automaton, b: Automaton) -> bool:
    """Structural equality up to state ids and display names."""
    if a.alphabet != b.alphabet or a.num_states != b.num_states:
        return False
    if a.initial is None or b.initial is None:
        return a.initial is None and b.initial is None
    bij = {a.initial: b.initial}
    queue = deque([a.initial])
    while queue:
        x = queue.popleft()
        y = bij[x]
        if (x in a.marked) != (y in b.marked):
            return False
        tx, ty = a.trans[x], b.trans[y]
        if tx.keys() != ty.keys():
            return False
        for ev, nx in tx.items():
            ny = ty[ev]
            if nx in bij:
                if bij[nx] != ny:
                    return False
            else:
                bij[nx] = ny
                queue.append(nx)
    return len(bij) == a.num_states and len(set(bij.values())) == len(bij)


# -- .fsa text format ---------------------------------------------------------


def dump_fsa(a: Automaton) -> str:
    lines = [f"event {ev.name} {'c' if ev.controllable else 'u'}" for ev in a.alphabet]
    for s, name in enumerate(a.names):
        flags = ""
        if s == a.initial:
            flags += " initial"
        if s in a.marked:
            flags += " marked"
        lines.append(f"state {name}{flags}")
    for s, row in enumerate(a.trans):
        for ev, t in row.items():
            lines.append(f"trans {a.names[s]} {ev} {a.names[t]}")
    return "\n".join(lines) + "\n"


_SECTION = {"event": 0, "state": 1, "trans": 2}


def parse_fsa(text: str) -> Automaton:
    """Read the line-oriented .fsa format.

    Sections appear in the order ``event``, ``state``, ``trans``; ``#``
    starts a comment. A file with no initial state yields the empty
    automaton over the declared alphabet.
    """
    events: dict[str, bool] = {}
    states: dict[str, int] = {}
    names: list[str] = []
    initial = None
    marked: set[int] = set()
    trans: list[dict[str, int]] = []
    section = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        kind = words[0]
        if kind not in _SECTION:
            raise ParseError(f"unknown directive {kind!r}", lineno)
        if _SECTION[kind] < section:
            raise ParseError(f"{kind!r} line after a later section", lineno)
        section = _SECTION[kind]
        try:
            if kind == "event":
                if len(words) != 3 or words[2] not in ("c", "u"):
                    raise ParseError("expected 'event <name> <c|u>'", lineno)
                name = check_name(words[1], "event name")
                flag = words[2] == "c"
                if events.get(name, flag) != flag:
                    raise ParseError(f"controllability conflict on event {name!r}", lineno)
                events[name] = flag
            elif kind == "state":
                if len(words) < 2:
                    raise ParseError("expected 'state <name> [initial] [marked]'", lineno)
                name = check_name(words[1], "state name")
                if name in states:
                    raise ParseError(f"duplicate state {name!r}", lineno)
                flags = words[2:]
                if any(f not in ("initial", "marked") for f in flags) or len(set(flags)) != len(flags):
                    raise ParseError(f"bad state flags {flags}", lineno)
                sid = states[name] = len(names)
                names.append(name)
                trans.append({})
                if "initial" in flags:
                    if initial is not None:
                        raise ParseError("more than one initial state", lineno)
                    initial = sid
                if "marked" in flags:
                    marked.add(sid)
            else:
                if len(words) != 4:
                    raise ParseError("expected 'trans <src> <event> <dst>'", lineno)
                _, src, ev, dst = words
                for st in (src, dst):
                    if st not in states:
                        raise ParseError(f"unknown state {st!r}", lineno)
                if ev not in events:
                    raise ParseError(f"unknown event {ev!r}", lineno)
                row = trans[states[src]]
                if ev in row:
                    raise ParseError(
                        f"nondeterministic: {src!r} already has a transition on {ev!r}", lineno
                    )
                row[ev] = states[dst]
        except ModelError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), lineno) from None
    alphabet = Alphabet(Event(n, c) for n, c in events.items())
    if initial is None:
        return Automaton.empty(alphabet)
    return Automaton(alphabet, tuple(names), initial, frozenset(marked), tuple(trans))


def load_fsa(path) -> Automaton:
    with open(path, encoding="utf-8") as fh:
        return parse_fsa(fh.read())
