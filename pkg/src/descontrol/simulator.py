"""Closed-loop execution of a plant under conjunctive supervisors.

One event fires per step. Uncontrollable events fire whenever the plant
allows them; a supervisor that has no matching transition is in breach.
Controllable events fire only when the plant and every supervisor agree.
"""

from __future__ import annotations

import json
import random
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping, Sequence

from descontrol.errors import AlphabetError, CapExceeded, ControllabilityBreach, ModelError
from descontrol.fsa import Automaton, accepts
from descontrol.synthesis import Supervisor

REACH_CAP = 10**6

FIRED = "fired"
REJECTED = "plant-rejected"


def disabled_by(k: int) -> str:
    return f"disabled-by:{k}"


class ClosedLoop:
    """Plant plus supervisors advancing in lock-step; mutated only by ``step``."""

    def __init__(self, plant: Automaton, supervisors: Sequence[Supervisor]):
        if not supervisors:
            raise ModelError("closed loop needs at least one supervisor")
        if plant.initial is None:
            raise ModelError("plant has no initial state")
        for k, sup in enumerate(supervisors):
            if sup.realization.alphabet != plant.alphabet:
                raise AlphabetError(f"supervisor {k} alphabet differs from plant alphabet")
            if sup.realization.initial is None:
                raise ModelError(f"supervisor {k} is empty; the closed loop has no behaviour")
        self.plant = plant
        self.supervisors = list(supervisors)
        self.reset()

    def reset(self):
        self.plant_state = self.plant.initial
        self.sup_states = [s.realization.initial for s in self.supervisors]

    @property
    def state(self) -> tuple:
        return (self.plant_state, *self.sup_states)

    def state_names(self) -> tuple:
        return (
            self.plant.names[self.plant_state],
            *(s.realization.names[x] for s, x in zip(self.supervisors, self.sup_states)),
        )

    def enabled(self):
        """``(permitted controllable, possible uncontrollable)`` at the current state."""
        plant_en = self.plant.trans[self.plant_state].keys()
        ctrl = self.plant.alphabet.controllable
        permitted = {
            ev
            for ev in plant_en
            if ev in ctrl
            and all(ev in s.realization.trans[x] for s, x in zip(self.supervisors, self.sup_states))
        }
        possible = {ev for ev in plant_en if ev not in ctrl}
        return frozenset(permitted), frozenset(possible)

    def disabled(self) -> frozenset:
        permitted, _ = self.enabled()
        ctrl = self.plant.alphabet.controllable
        return frozenset(ev for ev in self.plant.trans[self.plant_state] if ev in ctrl) - permitted

    def marked(self) -> bool:
        return self.plant_state in self.plant.marked and all(
            x in s.realization.marked for s, x in zip(self.supervisors, self.sup_states)
        )

    def step(self, event: str) -> str:
        if event not in self.plant.alphabet:
            raise AlphabetError(f"unknown event {event!r}")
        nxt = self.plant.trans[self.plant_state].get(event)
        if nxt is None:
            return REJECTED
        targets = []
        for k, (sup, x) in enumerate(zip(self.supervisors, self.sup_states)):
            t = sup.realization.trans[x].get(event)
            if t is None:
                if not self.plant.alphabet.is_controllable(event):
                    raise ControllabilityBreach(
                        f"supervisor {k} refuses uncontrollable {event!r} at "
                        f"{sup.realization.names[x]!r}"
                    )
                return disabled_by(k)
            targets.append(t)
        self.plant_state = nxt
        self.sup_states = targets
        return FIRED


def enabled(loop: ClosedLoop):
    return loop.enabled()


def step(loop: ClosedLoop, event: str) -> str:
    return loop.step(event)


@dataclass(frozen=True)
class Script:
    trace: tuple
    label: str = "script"


@dataclass(frozen=True)
class Adversary:
    """Seeded chooser among the events the closed loop can fire.

    The draw at step ``i`` depends only on ``(seed, i)`` and the enabled
    sets, so a run replays exactly.
    """

    seed: int = 0
    weights: Mapping | None = None

    @property
    def label(self) -> str:
        return f"adversary:{self.seed}"

    def choose(self, index: int, permitted, possible):
        cands = sorted(set(permitted) | set(possible))
        if not cands:
            return None
        rng = random.Random(f"{self.seed}:{index}")
        if self.weights:
            ws = [float(self.weights.get(ev, 1.0)) for ev in cands]
            if sum(ws) > 0:
                return rng.choices(cands, weights=ws)[0]
        return cands[rng.randrange(len(cands))]


@dataclass(frozen=True)
class LogEntry:
    step: int
    event: str
    verdict: str
    state: tuple
    disabled: tuple


@dataclass
class SimLog:
    source: str
    entries: list = field(default_factory=list)
    reached_marked: bool = False
    deadlocked: bool = False
    exhausted: bool = False

    @property
    def fired(self) -> tuple:
        return tuple(e.event for e in self.entries if e.verdict == FIRED)

    def to_text(self) -> str:
        lines = [f"# source={self.source}"]
        for e in self.entries:
            state = "(" + ",".join(map(str, e.state)) + ")"
            lines.append(
                f"step={e.step} ev={e.event} verdict={e.verdict} state={state} "
                f"disabled={{{','.join(e.disabled)}}}"
            )
        lines.append(
            f"# end marked={int(self.reached_marked)} deadlocked={int(self.deadlocked)} "
            f"exhausted={int(self.exhausted)}"
        )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True) + "\n"


def run(loop: ClosedLoop, source, max_steps: int = 1000) -> SimLog:
    """Drive ``loop`` from ``source`` until it is exhausted, deadlocks or fires ``max_steps`` events."""
    if max_steps < 0:
        raise ModelError("max_steps must be non-negative")
    log = SimLog(source.label)
    fires = 0
    index = 0
    pending = list(source.trace) if isinstance(source, Script) else None
    while True:
        permitted, possible = loop.enabled()
        if pending is not None:
            if not pending:
                break
            if fires >= max_steps:
                log.exhausted = True
                break
            event = pending.pop(0)
        else:
            if fires >= max_steps:
                log.exhausted = True
                break
            event = source.choose(index, permitted, possible)
            if event is None:
                break
        snapshot = tuple(sorted(loop.disabled()))
        verdict = loop.step(event)
        if verdict.startswith("disabled-by") and not loop.plant.alphabet.is_controllable(event):
            raise AssertionError("uncontrollable event reported as disabled")
        if verdict == FIRED:
            fires += 1
        log.entries.append(LogEntry(index, event, verdict, loop.state, snapshot))
        index += 1
    fired = log.fired
    for sup in loop.supervisors:
        assert accepts(sup.realization, fired).in_language, "fired trace left the realization"
    permitted, possible = loop.enabled()
    log.deadlocked = not permitted and not possible
    log.reached_marked = loop.marked()
    return log


@dataclass
class ReachReport:
    states: list
    names: list
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def exhaustive_reach(
    plant: Automaton,
    supervisors: Sequence[Supervisor],
    forbid_state: Callable | None = None,
    forbid_edge: Callable | None = None,
    cap: int = REACH_CAP,
) -> ReachReport:
    """Breadth-first search over closed-loop state tuples.

    ``forbid_state(names)`` flags a reachable tuple of display names;
    ``forbid_edge(names, event)`` flags a fireable event from a tuple.
    Violations are ``(state tuple, event or None)`` in BFS order.
    """
    loop = ClosedLoop(plant, supervisors)
    ctrl = plant.alphabet.controllable
    start = loop.state
    seen = {start}
    order = [start]
    queue = deque([start])
    violations = []
    while queue:
        tup = queue.popleft()
        p, sups = tup[0], tup[1:]
        names = (plant.names[p], *(s.realization.names[x] for s, x in zip(supervisors, sups)))
        if forbid_state is not None and forbid_state(names):
            violations.append((tup, None))
        for ev, pt in plant.trans[p].items():
            targets = []
            for k, (sup, x) in enumerate(zip(supervisors, sups)):
                t = sup.realization.trans[x].get(ev)
                if t is None:
                    if ev not in ctrl:
                        raise ControllabilityBreach(
                            f"supervisor {k} refuses uncontrollable {ev!r} at "
                            f"{sup.realization.names[x]!r}"
                        )
                    break
                targets.append(t)
            else:
                if forbid_edge is not None and forbid_edge(names, ev):
                    violations.append((tup, ev))
                nxt = (pt, *targets)
                if nxt not in seen:
                    seen.add(nxt)
                    order.append(nxt)
                    queue.append(nxt)
                    if len(seen) > cap:
                        raise CapExceeded(f"closed loop exceeds {cap} states")
    names = [
        (plant.names[t[0]], *(s.realization.names[x] for s, x in zip(supervisors, t[1:])))
        for t in order
    ]
    return ReachReport(order, names, violations)


def parse_traces(text: str) -> list:
    """One trace per non-blank line, events separated by whitespace."""
    out = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(tuple(line.split()))
    return out


def dump_traces(traces) -> str:
    return "".join(" ".join(t) + "\n" for t in traces)
