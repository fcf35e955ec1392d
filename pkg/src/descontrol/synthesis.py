"""Controllability, supremal controllable supervisors and nonconflict checks.

Specifications must already range over the plant alphabet (see ``lift``).
Marked-language semantics throughout: the synthesized realization
recognises the supremal controllable sublanguage of ``Lm(plant) & Lm(spec)``
and is trim.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from descontrol.errors import AlphabetError, SynthesisError
from descontrol.fsa import (
    Alphabet,
    Automaton,
    _compose,
    _restrict,
    accessible,
    bfs_order,
    coaccessible_states,
    meet,
)


@dataclass(frozen=True)
class Violation:
    spec_state: int
    plant_state: int
    event: str
    witness: tuple


@dataclass(frozen=True)
class ControllabilityReport:
    violations: tuple = ()

    @property
    def controllable(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class Supervisor:
    """A realization automaton plus, per state, the controllable events it disables."""

    realization: Automaton
    disabled: Mapping = field(default_factory=dict)

    def __post_init__(self):
        ctrl = self.realization.alphabet.controllable
        for state, events in self.disabled.items():
            if not events <= ctrl:
                raise SynthesisError(
                    f"disablement at state {state} contains uncontrollable events "
                    f"{sorted(events - ctrl)}"
                )

    @classmethod
    def from_realization(cls, plant: Automaton, realization: Automaton) -> Supervisor:
        return cls(realization, disablement_map(plant, realization))

    @property
    def is_empty(self) -> bool:
        return self.realization.is_empty


def bfs_tree(a: Automaton):
    """Reachable states in BFS order and a parent map ``state -> (prev, event)``.

    Following parents yields the shortest trace to each state, ties broken
    by event name.
    """
    if a.initial is None:
        return [], {}
    parent = {a.initial: None}
    order = [a.initial]
    i = 0
    while i < len(order):
        s = order[i]
        for ev, t in a.trans[s].items():
            if t not in parent:
                parent[t] = (s, ev)
                order.append(t)
        i += 1
    return order, parent


def trace_to(parent, state) -> tuple:
    out = []
    while parent[state] is not None:
        state, ev = parent[state]
        out.append(ev)
    return tuple(reversed(out))


def lift(spec: Automaton, full: Alphabet) -> Automaton:
    """Extend ``spec`` to ``full`` with self-loops on every event it omits."""
    if not spec.alphabet.issubset(full):
        raise AlphabetError(f"spec alphabet {spec.alphabet} is not a subset of {full}")
    if spec.initial is None:
        return Automaton.empty(full)
    missing = [ev for ev in full.names if ev not in spec.alphabet]
    trans = tuple({**row, **{ev: s for ev in missing}} for s, row in enumerate(spec.trans))
    return Automaton(full, spec.names, spec.initial, spec.marked, trans)


def _same_alphabet(plant: Automaton, other: Automaton, what: str):
    if plant.alphabet != other.alphabet:
        raise AlphabetError(
            f"{what} alphabet {other.alphabet} differs from plant alphabet {plant.alphabet}"
        )


def check_controllable(plant: Automaton, spec: Automaton) -> ControllabilityReport:
    """Statewise check of ``L(spec) Su & L(plant) <= L(spec)`` on the product."""
    _same_alphabet(plant, spec, "spec")
    prod, pairs = _compose(plant, spec, plant.alphabet, None)
    _, parent = bfs_tree(prod)
    unc = plant.alphabet.uncontrollable
    violations = []
    for i, (x, y) in enumerate(pairs):
        for ev in plant.trans[x]:
            if ev in unc and ev not in spec.trans[y]:
                violations.append(Violation(y, x, ev, trace_to(parent, i)))
    return ControllabilityReport(tuple(violations))


def _reach_within(a: Automaton, alive) -> set:
    if a.initial not in alive:
        return set()
    seen = {a.initial}
    stack = [a.initial]
    while stack:
        for t in a.trans[stack.pop()].values():
            if t in alive and t not in seen:
                seen.add(t)
                stack.append(t)
    return seen


def supcon(plant: Automaton, spec: Automaton, cap: int | None = None) -> Supervisor:
    """Supremal controllable, nonblocking supervisor of ``plant`` for ``spec``.

    Works on the product of plant and spec: delete states where an
    uncontrollable plant event has no surviving product successor, trim,
    and repeat until nothing is deleted.
    """
    _same_alphabet(plant, spec, "spec")
    if plant.initial is None:
        raise SynthesisError("plant has no initial state")
    prod, pairs = _compose(plant, spec, plant.alphabet, cap)
    unc = plant.alphabet.uncontrollable
    # uncontrollable events each product state must be able to follow
    required = [
        [ev for ev in plant.trans[x] if ev in unc] for x, _ in pairs
    ]
    alive = set(range(prod.num_states))
    while alive:
        bad = set()
        for s in alive:
            row = prod.trans[s]
            for ev in required[s]:
                t = row.get(ev)
                if t is None or t not in alive:
                    bad.add(s)
                    break
        kept = alive - bad
        kept = _reach_within(prod, coaccessible_states(prod, within=kept))
        if kept == alive:
            break
        alive = kept
    realization = accessible(_restrict(prod, alive))
    return Supervisor(realization, disablement_map(plant, realization))


def plant_image(plant: Automaton, realization: Automaton) -> dict:
    """Map each reachable realization state to the plant state its traces reach."""
    _same_alphabet(plant, realization, "realization")
    if realization.initial is None:
        return {}
    if plant.initial is None:
        raise SynthesisError("realization is nonempty but plant has no initial state")
    image = {realization.initial: plant.initial}
    queue = deque([realization.initial])
    while queue:
        r = queue.popleft()
        p = image[r]
        for ev, rt in realization.trans[r].items():
            pt = plant.trans[p].get(ev)
            if pt is None:
                raise SynthesisError(
                    f"realization trace unrunnable on plant: {ev!r} at "
                    f"{realization.names[r]!r}"
                )
            seen = image.get(rt)
            if seen is None:
                image[rt] = pt
                queue.append(rt)
            elif seen != pt:
                raise SynthesisError(
                    f"realization state {realization.names[rt]!r} corresponds to two plant states"
                )
    return image


def disablement_map(plant: Automaton, realization: Automaton) -> dict:
    """Per realization state: controllable events the plant offers but the realization refuses."""
    image = plant_image(plant, realization)
    unc = plant.alphabet.uncontrollable
    out = {}
    for r in sorted(image):
        refused = plant.trans[image[r]].keys() - realization.trans[r].keys()
        bad = refused & unc
        if bad:
            raise SynthesisError(
                f"uncontrollable disablement of {sorted(bad)} at {realization.names[r]!r}"
            )
        out[r] = frozenset(refused)
    return out


def blocking_states(a: Automaton) -> list[int]:
    """Reachable states from which no marked state is reachable, in BFS order."""
    good = coaccessible_states(a)
    return [s for s in bfs_order(a) if s not in good]


def nonblocking(a: Automaton) -> bool:
    return not blocking_states(a)


def nonconflicting(supervisors: Sequence[Supervisor], plant: Automaton):
    """Whether plant and all supervisors jointly stay nonblocking.

    Returns ``(ok, witness)`` where ``witness`` is the shortest trace to a
    blocking state, or None.
    """
    joint = plant
    for sup in supervisors:
        _same_alphabet(plant, sup.realization, "realization")
        joint = meet(joint, sup.realization)
    good = coaccessible_states(joint)
    order, parent = bfs_tree(joint)
    for s in order:
        if s not in good:
            return False, trace_to(parent, s)
    return True, None
