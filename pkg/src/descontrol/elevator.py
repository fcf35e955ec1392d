"""Elevator case study: plant components, specifications, scenario and chart.

Floors and cars are numbered from 1. Event names:

    uncontrollable  call_up_f call_dn_f req_c_f arrive_c_f
                    obstruct_c stop_c start_c alarm_c
    controllable    up_c down_c open_c close_c assign_c_f

The plant is the synchronous product of, per car, a position automaton, a
door automaton, a run/stop switch and a one-state panel (cabin buttons and
dispatch decisions), plus one two-state lamp per landing call button.
Lamps, the door timer and the alarm are folded into these components rather
than modelled as extra events.
"""

from __future__ import annotations

from dataclasses import dataclass

from descontrol.errors import ModelError
from descontrol.fsa import Alphabet, Automaton, meet, sync_all
from descontrol.statechart import Statechart, parse_statechart
from descontrol.synthesis import Supervisor, lift, supcon

MAX_SYNTH_FLOORS = 8
MAX_SYNTH_CARS = 2
PLANT_CAP = 10**6


@dataclass(frozen=True)
class ElevatorConfig:
    floors: int
    cars: int = 1

    def check(self, synthesis: bool = True) -> ElevatorConfig:
        if self.floors < 2 or self.cars < 1:
            raise ModelError(f"need floors >= 2 and cars >= 1, got {self}")
        if synthesis and (self.floors > MAX_SYNTH_FLOORS or self.cars > MAX_SYNTH_CARS):
            raise ModelError(
                f"synthesis targets are limited to {MAX_SYNTH_FLOORS} floors and "
                f"{MAX_SYNTH_CARS} cars, got {self}"
            )
        return self

    @property
    def car_ids(self) -> range:
        return range(1, self.cars + 1)

    @property
    def floor_ids(self) -> range:
        return range(1, self.floors + 1)

    def call_buttons(self) -> list[tuple[str, int]]:
        """Landing buttons as ``(direction, floor)``: no down at the bottom, no up at the top."""
        out = [("up", f) for f in self.floor_ids if f < self.floors]
        out += [("dn", f) for f in self.floor_ids if f > 1]
        return out


# -- event scheme -------------------------------------------------------------


def call(direction: str, floor: int) -> str:
    return f"call_{direction}_{floor}"


def arrive(car: int, floor: int) -> str:
    return f"arrive_{car}_{floor}"


def alphabet(cfg: ElevatorConfig) -> Alphabet:
    unc, ctrl = [], []
    for d, f in cfg.call_buttons():
        unc.append(call(d, f))
    for c in cfg.car_ids:
        unc += [f"obstruct_{c}", f"stop_{c}", f"start_{c}", f"alarm_{c}"]
        ctrl += [f"up_{c}", f"down_{c}", f"open_{c}", f"close_{c}"]
        for f in cfg.floor_ids:
            unc += [f"req_{c}_{f}", arrive(c, f)]
            ctrl.append(f"assign_{c}_{f}")
    return Alphabet.of(ctrl, unc)


def _automaton(full: Alphabet, names, states, transitions, initial, marked) -> Automaton:
    sub = Alphabet(full[n] for n in names)
    return Automaton.build(sub, states, transitions, initial, marked)


# -- plant --------------------------------------------------------------------


def position(cfg: ElevatorConfig, c: int, full: Alphabet) -> Automaton:
    st = [f"p{c}={f}" for f in cfg.floor_ids]
    tr = []
    for f in cfg.floor_ids:
        if f < cfg.floors:
            tr.append((f"p{c}={f}", f"up_{c}", f"p{c}={f + 1}"))
        if f > 1:
            tr.append((f"p{c}={f}", f"down_{c}", f"p{c}={f - 1}"))
        tr.append((f"p{c}={f}", arrive(c, f), f"p{c}={f}"))
    events = [f"up_{c}", f"down_{c}"] + [arrive(c, f) for f in cfg.floor_ids]
    return _automaton(full, events, st, tr, st[0], st)


def door(c: int, full: Alphabet) -> Automaton:
    closed, opened, closing = f"d{c}=closed", f"d{c}=open", f"d{c}=closing"
    tr = [
        (closed, f"open_{c}", opened),
        (closing, f"open_{c}", opened),
        (opened, f"close_{c}", closing),
        (closing, f"obstruct_{c}", opened),
    ]
    events = [f"open_{c}", f"close_{c}", f"obstruct_{c}"]
    return _automaton(full, events, [closed, opened, closing], tr, closed, [closed, closing])


def run_switch(c: int, full: Alphabet) -> Automaton:
    on, off = f"r{c}=on", f"r{c}=off"
    tr = [
        (on, f"stop_{c}", off),
        (off, f"start_{c}", on),
        (on, f"alarm_{c}", on),
        (off, f"alarm_{c}", off),
    ]
    return _automaton(full, [f"stop_{c}", f"start_{c}", f"alarm_{c}"], [on, off], tr, on, [on])


def panel(cfg: ElevatorConfig, c: int, full: Alphabet) -> Automaton:
    s = f"k{c}"
    events = [f"req_{c}_{f}" for f in cfg.floor_ids] + [f"assign_{c}_{f}" for f in cfg.floor_ids]
    return _automaton(full, events, [s], [(s, e, s) for e in events], s, [s])


def button(cfg: ElevatorConfig, direction: str, f: int, full: Alphabet) -> Automaton:
    idle, lit = f"{direction}{f}=0", f"{direction}{f}=1"
    ev = call(direction, f)
    tr = [(idle, ev, lit), (lit, ev, lit)]
    for c in cfg.car_ids:
        tr += [(idle, arrive(c, f), idle), (lit, arrive(c, f), idle)]
    events = [ev] + [arrive(c, f) for c in cfg.car_ids]
    return _automaton(full, events, [idle, lit], tr, idle, [idle])


def plant_components(cfg: ElevatorConfig) -> dict:
    full = alphabet(cfg)
    comps = {}
    for c in cfg.car_ids:
        comps[f"position_{c}"] = position(cfg, c, full)
        comps[f"door_{c}"] = door(c, full)
        comps[f"run_{c}"] = run_switch(c, full)
        comps[f"panel_{c}"] = panel(cfg, c, full)
    for d, f in cfg.call_buttons():
        comps[f"button_{d}_{f}"] = button(cfg, d, f, full)
    return comps


def build_plant(cfg: ElevatorConfig, cap: int = PLANT_CAP) -> Automaton:
    cfg.check()
    plant = sync_all(list(plant_components(cfg).values()), cap)
    # "((a,b),c)" -> "a,b,c": component names carry no parentheses
    return plant.renamed([n.replace("(", "").replace(")", "") for n in plant.names])


def component_state(plant_name: str, prefix: str) -> str | None:
    """Value of one component in a plant state name, e.g. ``('...', 'd1')`` -> ``'open'``."""
    for part in plant_name.split(","):
        key, _, value = part.partition("=")
        if key == prefix:
            return value
    return None


# -- specifications -----------------------------------------------------------


def door_safety(c: int, full: Alphabet) -> Automaton:
    """S1: no movement while the door is open."""
    tr = [
        ("shut", f"up_{c}", "shut"),
        ("shut", f"down_{c}", "shut"),
        ("shut", f"open_{c}", "open"),
        ("shut", f"obstruct_{c}", "open"),
        ("open", f"close_{c}", "shut"),
    ]
    events = [f"up_{c}", f"down_{c}", f"open_{c}", f"close_{c}", f"obstruct_{c}"]
    return _automaton(full, events, ["shut", "open"], tr, "shut", ["shut", "open"])


def call_service(cfg: ElevatorConfig, direction: str, f: int, full: Alphabet) -> Automaton:
    """S2: a registered call is eventually answered by an arrival at its floor."""
    ev = call(direction, f)
    tr = [("idle", ev, "waiting"), ("waiting", ev, "waiting")]
    for c in cfg.car_ids:
        tr += [("idle", arrive(c, f), "idle"), ("waiting", arrive(c, f), "idle")]
    events = [ev] + [arrive(c, f) for c in cfg.car_ids]
    return _automaton(full, events, ["idle", "waiting"], tr, "idle", ["idle"])


def dispatch_exclusive(cfg: ElevatorConfig, f: int, full: Alphabet) -> Automaton:
    """S3: while a call at ``f`` is pending, at most one car gets assigned to it."""
    calls = [call(d, g) for d, g in cfg.call_buttons() if g == f]
    st = ["idle", "pending", "assigned"]
    tr = []
    for ev in calls:
        tr += [("idle", ev, "pending"), ("pending", ev, "pending"), ("assigned", ev, "assigned")]
    for c in cfg.car_ids:
        tr.append(("pending", f"assign_{c}_{f}", "assigned"))
        for s in st:
            tr.append((s, arrive(c, f), "idle"))
    events = calls + [f"assign_{c}_{f}" for c in cfg.car_ids] + [arrive(c, f) for c in cfg.car_ids]
    return _automaton(full, events, st, tr, "idle", st)


def stop_compliance(c: int, full: Alphabet) -> Automaton:
    """S4: after ``stop_c`` the car neither moves nor operates its door until ``start_c``."""
    tr = [(("run", f"{e}_{c}", "run")) for e in ("up", "down", "open", "close")]
    tr += [("run", f"stop_{c}", "halt"), ("halt", f"start_{c}", "run")]
    events = [f"{e}_{c}" for e in ("up", "down", "open", "close", "stop", "start")]
    return _automaton(full, events, ["run", "halt"], tr, "run", ["run", "halt"])


def build_specs(cfg: ElevatorConfig) -> list[tuple[str, Automaton]]:
    """Named specifications over sub-alphabets; lift them before synthesis."""
    cfg.check()
    full = alphabet(cfg)
    specs = []
    for c in cfg.car_ids:
        specs.append((f"S1_door_car{c}", door_safety(c, full)))
        specs.append((f"S4_stop_car{c}", stop_compliance(c, full)))
    for d, f in cfg.call_buttons():
        specs.append((f"S2_call_{d}{f}", call_service(cfg, d, f, full)))
    for f in cfg.floor_ids:
        specs.append((f"S3_dispatch_floor{f}", dispatch_exclusive(cfg, f, full)))
    return specs


def local_spec_names(cfg: ElevatorConfig, car: int) -> list[str]:
    return [f"S1_door_car{car}", f"S4_stop_car{car}"]


def global_spec_names(cfg: ElevatorConfig) -> list[str]:
    specs = [n for n, _ in build_specs(cfg)]
    return [n for n in specs if n.startswith(("S2_", "S3_"))]


def combine(specs, full: Alphabet, cap: int | None = None) -> Automaton:
    """Meet of the lifted specifications, in the given order."""
    specs = list(specs)
    if not specs:
        raise ModelError("no specifications to combine")
    result = lift(specs[0], full)
    for spec in specs[1:]:
        result = meet(result, lift(spec, full), cap)
    return result


def synthesize(cfg: ElevatorConfig, names=None, plant: Automaton | None = None) -> Supervisor:
    """Monolithic supervisor for the named specs (all by default)."""
    plant = plant or build_plant(cfg)
    specs = dict(build_specs(cfg))
    chosen = [specs[n] for n in (names or specs)]
    return supcon(plant, combine(chosen, plant.alphabet))


def synthesize_modular(cfg: ElevatorConfig, plant: Automaton | None = None):
    """Per-car local supervisors (S1, S4) and one global dispatch supervisor (S2, S3)."""
    plant = plant or build_plant(cfg)
    local = [synthesize(cfg, local_spec_names(cfg, c), plant) for c in cfg.car_ids]
    glob = synthesize(cfg, global_spec_names(cfg), plant)
    return plant, local, glob


def door_open_move(cfg: ElevatorConfig):
    """Edge predicate for ``exhaustive_reach``: a car moves while its door is open."""
    moves = {}
    for c in cfg.car_ids:
        moves[f"up_{c}"] = f"d{c}"
        moves[f"down_{c}"] = f"d{c}"

    def forbidden(names, event) -> bool:
        key = moves.get(event)
        return key is not None and component_state(names[0], key) == "open"

    return forbidden


# -- use-case scenario --------------------------------------------------------


def table2_trace(cfg: ElevatorConfig) -> tuple[str, ...]:
    """The use-case walk-through as events of car 1.

    Car 1 idles at floor 1. An up call at 4 sends it up three floors; a down
    call at 2 is queued meanwhile. At 4 the door opens, passenger 1 asks for
    6, the door closes and the car climbs two floors. At 6 the door opens
    and closes again (timer expiry is ``close_1``). The car descends four
    floors to 2, opens, passenger 2 asks for 1, the door closes, the car
    goes down one floor, opens at 1 and finally closes and idles.
    """
    if cfg.floors < 6 or cfg.cars < 1:
        raise ModelError("the use-case scenario needs at least 6 floors and 1 car")
    ev = [call("up", 4), "up_1", "up_1", "up_1", call("dn", 2), arrive(1, 4), "open_1",
          "req_1_6", "close_1", "up_1", "up_1", arrive(1, 6), "open_1", "close_1"]
    ev += ["down_1"] * 4
    ev += [arrive(1, 2), "open_1", "req_1_1", "close_1", "down_1", arrive(1, 1), "open_1",
           "close_1"]
    return tuple(ev)


# -- statechart model ---------------------------------------------------------


def statechart_text(cfg: ElevatorConfig) -> str:
    """Controller chart: one region per car, landing queues per direction, car status."""
    cfg.check()
    if cfg.cars > 2:
        raise ModelError("the elevator chart supports at most 2 cars")
    top = cfg.floors - 1
    full = alphabet(cfg)
    used: set[str] = set()
    body: list[str] = []

    def on(event, guard="", actions="", target=""):
        used.add(event)
        line = f"      on {event}"
        if guard:
            line += f" [{guard}]"
        if actions:
            line += f" / {actions}"
        body.append(f"{line} -> {target}")

    decls = ["const ERR_TOR 0", "const VELOCITY 1"]
    for c in cfg.car_ids:
        pos, dst = f"position_{c}", f"destination_{c}"
        decls += [f"var {pos} 0..{top} init 0", f"var {dst} 0..{top} init 0"]
        up_guard = f"{dst} - {pos} > ERR_TOR"
        down_guard = f"{pos} - {dst} > ERR_TOR"
        body.append(f"  region car_{c} {{")
        body.append(f"    state idle_{c} initial marked")
        for f in cfg.floor_ids:
            on(f"assign_{c}_{f}", f"{pos} == {dst}", f"{dst} := {f - 1}", f"idle_{c}")
        on(f"up_{c}", up_guard, f"{pos} := {pos} + VELOCITY", f"moving_up_{c}")
        on(f"down_{c}", down_guard, f"{pos} := {pos} - VELOCITY", f"moving_down_{c}")
        on(f"open_{c}", "", "", f"door_open_{c}")
        for direction, guard, op in (("up", up_guard, "+"), ("down", down_guard, "-")):
            body.append(f"    state moving_{direction}_{c}")
            on(f"{direction}_{c}", guard, f"{pos} := {pos} {op} VELOCITY", f"moving_{direction}_{c}")
            for f in cfg.floor_ids:
                on(arrive(c, f), f"{pos} == {f - 1} && {dst} == {pos}", "", f"idle_{c}")
        body.append(f"    state door_open_{c} marked")
        on(f"close_{c}", "", "", f"idle_{c}")
        body.append("  }")

    for d in ("up", "dn"):
        floors = [f for dd, f in cfg.call_buttons() if dd == d]
        count = f"pending_{d}"
        decls.append(f"var {count} 0..{len(floors)} init 0")
        for f in floors:
            decls.append(f"var q_{d}_{f} 0..1 init 0")
        body.append(f"  region queue_{d} {{")
        for leaf, flags in ((f"no_{d}", " initial marked"), (f"some_{d}", "")):
            body.append(f"    state {leaf}{flags}")
            for f in floors:
                flag = f"q_{d}_{f}"
                on(call(d, f), f"{flag} == 0", f"{flag} := 1; {count} := {count} + 1", f"some_{d}")
            if leaf == f"some_{d}":
                for f in floors:
                    flag = f"q_{d}_{f}"
                    for c in cfg.car_ids:
                        on(arrive(c, f), f"{flag} == 1 && {count} > 1",
                           f"{flag} := 0; {count} := {count} - 1", f"some_{d}")
                        on(arrive(c, f), f"{flag} == 1 && {count} == 1",
                           f"{flag} := 0; {count} := {count} - 1", f"no_{d}")
        body.append("  }")

    for c in cfg.car_ids:
        pos, dst = f"position_{c}", f"destination_{c}"
        body.append(f"  region status_{c} {{")
        body.append(f"    state available_{c} initial marked")
        for f in cfg.floor_ids:
            on(f"assign_{c}_{f}", f"{pos} == {dst}", "", f"busy_{c}")
        body.append(f"    state busy_{c}")
        for f in cfg.floor_ids:
            on(arrive(c, f), f"{pos} == {f - 1} && {dst} == {pos}", "", f"available_{c}")
        body.append("  }")

    events = [
        f"event {e.name} {'c' if e.controllable else 'u'}" for e in full if e.name in used
    ]
    head = [f"chart elevator_{cfg.floors}x{cfg.cars}"]
    return "\n".join(head + events + decls + ["and elevator {"] + body + ["}"]) + "\n"


def elevator_statechart(cfg: ElevatorConfig) -> Statechart:
    return parse_statechart(statechart_text(cfg))
