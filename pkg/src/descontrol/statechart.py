"""Hierarchical/parallel statecharts over bounded integers, and their flattening.

A chart is a tree: states own zero regions (leaf), one region (OR
hierarchy) or several regions (AND). Transitions connect sibling states of
one region and carry an event trigger, a conjunctive guard and integer
assignments. On an event, every active region holding an enabled transition
fires simultaneously; actions run in document order of their regions.

``interpret_step`` walks the chart tree directly. ``flatten`` compiles the
chart to index tables and expands reachable configurations into an
``Automaton``; the two are kept independent so they can check each other.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from descontrol.errors import CapExceeded, ConflictError, DomainError, ParseError
from descontrol.fsa import Alphabet, Automaton, Event, check_name

DOMAIN_CAP = 64
VALUATION_CAP = 10**5
CONFIG_CAP = 10**5

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|([+-]))")
_CMP = re.compile(r"(<=|>=|==|!=|≤|≥|≠|<|>|=)")
_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    "≤": lambda a, b: a <= b,
    "=": lambda a, b: a == b,
    "==": lambda a, b: a == b,
    ">=": lambda a, b: a >= b,
    "≥": lambda a, b: a >= b,
    ">": lambda a, b: a > b,
    "!=": lambda a, b: a != b,
    "≠": lambda a, b: a != b,
}


@dataclass(frozen=True)
class Expr:
    """Linear integer expression: ``offset + sum(coef * var)``."""

    terms: tuple = ()
    offset: int = 0

    def eval(self, values: dict) -> int:
        return self.offset + sum(c * values[v] for c, v in self.terms)


@dataclass(frozen=True)
class Comparison:
    left: Expr
    op: str
    right: Expr

    def holds(self, values: dict) -> bool:
        return _OPS[self.op](self.left.eval(values), self.right.eval(values))


@dataclass(frozen=True)
class Assignment:
    var: str
    expr: Expr


@dataclass(frozen=True)
class Variable:
    name: str
    lo: int
    hi: int
    init: int

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class GuardedTransition:
    source: str
    event: str
    guard: tuple
    actions: tuple
    target: str
    line: int | None = None


@dataclass
class State:
    name: str
    marked: bool = False
    regions: list = field(default_factory=list)
    transitions: list = field(default_factory=list)

    @property
    def kind(self) -> str:
        if not self.regions:
            return "leaf"
        return "or" if len(self.regions) == 1 else "and"


@dataclass
class Region:
    name: str
    states: list = field(default_factory=list)
    initial: str | None = None

    def child(self, name: str) -> State:
        for st in self.states:
            if st.name == name:
                return st
        raise KeyError(name)


@dataclass
class Statechart:
    name: str
    events: Alphabet
    constants: dict
    variables: tuple
    root: State

    def regions(self) -> list:
        """All regions in document (depth-first pre-) order."""
        out = []

        def walk(state):
            for region in state.regions:
                out.append(region)
                for child in region.states:
                    walk(child)

        walk(self.root)
        return out

    def states(self) -> dict:
        out = {}
        for region in self.regions():
            for st in region.states:
                out[st.name] = st
        return out

    @property
    def trigger_alphabet(self) -> Alphabet:
        used = {t.event for st in self.states().values() for t in st.transitions}
        return Alphabet(ev for ev in self.events if ev.name in used)

    def valuation_count(self) -> int:
        return math.prod(v.size for v in self.variables)

    def configuration_bound(self) -> int:
        """Upper bound on flat states: structural configurations times valuations."""

        def count(state):
            return math.prod(sum(count(c) for c in r.states) for r in state.regions)

        return count(self.root) * self.valuation_count()


@dataclass(frozen=True)
class Configuration:
    leaves: tuple
    values: tuple

    def label(self, variables) -> str:
        name = ".".join(self.leaves)
        if variables:
            name += "[" + ",".join(f"{v.name}={x}" for v, x in zip(variables, self.values)) + "]"
        return name


# -- parsing ------------------------------------------------------------------


def _ident(word: str, what: str, line: int) -> str:
    if not _IDENT.match(word):
        raise ParseError(f"invalid {what} {word!r}", line)
    return word


def _int(word: str, line: int) -> int:
    try:
        return int(word)
    except ValueError:
        raise ParseError(f"expected integer, got {word!r}", line) from None


def parse_expr(text: str, variables: dict, constants: dict, line=None) -> Expr:
    pos = 0
    text = text.strip()
    if not text:
        raise ParseError("empty expression", line)
    coefs: dict[str, int] = {}
    offset = 0
    sign = 1
    expect_atom = True
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"bad expression {text!r}", line)
        pos = m.end()
        num, name, op = m.groups()
        if op:
            if expect_atom:
                if op == "-":
                    sign = -sign
                continue
            sign = 1 if op == "+" else -1
            expect_atom = True
            continue
        if not expect_atom:
            raise ParseError(f"missing operator in {text!r}", line)
        if num is not None:
            offset += sign * int(num)
        elif name in variables:
            coefs[name] = coefs.get(name, 0) + sign
        elif name in constants:
            offset += sign * constants[name]
        else:
            raise ParseError(f"undeclared variable {name!r}", line)
        sign = 1
        expect_atom = False
        if pos < len(text) and text[pos:].strip() == "":
            break
    if expect_atom:
        raise ParseError(f"dangling operator in {text!r}", line)
    terms = tuple(sorted((c, v) for v, c in coefs.items() if c))
    return Expr(terms, offset)


def parse_guard(text: str, variables, constants, line=None) -> tuple:
    out = []
    for part in text.split("&&"):
        pieces = _CMP.split(part)
        if len(pieces) != 3:
            raise ParseError(f"expected one comparison in {part.strip()!r}", line)
        left, op, right = pieces
        out.append(
            Comparison(
                parse_expr(left, variables, constants, line),
                op,
                parse_expr(right, variables, constants, line),
            )
        )
    return tuple(out)


def parse_actions(text: str, variables, constants, line=None) -> tuple:
    out = []
    for part in text.split(";"):
        if not part.strip():
            continue
        if ":=" in part:
            var, expr = part.split(":=", 1)
        elif "=" in part:
            var, expr = part.split("=", 1)
        else:
            raise ParseError(f"expected assignment in {part.strip()!r}", line)
        var = var.strip()
        if var not in variables:
            raise ParseError(f"undeclared variable {var!r}", line)
        out.append(Assignment(var, parse_expr(expr, variables, constants, line)))
    return tuple(out)


def _split_transition(body: str, line: int):
    """``<event> [guard] [/ actions] -> target`` into raw parts."""
    if "->" not in body:
        raise ParseError("transition needs '-> <target>'", line)
    left, target = body.rsplit("->", 1)
    target = target.strip()
    left = left.strip()
    parts = left.split(None, 1)
    if not parts:
        raise ParseError("transition needs an event", line)
    event = parts[0]
    rest = parts[1].strip() if len(parts) > 1 else ""
    guard = ""
    if rest.startswith("["):
        close = rest.find("]")
        if close < 0:
            raise ParseError("unterminated guard", line)
        guard = rest[1:close]
        rest = rest[close + 1 :].strip()
    actions = ""
    if rest.startswith("/"):
        actions = rest[1:]
    elif rest:
        raise ParseError(f"unexpected text {rest!r}", line)
    return event, guard, actions, target


def parse_statechart(
    text: str,
    domain_cap: int = DOMAIN_CAP,
    valuation_cap: int = VALUATION_CAP,
) -> Statechart:
    """Read the .sc format into a validated ``Statechart``."""
    name = None
    events: list[Event] = []
    event_flags: dict[str, bool] = {}
    constants: dict[str, int] = {}
    variables: dict[str, Variable] = {}
    root = State("root")
    # frames: ("top", root) | ("region", Region) | ("state", State, min_regions, line)
    stack: list = [("top", root)]
    raw_transitions = []  # (State, text, line)
    all_states: dict[str, tuple] = {}  # name -> (State, Region)
    top_and = False

    def open_state(words, line, block, is_and):
        frame = stack[-1]
        if frame[0] != "region":
            raise ParseError("states must be declared inside a region", line)
        region = frame[1]
        sname = _ident(words[1], "state name", line)
        if sname in all_states:
            raise ParseError(f"duplicate state {sname!r}", line)
        flags = words[2:]
        if any(f not in ("initial", "marked") for f in flags):
            raise ParseError(f"bad state flags {flags}", line)
        st = State(sname, marked="marked" in flags)
        region.states.append(st)
        all_states[sname] = (st, region)
        if "initial" in flags:
            if region.initial is not None:
                raise ParseError(f"region {region.name!r} has two initial states", line)
            region.initial = sname
        if block:
            stack.append(("state", st, 2 if is_and else 1, line))

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        block = line.endswith("{")
        if block:
            line = line[:-1].strip()
        words = line.split()
        if not words:
            raise ParseError("stray '{'", lineno)
        kind = words[0]
        frame = stack[-1]
        if kind == "}":
            if len(stack) == 1:
                raise ParseError("unbalanced '}'", lineno)
            closed = stack.pop()
            if closed[0] == "region":
                if not closed[1].states:
                    raise ParseError(f"region {closed[1].name!r} has no states", lineno)
                if closed[1].initial is None:
                    raise ParseError(f"region {closed[1].name!r} has no initial state", lineno)
            elif closed[0] == "state" and len(closed[1].regions) < closed[2]:
                raise ParseError(
                    f"state {closed[1].name!r} needs at least {closed[2]} region(s)", closed[3]
                )
            continue
        if kind == "chart":
            if name is not None or len(words) != 2:
                raise ParseError("expected a single 'chart <name>'", lineno)
            name = _ident(words[1], "chart name", lineno)
            root.name = name
        elif kind == "event":
            if len(words) != 3 or words[2] not in ("c", "u"):
                raise ParseError("expected 'event <name> <c|u>'", lineno)
            ev = check_name(words[1], "event name")
            flag = words[2] == "c"
            if event_flags.get(ev, flag) != flag:
                raise ParseError(f"controllability conflict on event {ev!r}", lineno)
            event_flags[ev] = flag
            events.append(Event(ev, flag))
        elif kind == "const":
            if len(words) != 3:
                raise ParseError("expected 'const <name> <int>'", lineno)
            cname = _ident(words[1], "constant", lineno)
            if cname in constants or cname in variables:
                raise ParseError(f"duplicate name {cname!r}", lineno)
            constants[cname] = _int(words[2], lineno)
        elif kind == "var":
            m = re.fullmatch(
                r"var\s+(\S+)\s+(-?\d+)\s*\.\.\s*(-?\d+)\s+init\s+(-?\d+)", line
            )
            if not m:
                raise ParseError("expected 'var <name> <lo>..<hi> init <v>'", lineno)
            vname = _ident(m.group(1), "variable", lineno)
            if vname in constants or vname in variables:
                raise ParseError(f"duplicate name {vname!r}", lineno)
            lo, hi, init = (int(m.group(i)) for i in (2, 3, 4))
            if lo > hi:
                raise ParseError(f"empty domain for {vname!r}", lineno)
            if not lo <= init <= hi:
                raise ParseError(f"initial value {init} outside {lo}..{hi} for {vname!r}", lineno)
            if hi - lo + 1 > domain_cap:
                raise CapExceeded(f"line {lineno}: domain of {vname!r} exceeds {domain_cap}")
            variables[vname] = Variable(vname, lo, hi, init)
        elif kind == "region":
            if not block or len(words) != 2:
                raise ParseError("expected 'region <name> {'", lineno)
            rname = _ident(words[1], "region name", lineno)
            owner = frame[1] if frame[0] in ("top", "state") else None
            if owner is None:
                raise ParseError("region must sit at top level or inside a state", lineno)
            region = Region(rname)
            owner.regions.append(region)
            stack.append(("region", region))
        elif kind == "and":
            if not block or len(words) < 2:
                raise ParseError("expected 'and <name> [initial] {'", lineno)
            if frame[0] == "top":
                if root.regions or top_and:
                    raise ParseError("top-level 'and' must be the only top-level block", lineno)
                top_and = True
                _ident(words[1], "state name", lineno)
                stack.append(("state", root, 2, lineno))
            else:
                open_state(words, lineno, True, True)
        elif kind == "state":
            if len(words) < 2:
                raise ParseError("expected 'state <name> [initial] [marked]'", lineno)
            open_state(words, lineno, block, False)
        elif kind == "on":
            if frame[0] == "state" and frame[1] is not root:
                owner = frame[1]
            elif frame[0] == "region" and frame[1].states:
                owner = frame[1].states[-1]
            else:
                raise ParseError("'on' must follow a state", lineno)
            if block:
                raise ParseError("unexpected '{' after transition", lineno)
            raw_transitions.append((owner, line[2:].strip(), lineno))
        else:
            raise ParseError(f"unknown directive {kind!r}", lineno)

    if len(stack) != 1:
        raise ParseError("unclosed block at end of input")
    if name is None:
        raise ParseError("missing 'chart <name>'")
    if not root.regions:
        raise ParseError("chart has no regions")
    product = math.prod(v.size for v in variables.values())
    if product > valuation_cap:
        raise CapExceeded(f"product of variable domains {product} exceeds {valuation_cap}")

    for owner, body, lineno in raw_transitions:
        event, guard, actions, target = _split_transition(body, lineno)
        if event not in event_flags:
            raise ParseError(f"undeclared event {event!r}", lineno)
        if target not in all_states:
            raise ParseError(f"dangling state reference {target!r}", lineno)
        if all_states[target][1] is not all_states[owner.name][1]:
            raise ParseError(f"transition {owner.name!r} -> {target!r} leaves its region", lineno)
        owner.transitions.append(
            GuardedTransition(
                owner.name,
                event,
                parse_guard(guard, variables, constants, lineno) if guard.strip() else (),
                parse_actions(actions, variables, constants, lineno),
                target,
                lineno,
            )
        )
    return Statechart(name, Alphabet(events), constants, tuple(variables.values()), root)


def load_statechart(path) -> Statechart:
    with open(path, encoding="utf-8") as fh:
        return parse_statechart(fh.read())


# -- reference interpreter ----------------------------------------------------


def initial_configuration(sc: Statechart) -> Configuration:
    def entry(state):
        out = []
        for region in state.regions:
            child = region.child(region.initial)
            out.extend(entry(child) if child.regions else [child.name])
        return out

    return Configuration(tuple(entry(sc.root)), tuple(v.init for v in sc.variables))


def _apply(actions, values: dict) -> dict:
    values = dict(values)
    for a in actions:
        values[a.var] = a.expr.eval(values)
    return values


def _in_domain(sc: Statechart, values: dict, names) -> bool:
    bounds = {v.name: v for v in sc.variables}
    return all(bounds[n].lo <= values[n] <= bounds[n].hi for n in names)


def interpret_step(sc: Statechart, cfg: Configuration, event: str):
    """Successor configuration on ``event``, or None when nothing can fire."""
    if event not in sc.events:
        raise ParseError(f"unknown event {event!r}")
    values = {v.name: x for v, x in zip(sc.variables, cfg.values)}
    leaves = set(cfg.leaves)
    fired = {}  # id(region) -> transition
    order = []

    def active_child(region):
        for st in region.states:
            if st.name in leaves or _contains_leaf(st, leaves):
                return st
        raise ValueError(f"configuration has no active state in region {region.name!r}")

    def visit(state) -> bool:
        any_fired = False
        for region in state.regions:
            child = active_child(region)
            enabled = []
            for t in child.transitions:
                if t.event != event or not all(c.holds(values) for c in t.guard):
                    continue
                after = _apply(t.actions, values)
                if _in_domain(sc, after, [a.var for a in t.actions]):
                    enabled.append(t)
            if len(enabled) > 1:
                raise ConflictError(
                    f"state {child.name!r}: {len(enabled)} transitions enabled on {event!r}"
                )
            if enabled:
                fired[id(region)] = enabled[0]
                order.append(enabled[0])
            inner = visit(child)
            if enabled and inner:
                raise ConflictError(
                    f"state {child.name!r} and a nested region both fire on {event!r}"
                )
            any_fired = any_fired or inner or bool(enabled)
        return any_fired

    if not visit(sc.root):
        return None

    new_values = dict(values)
    for t in order:
        new_values = _apply(t.actions, new_values)
    if not _in_domain(sc, new_values, new_values):
        raise DomainError(f"combined actions on {event!r} leave the variable domains")

    def collect(state, fresh):
        out = []
        for region in state.regions:
            if fresh:
                child, child_fresh = region.child(region.initial), True
            elif id(region) in fired:
                child, child_fresh = region.child(fired[id(region)].target), True
            else:
                child, child_fresh = active_child(region), False
            out.extend(collect(child, child_fresh) if child.regions else [child.name])
        return out

    return Configuration(
        tuple(collect(sc.root, False)), tuple(new_values[v.name] for v in sc.variables)
    )


def _contains_leaf(state, leaves) -> bool:
    return any(
        st.name in leaves or _contains_leaf(st, leaves) for r in state.regions for st in r.states
    )


def is_marked(sc: Statechart, cfg: Configuration) -> bool:
    states = sc.states()
    return all(states[leaf].marked for leaf in cfg.leaves)


# -- flattening ---------------------------------------------------------------


def _compile_expr(expr: Expr, index: dict):
    terms = [(c, index[v]) for c, v in expr.terms]
    off = expr.offset
    if not terms:
        return lambda vals: off
    if len(terms) == 1:
        (c, i), = terms
        return lambda vals: off + c * vals[i]
    return lambda vals: off + sum(c * vals[i] for c, i in terms)


class _Compiled:
    """Index tables for one chart: regions in document order, children by position."""

    def __init__(self, sc: Statechart):
        self.sc = sc
        self.regions = sc.regions()
        rindex = {id(r): i for i, r in enumerate(self.regions)}
        vindex = {v.name: i for i, v in enumerate(sc.variables)}
        self.lo = [v.lo for v in sc.variables]
        self.hi = [v.hi for v in sc.variables]
        n = len(self.regions)
        # descendants of region i occupy indices i+1 .. span[i]-1
        self.span = [0] * n
        self.sub_regions = {}  # (r, k) -> indices of regions directly under child k
        self.leaf = {}  # (r, k) -> (is_leaf, marked, name)
        self.table = {}  # (r, k, event) -> list of (guard, effects, target_k)

        def size(state):
            return sum(1 + sum(size(c) for c in r.states) for r in state.regions)

        for i, region in enumerate(self.regions):
            self.span[i] = i + 1 + sum(size(c) for c in region.states)
            for k, child in enumerate(region.states):
                self.sub_regions[i, k] = [rindex[id(r)] for r in child.regions]
                self.leaf[i, k] = (not child.regions, child.marked, child.name)
                pos = {st.name: j for j, st in enumerate(region.states)}
                for t in child.transitions:
                    guards = [
                        (_compile_expr(c.left, vindex), _OPS[c.op], _compile_expr(c.right, vindex))
                        for c in t.guard
                    ]
                    effects = [(vindex[a.var], _compile_expr(a.expr, vindex)) for a in t.actions]
                    self.table.setdefault((i, k, t.event), []).append(
                        (guards, effects, pos[t.target])
                    )
        self.initial_index = [
            [st.name for st in r.states].index(r.initial) for r in self.regions
        ]

    def entry(self, r: int, k: int, active: list):
        for sub in self.sub_regions[r, k]:
            active[sub] = self.initial_index[sub]
            self.entry(sub, active[sub], active)

    def initial(self):
        active = [-1] * len(self.regions)
        for i, region in enumerate(self.regions):
            if any(region is top for top in self.sc.root.regions):
                active[i] = self.initial_index[i]
                self.entry(i, active[i], active)
        return tuple(active), tuple(v.init for v in self.sc.variables)

    def effects_ok(self, effects, vals) -> bool:
        work = list(vals)
        for idx, fn in effects:
            work[idx] = fn(work)
        return all(self.lo[idx] <= work[idx] <= self.hi[idx] for idx, _ in effects)

    def step(self, active, vals, event):
        fired = []
        for r, k in enumerate(active):
            if k < 0:
                continue
            cands = self.table.get((r, k, event))
            if not cands:
                continue
            ok = [
                c for c in cands
                if all(op(lf(vals), rf(vals)) for lf, op, rf in c[0]) and self.effects_ok(c[1], vals)
            ]
            if len(ok) > 1:
                raise ConflictError(
                    f"state {self.leaf[r, k][2]!r}: {len(ok)} transitions enabled on {event!r}"
                )
            if ok:
                fired.append((r, ok[0]))
        if not fired:
            return None
        for a, (r1, _) in enumerate(fired):
            for r2, _ in fired[a + 1 :]:
                if r1 < r2 < self.span[r1]:
                    raise ConflictError(
                        f"state {self.leaf[r1, active[r1]][2]!r} and a nested region "
                        f"both fire on {event!r}"
                    )
        work = list(vals)
        new_active = list(active)
        for r, (_, effects, target) in fired:
            for idx, fn in effects:
                work[idx] = fn(work)
            for sub in range(r + 1, self.span[r]):
                new_active[sub] = -1
            new_active[r] = target
            self.entry(r, target, new_active)
        for idx, x in enumerate(work):
            if not self.lo[idx] <= x <= self.hi[idx]:
                raise DomainError(f"combined actions on {event!r} leave the variable domains")
        return tuple(new_active), tuple(work)

    def marked(self, active) -> bool:
        for r, k in enumerate(active):
            if k >= 0:
                is_leaf, mk, _ = self.leaf[r, k]
                if is_leaf and not mk:
                    return False
        return True

    def label(self, active, vals) -> str:
        leaves = [self.leaf[r, k][2] for r, k in enumerate(active) if k >= 0 and self.leaf[r, k][0]]
        return Configuration(tuple(leaves), vals).label(self.sc.variables)


def flatten(sc: Statechart, cap: int = CONFIG_CAP) -> Automaton:
    """Explicit-state expansion of the reachable configurations of ``sc``."""
    comp = _Compiled(sc)
    alphabet = sc.trigger_alphabet
    events = alphabet.names
    start = comp.initial()
    index = {start: 0}
    configs = [start]
    trans = []
    i = 0
    while i < len(configs):
        active, vals = configs[i]
        row = {}
        for ev in events:
            nxt = comp.step(active, vals, ev)
            if nxt is None:
                continue
            j = index.get(nxt)
            if j is None:
                j = index[nxt] = len(configs)
                configs.append(nxt)
                if len(configs) > cap:
                    raise CapExceeded(f"flattening exceeds {cap} configurations")
            row[ev] = j
        trans.append(row)
        i += 1
    assert len(configs) <= sc.configuration_bound()
    names = tuple(comp.label(a, v) for a, v in configs)
    marked = frozenset(j for j, (a, _) in enumerate(configs) if comp.marked(a))
    return Automaton(alphabet, names, 0, marked, tuple(trans))
