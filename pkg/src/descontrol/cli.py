"""Command-line entry point.

Exit codes: 0 success, 1 the analysis ran and a property failed
(not controllable, conflicting, violations found, breach), 2 usage or
format errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from descontrol import elevator
from descontrol.errors import ControllabilityBreach, ModelError
from descontrol.fsa import dump_fsa, load_fsa, meet, sync, trim
from descontrol.simulator import (
    Adversary,
    ClosedLoop,
    Script,
    exhaustive_reach,
    parse_traces,
    run,
)
from descontrol.statechart import CONFIG_CAP, flatten, load_statechart
from descontrol.synthesis import Supervisor, check_controllable, lift, supcon


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _combined_spec(plant, paths, cap):
    spec = None
    for path in paths:
        lifted = lift(load_fsa(path), plant.alphabet)
        spec = lifted if spec is None else meet(spec, lifted, cap)
    return spec


def _supervisors(plant, paths):
    return [Supervisor.from_realization(plant, load_fsa(p)) for p in paths]


def disablement_listing(sup: Supervisor) -> str:
    lines = []
    for state, events in sorted(sup.disabled.items()):
        if events:
            lines.append(f"disable {sup.realization.names[state]} {' '.join(sorted(events))}")
    return "".join(line + "\n" for line in lines)


def cmd_product(args):
    a, b = load_fsa(args.a), load_fsa(args.b)
    _emit(dump_fsa(meet(a, b, args.cap)), args.out)
    return 0


def cmd_sync(args):
    if len(args.files) < 2:
        raise UsageError("sync needs at least two automata")
    result = load_fsa(args.files[0])
    for path in args.files[1:]:
        result = sync(result, load_fsa(path), args.cap)
    _emit(dump_fsa(result), args.out)
    return 0


def cmd_trim(args):
    _emit(dump_fsa(trim(load_fsa(args.file))), args.out)
    return 0


def cmd_check(args):
    plant = load_fsa(args.plant)
    spec = lift(load_fsa(args.spec), plant.alphabet)
    report = check_controllable(plant, spec)
    if args.format == "structured":
        body = {
            "controllable": report.controllable,
            "violations": [
                {
                    "spec_state": spec.names[v.spec_state],
                    "plant_state": plant.names[v.plant_state],
                    "event": v.event,
                    "witness": list(v.witness),
                }
                for v in report.violations
            ],
        }
        _emit(json.dumps(body, sort_keys=True) + "\n", args.out)
    else:
        lines = ["controllable" if report.controllable else "not controllable"]
        for v in report.violations:
            lines.append(
                f"violation spec={spec.names[v.spec_state]} plant={plant.names[v.plant_state]} "
                f"event={v.event} witness={' '.join(v.witness) or '-'}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    return 0 if report.controllable else 1


def cmd_supcon(args):
    plant = load_fsa(args.plant)
    spec = _combined_spec(plant, args.spec, args.cap)
    sup = supcon(plant, spec, args.cap)
    listing = disablement_listing(sup)
    if args.out:
        Path(args.out).write_text(dump_fsa(sup.realization), encoding="utf-8")
        Path(args.out + ".disable").write_text(listing, encoding="utf-8")
    else:
        sys.stdout.write(dump_fsa(sup.realization))
        sys.stdout.write("".join(f"# {line}\n" for line in listing.splitlines()))
    if sup.is_empty:
        print("supervisor is empty", file=sys.stderr)
        return 1
    return 0


def cmd_flatten(args):
    cap = args.cap if args.cap is not None else CONFIG_CAP
    _emit(dump_fsa(flatten(load_statechart(args.chart), cap)), args.out)
    return 0


def cmd_simulate(args):
    plant = load_fsa(args.plant)
    sups = _supervisors(plant, args.sup)
    if args.script:
        text = Path(args.script).read_text(encoding="utf-8")
        sources = [
            Script(t, f"{Path(args.script).name}:{i}") for i, t in enumerate(parse_traces(text), 1)
        ]
    else:
        weights = None
        if args.weights:
            weights = json.loads(Path(args.weights).read_text(encoding="utf-8"))
        sources = [Adversary(args.seed, weights)]
    chunks = []
    for src in sources:
        loop = ClosedLoop(plant, sups)
        log = run(loop, src, args.max_steps)
        chunks.append(log.to_json() if args.format == "structured" else log.to_text())
    _emit("".join(chunks), args.out)
    return 0


def cmd_reach(args):
    plant = load_fsa(args.plant)
    sups = _supervisors(plant, args.sup)
    state_pred = edge_pred = None
    if args.forbid:
        pattern = re.compile(args.forbid)
        if args.forbid_on:
            event_re = re.compile(args.forbid_on)
            edge_pred = lambda names, event: bool(  # noqa: E731
                event_re.fullmatch(event) and pattern.search(names[0])
            )
        else:
            state_pred = lambda names: bool(pattern.search(names[0]))  # noqa: E731

    kwargs = {"cap": args.cap} if args.cap is not None else {}
    report = exhaustive_reach(plant, sups, state_pred, edge_pred, **kwargs)
    lines = [f"reachable {len(report.states)}", f"violations {len(report.violations)}"]
    for tup, event in report.violations:
        names = [plant.names[tup[0]]]
        lines.append(f"violation state={names[0]} event={event or '-'}")
    _emit("\n".join(lines) + "\n", args.out)
    return 1 if report.violations else 0


def cmd_elevator_gen(args):
    cfg = elevator.ElevatorConfig(args.floors, args.cars).check()
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    kwargs = {"cap": args.cap} if args.cap is not None else {}
    plant = elevator.build_plant(cfg, **kwargs)
    files = {"plant": "plant.fsa", "specs": {}}
    (out / "plant.fsa").write_text(dump_fsa(plant), encoding="utf-8")
    for name, spec in elevator.build_specs(cfg):
        (out / f"{name}.fsa").write_text(dump_fsa(spec), encoding="utf-8")
        files["specs"][name] = f"{name}.fsa"
    if cfg.cars <= 2:
        (out / "elevator.sc").write_text(elevator.statechart_text(cfg), encoding="utf-8")
        files["statechart"] = "elevator.sc"
    if cfg.floors >= 6:
        trace = elevator.table2_trace(cfg)
        (out / "table2.trace").write_text(" ".join(trace) + "\n", encoding="utf-8")
        files["trace"] = "table2.trace"
    manifest = {
        "floors": cfg.floors,
        "cars": cfg.cars,
        "alphabet": [
            {"name": e.name, "controllable": e.controllable} for e in plant.alphabet
        ],
        "local_specs": {c: elevator.local_spec_names(cfg, c) for c in cfg.car_ids},
        "global_specs": elevator.global_spec_names(cfg),
        "files": files,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--max-steps", type=int, default=1000)
    common.add_argument("--cap", type=int, default=None, help="state cap for explicit constructions")
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--out", default=None)

    parser = argparse.ArgumentParser(prog="descontrol", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("product", parents=[common], help="meet of two automata")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("sync", parents=[common], help="synchronous composition")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_sync)

    p = sub.add_parser("trim", parents=[common])
    p.add_argument("file")
    p.set_defaults(func=cmd_trim)

    p = sub.add_parser("check", parents=[common], help="controllability of a spec")
    p.add_argument("--plant", required=True)
    p.add_argument("--spec", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("supcon", parents=[common], help="synthesize a supervisor")
    p.add_argument("--plant", required=True)
    p.add_argument("--spec", required=True, action="append")
    p.set_defaults(func=cmd_supcon)

    p = sub.add_parser("flatten", parents=[common], help="statechart to automaton")
    p.add_argument("chart")
    p.set_defaults(func=cmd_flatten)

    p = sub.add_parser("simulate", parents=[common], help="closed-loop run")
    p.add_argument("--plant", required=True)
    p.add_argument("--sup", required=True, action="append")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--script")
    src.add_argument("--adversary", action="store_true")
    p.add_argument("--weights", help="JSON object of event weights for the adversary")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reach", parents=[common], help="exhaustive closed-loop reachability")
    p.add_argument("--plant", required=True)
    p.add_argument("--sup", required=True, action="append")
    p.add_argument("--forbid", help="regex over plant state names")
    p.add_argument("--forbid-on", help="only flag FORBID states when this event regex fires")
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("elevator-gen", parents=[common], help="emit the elevator case files")
    p.add_argument("--floors", type=int, required=True)
    p.add_argument("--cars", type=int, required=True)
    p.set_defaults(func=cmd_elevator_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ControllabilityBreach as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ModelError, UsageError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
