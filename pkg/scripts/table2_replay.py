"""Replay the elevator use case on the 6-floor plant under door and stop supervisors."""

import argparse

from descontrol import elevator
from descontrol.simulator import ClosedLoop, Script, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--floors", type=int, default=6)
    ap.add_argument("--format", choices=("text", "structured"), default="text")
    args = ap.parse_args()
    cfg = elevator.ElevatorConfig(args.floors, 1).check()
    plant = elevator.build_plant(cfg)
    sups = [elevator.synthesize(cfg, [name], plant) for name in elevator.local_spec_names(cfg, 1)]
    log = run(ClosedLoop(plant, sups), Script(elevator.table2_trace(cfg), "table2"))
    print(log.to_json() if args.format == "structured" else log.to_text(), end="")
    final = plant.names[log.entries[-1].state[0]]
    print(f"# final plant state {final}")


if __name__ == "__main__":
    main()
