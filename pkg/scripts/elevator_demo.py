"""Synthesize elevator supervisors and model-check door safety.

    python scripts/elevator_demo.py --floors 3 --cars 1
"""

import argparse
import time

from descontrol import elevator
from descontrol.simulator import Adversary, ClosedLoop, exhaustive_reach, run
from descontrol.synthesis import nonblocking, nonconflicting


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--floors", type=int, default=3)
    ap.add_argument("--cars", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--steps", type=int, default=40)
    args = ap.parse_args()
    cfg = elevator.ElevatorConfig(args.floors, args.cars).check()

    t0 = time.perf_counter()
    plant = elevator.build_plant(cfg)
    print(f"plant: {plant.num_states} states, {len(plant.delta)} transitions")
    sup = elevator.synthesize(cfg, plant=plant)
    r = sup.realization
    print(f"monolithic supervisor: {r.num_states} states, nonblocking={nonblocking(r)} "
          f"({time.perf_counter() - t0:.2f}s)")

    report = exhaustive_reach(plant, [sup], forbid_edge=elevator.door_open_move(cfg))
    print(f"closed loop: {len(report.states)} states, door-open moves: {len(report.violations)}")

    _, local, glob = elevator.synthesize_modular(cfg, plant)
    ok, witness = nonconflicting(local + [glob], plant)
    print(f"modular: local sizes {[s.realization.num_states for s in local]}, "
          f"global {glob.realization.num_states}, nonconflicting={ok}"
          + (f" witness={' '.join(witness)}" if witness else ""))

    log = run(ClosedLoop(plant, [sup]), Adversary(args.seed), args.steps)
    print(log.to_text(), end="")


if __name__ == "__main__":
    main()
