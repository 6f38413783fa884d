#!/usr/bin/env python3
"""Dump full telemetry trajectories for the bundled desk instances.

For every instance/family pairing this writes one trajectory CSV
(gnuplot-ready; includes the potential column when the ground-truth
optimum is available) and prints the worst telemetry margins observed.
"""

import argparse
from pathlib import Path

from drsub import family_spec, potential_series, preset, run, trajectory_csv
from drsub.desk import bundled_instances
from drsub.oracle import grid_search, set_bruteforce


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/traces", help="output directory")
    parser.add_argument("--iters", type=int, default=200)
    args = parser.parse_args()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    for inst in bundled_instances():
        if inst.set_function is not None:
            opt = set_bruteforce(inst.set_function, inst.body).value
        else:
            opt = grid_search(inst.objective, inst.body).value
        for family in ("monotone", "measured", "general"):
            if family == "monotone" and not inst.objective.monotone:
                continue
            s, spec = preset(family), family_spec(family)
            traj = run(inst.objective, inst.body, s, spec, args.iters)
            series = potential_series(traj, s, opt) if opt > 0 else None
            path = out_dir / f"{inst.name}_{family}.csv"
            path.write_text(trajectory_csv(traj, series))
            headroom = traj.min_gronwall_margin
            print(f"{inst.name:18s} {family:9s} final {traj.final_value:8.5f} "
                  f"opt {opt:8.5f} "
                  f"potential-margin {series.min_margin if series else float('nan'):+.2e} "
                  f"headroom {headroom if headroom is not None else float('nan'):+.2e}")
    print(f"trajectories written to {out_dir}/")


if __name__ == "__main__":
    main()
