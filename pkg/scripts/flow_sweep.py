"""Run the deformation flow over several seeded factors and summarize.

Writes one trajectory CSV per seed into --outdir plus summary.csv with the
convergence time and worst-case monitors.
"""
import argparse
import csv
from pathlib import Path

from steklov import flow
from steklov.fixtures import random_factor


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--dt", type=float, default=5e-3)
    p.add_argument("--tau-max", type=float, default=50.0)
    p.add_argument("--record-every", type=int, default=100)
    p.add_argument("--outdir", default="flow_sweep")
    args = p.parse_args(argv)

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for seed in range(args.seeds):
        traj = flow.integrate(random_factor(seed), args.dt, args.tau_max, 1e-6, (-2.0, 2.0),
                              record_every=args.record_every, snapshot_m=2)
        flow.export(traj, out / f"seed{seed}.csv", out / f"seed{seed}.json", stride=5)
        rep = flow.monitor_report(traj)
        rows.append({"seed": seed, "degree": traj.states[0].factor.degree, "converged": traj.converged,
                     "tau": traj.final.tau, "final_distance": traj.final_distance, **rep})
        print(f"seed {seed}: converged={traj.converged} tau={traj.final.tau:.2f}")
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()
