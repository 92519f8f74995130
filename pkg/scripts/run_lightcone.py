"""Empirical light cone on a Heisenberg chain, compared with the certified velocities.

    python3 scripts/run_lightcone.py --length 10 --n-times 32
"""

import argparse
import json
from pathlib import Path

import numpy as np

from lrkit.algebra import pauli
from lrkit.bounds import certify, optimal_velocity
from lrkit.cli import write_grid_csv, write_json
from lrkit.dynamics import diagonalize
from lrkit.geometry import DecayFunction, MetricGraph
from lrkit.model import build_hamiltonian, heisenberg_interaction, heisenberg_onsite
from lrkit.quasilocality import light_cone_scan


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--length", type=int, default=10)
    p.add_argument("--h", type=float, default=0.5)
    p.add_argument("--t-max", type=float, default=3.0)
    p.add_argument("--n-times", type=int, default=32)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="out/lightcone")
    args = p.parse_args()

    g = MetricGraph.chain(args.length)
    phi = heisenberg_interaction(g, 1.0)
    e = diagonalize(build_hamiltonian(g, heisenberg_onsite(g, args.h), phi))
    f = DecayFunction(1.0, 1.0, 1)
    ev = certify(phi, f, g)
    v_opt = optimal_velocity(phi, f, g)[1]
    times = np.linspace(0, args.t_max, args.n_times)
    distances = range(1, min(7, args.length))
    rep = light_cone_scan(e, pauli(3, 0), pauli(3).matrix, distances, times, args.threshold,
                          ev, f, g, threads=args.threads, optimal=v_opt)
    out = Path(args.out)
    write_json(out / "lightcone.json", rep.to_dict())
    write_grid_csv(out / "lightcone.csv", rep.grid)
    for d, t in rep.crossings:
        print(f"d={d:g}: crossing t={'none' if t is None else f'{t:.4f}'}")
    print(json.dumps({"fitted": rep.fitted_velocity, "certified_a1": rep.theoretical_velocity,
                      "optimal": v_opt, "checks": rep.checks}, indent=2))


if __name__ == "__main__":
    main()
