"""Localization error of tau_t(A) on nested balls, with the certified bound.

    python3 scripts/run_quasilocality.py --length 8 --n-times 64
"""

import argparse

import numpy as np

from lrkit.algebra import pauli
from lrkit.bounds import certify
from lrkit.dynamics import diagonalize
from lrkit.geometry import DecayFunction, MetricGraph
from lrkit.model import build_hamiltonian, heisenberg_interaction, heisenberg_onsite
from lrkit.quasilocality import localization_error


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--length", type=int, default=8)
    p.add_argument("--h", type=float, default=0.5)
    p.add_argument("--radii", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--n-times", type=int, default=64)
    args = p.parse_args()

    g = MetricGraph.chain(args.length)
    phi = heisenberg_interaction(g, 1.0)
    e = diagonalize(build_hamiltonian(g, heisenberg_onsite(g, args.h), phi))
    f = DecayFunction(1.0, 1.0, 1)
    ev = certify(phi, f, g)
    balls = {r: [s for s in g.sites if g.distance(s, (0,)) <= r] for r in args.radii}
    print("t        " + "  ".join(f"r={r} measured / certified" for r in args.radii) + "  monotone")
    for t in np.linspace(0, args.t_max, args.n_times):
        vals = [localization_error(e, pauli(3, 0), float(t), balls[r], ev, f, g) for r in args.radii]
        ms = [m for m, _ in vals]
        mono = all(a >= b for a, b in zip(ms, ms[1:]))
        print(f"{t:.4f}  " + "  ".join(f"{m:.4e} / {c:.3e}" for m, c in vals) + f"  {mono}")


if __name__ == "__main__":
    main()
