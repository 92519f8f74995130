"""Acceptance criteria 1-10, each at its stated tolerance.

Every test records one PASS/FAIL line (shown in the terminal summary) and then
asserts, so a failing criterion is both reported and red.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import heisenberg_engine
from lrkit import config as config_mod
from lrkit.algebra import Observable, embed, operator_norm, pauli, random_hermitian
from lrkit.bounds import certify, golden_section, heisenberg_velocity_bound, optimal_velocity
from lrkit.cli import main, simulate
from lrkit.dynamics import commutator_norms, default_times, diagonalize, evolve, evolve_taylor
from lrkit.geometry import (DecayFunction, MetricGraph, convolution_constant_empirical, f_norm,
                            lattice_f_norm)
from lrkit.model import build_hamiltonian, heisenberg_interaction, heisenberg_onsite, interaction_norm
from lrkit.quasilocality import localization_error

TIMES_02 = default_times(2.0, 64)
TIMES_01 = default_times(1.0, 64)


def chain_config(h, pauli_k=3, L=8):
    return config_mod.parse({
        "geometry": {"nu": 1, "length": L},
        "model": {"model": "heisenberg", "J": 1.0, "h": h},
        "decay": {"epsilon": 1.0, "a": 1.0},
        "dynamics": {"A": {"site": [0], "pauli": pauli_k},
                     "B": {"pauli": pauli_k, "sites": [[d] for d in range(1, L)]},
                     "times": TIMES_02},
    })


# --- 1 ---------------------------------------------------------------------------

def test_c1_interaction_norm_closed_form(acceptance):
    start = time.perf_counter()
    g = MetricGraph.chain(8)
    worst = 0.0
    for J in (0.5, 1.0, 2.0):
        phi = heisenberg_interaction(g, J)
        for a in (0.0, 0.5, 1.0, 2.0):
            got = interaction_norm(phi, DecayFunction(1.0, a, 1), g)
            want = math.exp(a) * 4 * 3 * J
            worst = max(worst, abs(got - want) / want)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 1.0
    acceptance("C1 interaction norm", ok, f"max rel err {worst:.1e}, {elapsed:.3f}s")
    assert ok


# --- 2 ---------------------------------------------------------------------------

def test_c2_bound_dominance(acceptance):
    start = time.perf_counter()
    cells = 0
    worst22 = worst24 = -np.inf
    for h in (0.0, 0.5):
        rows, _ = simulate(chain_config(h))
        arr = np.array(rows, dtype=float)
        cells += len(arr)
        worst22 = max(worst22, float(np.max(arr[:, 2] - arr[:, 3])))
        worst24 = max(worst24, float(np.max(arr[:, 2] - arr[:, 4])))
    elapsed = time.perf_counter() - start
    ok = cells >= 896 and worst22 <= 1e-9 and worst24 <= 1e-9 and elapsed < 120
    acceptance("C2 bound dominance", ok,
               f"{cells} cells, max(measured - bound) = {worst22:.2e} / {worst24:.2e}, {elapsed:.1f}s")
    assert ok


# --- 3 ---------------------------------------------------------------------------

def test_c3_onsite_independence(acceptance):
    # S1 observables: the field rotates them, so the measured norms feel h.
    # With S3 observables the measured norms are h-independent in exact arithmetic
    # (total S3 is conserved and commutes with A), which the second block records.
    grids = {h: np.array(simulate(chain_config(h, pauli_k=1))[0], dtype=float) for h in (0.0, 0.5)}
    bounds_equal = np.array_equal(grids[0.0][:, 3:], grids[0.5][:, 3:])
    diff = float(np.max(np.abs(grids[0.0][:, 2] - grids[0.5][:, 2])))
    s3 = {h: np.array(simulate(chain_config(h, pauli_k=3))[0], dtype=float) for h in (0.0, 0.5)}
    s3_bounds_equal = np.array_equal(s3[0.0][:, 3:], s3[0.5][:, 3:])
    s3_diff = float(np.max(np.abs(s3[0.0][:, 2] - s3[0.5][:, 2])))
    ok = bounds_equal and s3_bounds_equal and diff > 1e-6
    acceptance("C3 on-site independence", ok,
               f"bounds bit-identical={bounds_equal and s3_bounds_equal}, "
               f"S1 measured max diff {diff:.3g}, S3 measured max diff {s3_diff:.1e}")
    assert ok


# --- 4 ---------------------------------------------------------------------------

def _c4_run():
    lattice_f_norm.cache_clear()
    start = time.perf_counter()
    g = MetricGraph.chain(8)
    phi = heisenberg_interaction(g, 1.0)
    f = DecayFunction(1.0, 1.0, 1)
    a_star, v_star = optimal_velocity(phi, f, g)
    fnorm = lattice_f_norm(1, 1.0).upper
    # closed-form objective: ||Phi||_a proportional to e^a, so v(a) ~ e^a / a, minimized at a = 1
    a_closed, _ = golden_section(lambda a: math.exp(a) / a, 1e-3, 10.0)
    return a_star, v_star, a_closed, fnorm, time.perf_counter() - start


def test_c4_optimal_velocity_paper_constant(acceptance):
    a_star, v_star, a_closed, fnorm, elapsed = _c4_run()
    closed = heisenberg_velocity_bound(1.0, 1, 1.0, fnorm)  # 3 J e 2^(2(nu+eps+1)) ||F||
    ok = (v_star <= closed + 1e-6 and abs(a_closed - 1) <= 1e-4 and abs(a_star - 1) <= 1e-4
          and elapsed < 1.0)
    acceptance("C4 optimal velocity (2^(2(nu+eps+1)) constant)", ok,
               f"v*={v_star:.10g} <= {closed:.10g}, a*={a_star:.8f}, closed-form a*={a_closed:.8f}, "
               f"{elapsed:.3f}s")
    assert ok


def test_c4_optimal_velocity_literal_constant(acceptance):
    """The criterion as worded, with 2^4; see the decisions ledger for why it cannot hold."""
    a_star, v_star, a_closed, fnorm, elapsed = _c4_run()
    literal = 3 * 1.0 * math.e * 2**4 * fnorm
    ok = (v_star <= literal + 1e-6 and abs(a_closed - 1) <= 1e-4 and elapsed < 1.0)
    acceptance("C4 optimal velocity (literal 2^4 constant)", ok,
               f"v*={v_star:.10g} vs {literal:.10g}, closed-form a*={a_closed:.8f}")
    assert ok


# --- 5 ---------------------------------------------------------------------------

def test_c5_taylor_oracle(acceptance):
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    worst = 0.0
    engines = {}
    for _ in range(50):
        L = int(rng.integers(2, 5))
        h = round(float(rng.uniform(0, 1)), 3)
        if (L, h) not in engines:
            g = MetricGraph.chain(L)
            H = build_hamiltonian(g, heisenberg_onsite(g, h), heisenberg_interaction(g, 1.0))
            engines[(L, h)] = (g, H, diagonalize(H))
        g, H, e = engines[(L, h)]
        k = int(rng.integers(1, min(L, 2) + 1))
        sites = sorted(rng.choice(L, size=k, replace=False).tolist())
        A = random_hermitian([g.sites[i] for i in sites], rng)
        t = float(rng.uniform(-0.1, 0.1))
        tay = evolve_taylor(H, A, t, order=20).observable.matrix
        worst = max(worst, operator_norm(tay - evolve(e, A, t).matrix))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 30
    acceptance("C5 Taylor oracle", ok, f"50 observables, max dev {worst:.1e}, {elapsed:.2f}s")
    assert ok


# --- 6 ---------------------------------------------------------------------------

def test_c6_dynamics_invariants(acceptance):
    rng = np.random.default_rng(6)
    dev = {"group": 0.0, "isometry": 0.0, "automorphism": 0.0, "hermitian": 0.0,
           "tau0": 0.0, "energy": 0.0}
    for _ in range(20):
        L = int(rng.integers(2, 7))
        g, _, e = heisenberg_engine(L, float(rng.uniform(0.5, 1.5)), float(rng.uniform(0, 1)))
        vol = e.volume
        pick = lambda k: [vol[i] for i in sorted(rng.choice(L, size=k, replace=False))]
        A = random_hermitian(pick(min(2, L)), rng)
        B = random_hermitian(pick(1), rng)
        s, t = (float(x) for x in rng.uniform(-2, 2, 2))
        lhs = evolve(e, evolve(e, A, s), t).matrix
        dev["group"] = max(dev["group"], operator_norm(lhs - evolve(e, A, s + t).matrix))
        At = evolve(e, A, t)
        dev["isometry"] = max(dev["isometry"], abs(operator_norm(At) - operator_norm(A)))
        dev["hermitian"] = max(dev["hermitian"], float(np.abs(At.matrix - At.matrix.conj().T).max()))
        AB = Observable(embed(A, vol).matrix @ embed(B, vol).matrix, vol)
        prod = At.matrix @ evolve(e, B, t).matrix
        dev["automorphism"] = max(dev["automorphism"], operator_norm(evolve(e, AB, t).matrix - prod))
        dev["tau0"] = max(dev["tau0"], float(np.abs(evolve(e, A, 0.0).matrix - embed(A, vol).matrix).max()))
        dev["energy"] = max(dev["energy"],
                            operator_norm(evolve(e, e.hamiltonian, t).matrix - e.hamiltonian.matrix))
    tol = {"group": 1e-9, "isometry": 1e-10, "automorphism": 1e-9, "hermitian": 1e-9,
           "tau0": 0.0, "energy": 1e-10}
    ok = all(dev[k] <= tol[k] for k in dev)
    acceptance("C6 dynamics invariants", ok, ", ".join(f"{k} {v:.1e}" for k, v in dev.items()))
    assert ok


# --- 7 ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def c7_table():
    g, phi, e = heisenberg_engine(8, 1.0, 0.5)
    f = DecayFunction(1.0, 1.0, 1)
    ev = certify(phi, f, g)
    A = pauli(3, 0)
    table = {}
    for r in (1, 2, 3):
        ball = [s for s in g.sites if g.distance(s, (0,)) <= r]
        table[r] = [localization_error(e, A, t, ball, ev, f, g) for t in TIMES_01]
    return table


def test_c7_quasilocality_dominance(acceptance, c7_table):
    worst = max(m - c for rows in c7_table.values() for m, c in rows)
    ok = worst <= 1e-9
    acceptance("C7 quasi-locality (measured <= certified)", ok,
               f"3 radii x {len(TIMES_01)} times, max(measured - certified) = {worst:.2e}")
    assert ok


def test_c7_quasilocality_monotone_in_radius(acceptance, c7_table):
    bad = [(t, c7_table[1][i][0], c7_table[2][i][0], c7_table[3][i][0])
           for i, t in enumerate(TIMES_01)
           if not c7_table[1][i][0] >= c7_table[2][i][0] >= c7_table[3][i][0]]
    ok = not bad
    detail = "non-increasing at every time" if ok else (
        f"{len(bad)}/{len(TIMES_01)} times violate, first t={bad[0][0]:.4f}: "
        f"r=1,2,3 -> {bad[0][1]:.4f}, {bad[0][2]:.4f}, {bad[0][3]:.4f}")
    acceptance("C7 quasi-locality (monotone in radius)", ok, detail)
    assert ok


# --- 8 ---------------------------------------------------------------------------

def test_c8_degenerate_controls(acceptance):
    L = 8
    far = range(1, L)
    _, _, free = heisenberg_engine(L, 0.0, 0.5)
    free_max = 0.0
    for k in (1, 2, 3):
        norms = commutator_norms(free, pauli(k, 0), [pauli(kk, d) for d in far for kk in (1, 3)],
                                 TIMES_02)
        free_max = max(free_max, float(norms.max()))
    _, _, e = heisenberg_engine(L, 1.0, 0.5)
    rng = np.random.default_rng(8)
    A = random_hermitian([(0,), (1,)], rng)
    Bs = [random_hermitian([(d,)], rng) for d in range(2, L)] + [pauli(3, d) for d in range(2, L)]
    at_zero = commutator_norms(e, A, Bs, [0.0], fast_path=False)
    at_zero_fast = commutator_norms(e, A, Bs, [0.0])
    zero_exact = bool(np.all(at_zero == 0.0) and np.all(at_zero_fast == 0.0))
    norms = commutator_norms(e, A, Bs, TIMES_02)
    trivial = max(float(np.max(row - 2 * operator_norm(A) * operator_norm(B)))
                  for B, row in zip(Bs, norms))
    ok = free_max <= 1e-10 and zero_exact and trivial <= 1e-9
    acceptance("C8 degenerate controls", ok,
               f"J=0 max {free_max:.1e}, t=0 exact zeros={zero_exact}, "
               f"max(measured - 2|A||B|) = {trivial:.2e}")
    assert ok


# --- 9 ---------------------------------------------------------------------------

def test_c9_geometry_certificates(acceptance):
    worst_ratio = 0.0
    for nu, eps in ((1, 1.0), (2, 0.5)):
        lat = lattice_f_norm(nu, eps)
        for R in range(5, 21):
            g = MetricGraph.box(nu, R)
            f = DecayFunction(eps, 0.0, nu)
            emp = convolution_constant_empirical(f, g)
            worst_ratio = max(worst_ratio, emp / (2 ** (nu + eps + 1) * f_norm(f, g)),
                              emp / (2 ** (nu + eps + 1) * lat.upper))
    widths = [lattice_f_norm(nu, eps).width for nu, eps in ((1, 1.0), (2, 0.5))]
    val = lattice_f_norm(1, 1.0)
    err = max(abs(val.lower - (math.pi**2 / 3 - 1)), abs(val.upper - (math.pi**2 / 3 - 1)))
    ok = worst_ratio <= 1.0 and max(widths) <= 1e-10 and err <= 1e-8
    acceptance("C9 geometry certificates", ok,
               f"max C_emp / 2^(nu+eps+1)||F|| = {worst_ratio:.4f}, tail bracket {max(widths):.1e}, "
               f"|F| vs pi^2/3-1 {err:.1e}")
    assert ok


# --- 10 --------------------------------------------------------------------------

def test_c10_golden_determinism(acceptance, tmp_path):
    cfg = tmp_path / "golden.json"
    cfg.write_text(json.dumps({
        "geometry": {"nu": 1, "length": 6},
        "model": {"model": "heisenberg", "J": 1.0, "h": 0.5},
        "decay": {"epsilon": 1.0, "a": 1.0},
        "dynamics": {"A": {"site": [0], "pauli": 3},
                     "B": {"pauli": 3, "distances": [1, 2, 3, 4, 5]},
                     "times": [0.0, 0.5, 1.0]},
        "outputs": {"formats": ["csv"]},
    }))
    outs = []
    for i, threads in enumerate(("1", "1", "4", "4")):
        out = tmp_path / f"run{i}"
        assert main(["simulate", "--config", str(cfg), "--out", str(out), "--threads", threads]) == 0
        outs.append((out / "simulate.csv").read_bytes())
    ok = all(o == outs[0] for o in outs) and len(outs[0].splitlines()) == 16
    acceptance("C10 determinism", ok, f"4 runs (threads 1,1,4,4), {len(outs[0])} bytes each")
    assert ok
