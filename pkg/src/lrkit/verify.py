"""Invariant suite behind ``lrkit verify``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from .algebra import Observable, embed, operator_norm, random_hermitian
from .bounds import (certify, heisenberg_velocity_bound, lr_bound, lr_bound_corollary,
                     optimal_velocity, velocity_objective)
from .config import ExperimentConfig, rng_for
from .dynamics import (TaylorPreconditionError, commutator_norms, diagonalize, evolve,
                       evolve_taylor)
from .geometry import (MetricGraph, convolution_constant_analytic,
                       convolution_constant_empirical, lattice_f_norm)
from .model import build_hamiltonian, heisenberg_interaction, heisenberg_onsite, interaction_norm
from .quasilocality import localization_error

# short times where the bound is tight; without them a weakened g_a goes unnoticed
SHORT_TIMES = [float(t) for t in np.geomspace(1e-4, 1e-2, 9)]


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


def _metric_axioms(g: MetricGraph, rng) -> Check:
    n = len(g)
    D = g.distance_matrix
    if n**3 <= 1000:
        triples = itertools.product(range(n), repeat=3)
    else:
        triples = (tuple(rng.integers(0, n, 3)) for _ in range(1000))
    ok = bool(np.all(np.diag(D) == 0) and np.array_equal(D, D.T))
    ok &= all(D[i, k] <= D[i, j] + D[j, k] for i, j, k in triples)
    return Check("geometry.metric_axioms", ok)


def _geometry(cfg: ExperimentConfig, rng) -> list[Check]:
    f, g = cfg.decay, cfg.graph
    emp = convolution_constant_empirical(f, g)
    ana = convolution_constant_analytic(f, g)
    lat = lattice_f_norm(f.dimension, f.epsilon)
    return [
        _metric_axioms(g, rng),
        Check("geometry.convolution_certificate", emp <= ana + 1e-12, f"C_emp={emp:.6g} <= {ana:.6g}"),
        Check("geometry.lattice_f_norm_bracket", lat.width <= 1e-10, f"width={lat.width:.2e}"),
    ]


def _heisenberg_norm(cfg: ExperimentConfig) -> list[Check]:
    spec = cfg.model_spec
    if spec.get("model") != "heisenberg" or not (cfg.graph.distance_matrix == 1).any():
        return []
    J, f = abs(float(spec.get("J", 1.0))), cfg.decay
    got = interaction_norm(cfg.interaction, f, cfg.graph)
    want = math.exp(f.weight_a) * 2 ** f.exponent * 3 * J
    ok = abs(got - want) <= 1e-10 * max(want, 1.0)
    return [Check("model.heisenberg_norm_closed_form", ok, f"{got:.12g} vs {want:.12g}")]


def _engine(e) -> Check:
    V, w = e.eigenvectors, e.eigenvalues
    unit = np.abs(V.conj().T @ V - np.eye(len(w))).max()
    rec = operator_norm((V * w) @ V.conj().T - e.hamiltonian.matrix)
    return Check("dynamics.engine_unitarity", unit <= 1e-10 and rec <= 1e-10,
                 f"unitarity={unit:.1e} reconstruction={rec:.1e}")


def _dynamics_laws(e, cfg: ExperimentConfig, rng, n_random: int = 5) -> list[Check]:
    vol = e.volume
    group = iso = auto = herm = True
    worst = 0.0
    for _ in range(n_random):
        sites = [vol[i] for i in sorted(rng.choice(len(vol), size=min(2, len(vol)), replace=False))]
        A, B = random_hermitian(sites, rng), random_hermitian(sites, rng)
        s, t = rng.uniform(-1, 1, 2)
        As = evolve(e, A, s)
        lhs = evolve(e, As, t).matrix
        rhs = evolve(e, A, s + t).matrix
        worst = max(worst, operator_norm(lhs - rhs))
        group &= operator_norm(lhs - rhs) <= 1e-9
        iso &= abs(operator_norm(As) - operator_norm(A)) <= 1e-10
        herm &= As.is_hermitian(1e-10)
        AB = embed(A, vol).matrix @ embed(B, vol).matrix
        prod = evolve(e, Observable(AB, vol), t).matrix
        auto &= operator_norm(prod - evolve(e, A, t).matrix @ evolve(e, B, t).matrix) <= 1e-9
    energy = operator_norm(evolve(e, e.hamiltonian, 0.7).matrix - e.hamiltonian.matrix)
    return [
        Check("dynamics.group_law", group, f"max dev {worst:.1e}"),
        Check("dynamics.isometry", iso),
        Check("dynamics.automorphism", auto and herm),
        Check("dynamics.energy_invariance", energy <= 1e-9 * max(1.0, operator_norm(e.hamiltonian)),
              f"{energy:.1e}"),
    ]


def _oracle(cfg: ExperimentConfig, rng, n_random: int = 5) -> Check:
    worst = 0.0
    for _ in range(n_random):
        L = int(rng.integers(2, 5))
        g = MetricGraph.chain(L)
        H = build_hamiltonian(g, heisenberg_onsite(g, float(rng.uniform(0, 1))),
                              heisenberg_interaction(g, 1.0))
        e = diagonalize(H)
        A = random_hermitian([g.sites[int(rng.integers(L))]], rng)
        t = float(rng.uniform(-0.1, 0.1))
        try:
            tay = evolve_taylor(H, A, t, order=20).observable.matrix
        except TaylorPreconditionError as exc:
            return Check("dynamics.taylor_oracle", False, str(exc))
        worst = max(worst, operator_norm(tay - evolve(e, A, t).matrix))
    return Check("dynamics.taylor_oracle", worst <= 1e-8, f"max dev {worst:.1e}")


def run_checks(cfg: ExperimentConfig, threads: int = 1) -> list[Check]:
    rng = rng_for(cfg, "verify")
    g, f, A = cfg.graph, cfg.decay, cfg.A
    checks = _geometry(cfg, rng) + _heisenberg_norm(cfg)
    e = diagonalize(build_hamiltonian(g, cfg.onsite, cfg.interaction))
    checks.append(_engine(e))
    checks += _dynamics_laws(e, cfg, rng_for(cfg, "dynamics"))
    checks.append(_oracle(cfg, rng_for(cfg, "oracle")))

    ev = replace(certify(cfg.interaction, f, g), g_scale=cfg.g_scale)
    times = sorted(set(cfg.times) | set(SHORT_TIMES))
    Bs = [cfg.B_at(s) for s in cfg.B_sites]
    norms = commutator_norms(e, A, Bs, times, threads)
    nA = operator_norm(A)
    dom22 = dom24 = trivial = True
    for B, row in zip(Bs, norms):
        nB = operator_norm(B)
        b22 = lr_bound(ev, A.support, B.support, f, g, nA, nB, times)
        dom22 &= bool(np.all(row <= b22 + 1e-9))
        trivial &= bool(np.all(row <= 2 * nA * nB + 1e-9))
        if ev.a > 0 and not set(A.support) & set(B.support):
            b24 = lr_bound_corollary(ev, A.support, B.support, g, nA, nB, times)
            dom24 &= bool(np.all(row <= b24 + 1e-9))
    checks += [Check("bounds.dominance_theorem", dom22, f"{norms.size} cells"),
               Check("bounds.dominance_corollary", dom24),
               Check("bounds.trivial_bound", trivial)]

    # bound values are recomputed from scratch and must match bit for bit;
    # certify never receives the on-site terms, so the field cannot enter
    def bound_grid():
        ev_h = replace(certify(cfg.interaction, f, g), g_scale=cfg.g_scale)
        return np.array([lr_bound(ev_h, A.support, B.support, f, g, nA, operator_norm(B), times)
                         for B in Bs])

    same = np.array_equal(bound_grid(), bound_grid())
    checks.append(Check("bounds.onsite_independence", bool(same)))

    if ev.a > 0 and ev.phi_norm > 0:
        lo, hi = cfg.a_interval
        a_star, v_star = optimal_velocity(cfg.interaction, f, g, cfg.a_interval)
        obj = velocity_objective(cfg.interaction, f, g)
        scan = min(obj(a) for a in np.linspace(lo, hi, 202)[1:-1])
        ok = v_star <= scan * (1 + 1e-6)
        if cfg.model_spec.get("model") == "heisenberg":
            J = abs(float(cfg.model_spec.get("J", 1.0)))
            ok &= v_star <= heisenberg_velocity_bound(J, f.dimension, f.epsilon, ev.f_norm_bare) + 1e-6
        checks.append(Check("bounds.optimal_velocity", bool(ok), f"a*={a_star:.6g} v*={v_star:.6g}"))

    # quasi-locality on the configured balls, t in [0, 1]
    ql_times = [t for t in cfg.times if 0 <= t <= 1][:16] or [0.0]
    origin = A.support[0]
    ql = True
    for r in cfg.balls:
        ball = [s for s in g.sites if g.distance(s, origin) <= r]
        if set(ball) == set(g.sites):
            continue
        for t in ql_times:
            m, c = localization_error(e, A, t, ball, ev, f, g)
            ql &= m <= c + 1e-9
    checks.append(Check("quasilocality.certified_error", ql))

    # free (J = 0) control: nothing propagates
    free = diagonalize(build_hamiltonian(g, heisenberg_onsite(g, 0.5), heisenberg_interaction(g, 0.0)))
    far = [B for B in Bs if not set(B.support) & set(A.support)]
    zero = commutator_norms(free, A, far, cfg.times, threads) if far else np.zeros(1)
    checks.append(Check("dynamics.free_control", float(np.max(zero)) <= 1e-10,
                        f"max {float(np.max(zero)):.1e}"))
    return checks


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  result  detail"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL':<6}  {c.detail}")
    return "\n".join(lines)
